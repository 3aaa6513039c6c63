#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "plotsmith/model.hpp"
#include "plotsmith/validate.hpp"

namespace plotsmith {

/// Exact distribution over the joint (phase, task-vector) state.
///
/// `t` counts the observations absorbed so far. Slice 1 is drawn from the
/// initial law, so a t = 0 belief is already the prior over slice 1 and
/// advancing it to t = 1 applies no transition.
struct BeliefState {
  int t = 0;
  StateSpace space;
  std::vector<double> weights;
  double log_evidence = 0.0;
};

/// Prior over slice 1: initial phase law times the task slice density with
/// an all-zero previous slice.
BeliefState init_belief(const PlotModel& model);

/// Reusable propagation machinery for one model. Caches the per-phase task
/// transition matrices, keyed by the identity of the task tables in force,
/// so time-homogeneous stretches pay for them once.
class Propagator {
public:
  explicit Propagator(const PlotModel& model);

  const PlotModel& model() const { return *model_; }
  const StateSpace& space() const { return space_; }

  /// Pushes `weights` (describing time t - 1) through the joint kernel at
  /// time t. For t <= 1 the weights are returned unchanged.
  std::vector<double> advance(std::span<const double> weights, int t);

  /// Emission likelihood of z for every task vector at time t.
  std::vector<double> likelihood(const Observation& z, int t) const;

  BeliefState predict_step(const BeliefState& belief);
  BeliefState filter_step(const BeliefState& belief, const Observation& z);

private:
  using Matrix = std::vector<double>; // [previous][current], row-major

  const Matrix& task_matrix(Phase phase, int t);

  const PlotModel* model_;
  StateSpace space_;
  std::map<std::vector<const void*>, std::shared_ptr<Matrix>> cache_;
};

/// Predict with P(w_t | w_{t-1}) P(theta_t | theta_{t-1}, w_t), weight by the
/// emission density of z, renormalize. Throws Error("impossible_observation")
/// when the normalizer is zero.
BeliefState filter_step(const PlotModel& model, const BeliefState& belief, const Observation& z);

/// Propagation without emission reweighting.
BeliefState predict_step(const PlotModel& model, const BeliefState& belief);

/// init_belief followed by one filter_step per observation. Returns
/// observations.size() + 1 beliefs.
std::vector<BeliefState> filter_series(const PlotModel& model, std::span<const Observation> observations);

/// Phase marginals for the current step and each of `steps` further steps.
std::vector<std::vector<double>> predict_forward(const PlotModel& model, const BeliefState& belief, int steps);

std::vector<double> phase_marginal(const BeliefState& belief);
std::vector<double> phase_marginal(const StateSpace& space, std::span<const double> weights);

/// Index of the most probable phase (lowest index on ties).
Phase map_phase(const BeliefState& belief);

} // namespace plotsmith
