#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "plotsmith/model.hpp"

namespace plotsmith {

/// One sampled or hypothesised path: phases, tasks and intensities for
/// times 1..T (index 0 holds time 1).
struct Trajectory {
  std::vector<Phase> phases;
  std::vector<TaskMask> tasks;
  std::vector<Observation> intensities;
  std::uint64_t seed = 0;

  std::size_t length() const { return phases.size(); }
};

/// P(W_t = j | W_{t-1} = i). The inactive state is absorbing; otherwise
/// abort with q', stay with (1-q')(1-q), or move along an edge with
/// (1-q') q p_ij.
double phase_transition(const PlotModel& model, int t, Phase i, Phase j);

/// Non-zero entries of row i of the transition law at time t, ascending by j.
std::vector<std::pair<Phase, double>> transition_row(const PlotModel& model, int t, Phase i);

/// Product over tasks of P(theta_tk | contemporaneous parents, previous-slice
/// parents, phase). Non-indicative tasks use the inactive table. At t = 1 the
/// previous slice is taken to be all-zero.
double task_slice_density(const PlotModel& model, int t, TaskMask current, TaskMask previous, Phase phase);

/// P(theta_tk = 1 | ...) for one task; the building block of the slice density.
double task_probability(const PlotModel& model, int t, int task, TaskMask current, TaskMask previous, Phase phase);

/// Density of one emission given its task's value and parent intensities.
double intensity_density(const PlotModel& model, int t, int task, const Observation& z, bool theta);

/// Product over intensities of their emission densities.
/// Throws Error("invalid_observation") for malformed categorical symbols.
double intensity_slice_density(const PlotModel& model, int t, const Observation& z, TaskMask tasks);

/// log p(w, theta, z) for a whole trajectory starting at time 1; -inf when
/// the trajectory is impossible. Throws Error("length_mismatch").
double trajectory_log_density(const PlotModel& model, const Trajectory& trajectory);

/// Every inactive task table ignores its parents.
bool is_naive(const PlotModel& model);

/// For every active phase the within-slice parent structure restricted to
/// its task set is connected (single-task sets count as connected).
bool is_regular(const PlotModel& model);

} // namespace plotsmith
