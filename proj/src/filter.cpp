#include "plotsmith/filter.hpp"

#include <cmath>
#include <numeric>

#include "plotsmith/error.hpp"
#include "plotsmith/factors.hpp"

namespace plotsmith {

BeliefState init_belief(const PlotModel& model) {
  BeliefState belief;
  belief.space = StateSpace(model.m(), model.n());
  belief.weights.assign(belief.space.size(), 0.0);
  const auto vectors = belief.space.task_vectors();
  for (Phase j = 0; j <= model.m(); ++j) {
    const double pj = model.factors.phase.initial[j];
    if (pj == 0.0) continue;
    for (TaskMask theta = 0; theta < vectors; ++theta) {
      belief.weights[belief.space.index(j, theta)] = pj * task_slice_density(model, 1, theta, 0, j);
    }
  }
  return belief;
}

Propagator::Propagator(const PlotModel& model) : model_(&model), space_(model.m(), model.n()) {}

const Propagator::Matrix& Propagator::task_matrix(Phase phase, int t) {
  const int n = model_->n();
  std::vector<const void*> key;
  key.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) key.push_back(model_->factors.task[k].lookup(phase).ptr_at(t).get());
  auto& slot = cache_[key];
  if (slot) return *slot;

  const auto vectors = space_.task_vectors();
  auto matrix = std::make_shared<Matrix>(vectors * vectors, 0.0);
  for (TaskMask prev = 0; prev < vectors; ++prev) {
    double* row = matrix->data() + prev * vectors;
    for (TaskMask cur = 0; cur < vectors; ++cur) row[cur] = task_slice_density(*model_, t, cur, prev, phase);
  }
  slot = std::move(matrix);
  return *slot;
}

std::vector<double> Propagator::advance(std::span<const double> weights, int t) {
  if (t <= 1) return {weights.begin(), weights.end()};
  const int phases = space_.phases();
  const auto vectors = space_.task_vectors();

  // Mass arriving in phase j, still indexed by the previous task vector.
  std::vector<double> arriving(space_.size(), 0.0);
  std::vector<bool> reached(static_cast<std::size_t>(phases), false);
  for (Phase i = 0; i < phases; ++i) {
    const double* src = weights.data() + space_.index(i, 0);
    bool any = false;
    for (TaskMask prev = 0; prev < vectors && !any; ++prev) any = src[prev] != 0.0;
    if (!any) continue;
    for (const auto& [j, p] : transition_row(*model_, t, i)) {
      double* dst = arriving.data() + space_.index(j, 0);
      for (TaskMask prev = 0; prev < vectors; ++prev) dst[prev] += p * src[prev];
      reached[j] = true;
    }
  }

  std::vector<double> out(space_.size(), 0.0);
  for (Phase j = 0; j < phases; ++j) {
    if (!reached[j]) continue;
    const Matrix& matrix = task_matrix(j, t);
    const double* src = arriving.data() + space_.index(j, 0);
    double* dst = out.data() + space_.index(j, 0);
    for (TaskMask prev = 0; prev < vectors; ++prev) {
      const double w = src[prev];
      if (w == 0.0) continue;
      const double* row = matrix.data() + prev * vectors;
      for (TaskMask cur = 0; cur < vectors; ++cur) dst[cur] += w * row[cur];
    }
  }
  return out;
}

std::vector<double> Propagator::likelihood(const Observation& z, int t) const {
  const auto vectors = space_.task_vectors();
  std::vector<double> out(vectors);
  for (TaskMask theta = 0; theta < vectors; ++theta) out[theta] = intensity_slice_density(*model_, t, z, theta);
  return out;
}

BeliefState Propagator::predict_step(const BeliefState& belief) {
  BeliefState next = belief;
  next.t = belief.t + 1;
  next.weights = advance(belief.weights, next.t);
  return next;
}

BeliefState Propagator::filter_step(const BeliefState& belief, const Observation& z) {
  BeliefState next = predict_step(belief);
  const auto lik = likelihood(z, next.t);
  const auto vectors = space_.task_vectors();
  double norm = 0.0;
  for (std::size_t s = 0; s < next.weights.size(); ++s) {
    next.weights[s] *= lik[s & (vectors - 1)];
    norm += next.weights[s];
  }
  if (!(norm > 0.0)) {
    throw Error("impossible_observation",
                "observation at t=" + std::to_string(next.t) + " has zero probability under the model");
  }
  for (double& w : next.weights) w /= norm;
  next.log_evidence += std::log(norm);
  return next;
}

BeliefState filter_step(const PlotModel& model, const BeliefState& belief, const Observation& z) {
  Propagator prop(model);
  return prop.filter_step(belief, z);
}

BeliefState predict_step(const PlotModel& model, const BeliefState& belief) {
  Propagator prop(model);
  return prop.predict_step(belief);
}

std::vector<BeliefState> filter_series(const PlotModel& model, std::span<const Observation> observations) {
  Propagator prop(model);
  std::vector<BeliefState> out;
  out.reserve(observations.size() + 1);
  out.push_back(init_belief(model));
  for (const auto& z : observations) out.push_back(prop.filter_step(out.back(), z));
  return out;
}

std::vector<std::vector<double>> predict_forward(const PlotModel& model, const BeliefState& belief, int steps) {
  Propagator prop(model);
  std::vector<std::vector<double>> out;
  out.push_back(phase_marginal(belief));
  BeliefState current = belief;
  for (int s = 0; s < steps; ++s) {
    current = prop.predict_step(current);
    out.push_back(phase_marginal(current));
  }
  return out;
}

std::vector<double> phase_marginal(const StateSpace& space, std::span<const double> weights) {
  std::vector<double> out(static_cast<std::size_t>(space.phases()), 0.0);
  const auto vectors = space.task_vectors();
  for (Phase j = 0; j < space.phases(); ++j) {
    const double* src = weights.data() + space.index(j, 0);
    out[j] = std::accumulate(src, src + vectors, 0.0);
  }
  return out;
}

std::vector<double> phase_marginal(const BeliefState& belief) { return phase_marginal(belief.space, belief.weights); }

Phase map_phase(const BeliefState& belief) {
  auto marginal = phase_marginal(belief);
  Phase best = 0;
  for (Phase j = 1; j < static_cast<Phase>(marginal.size()); ++j) {
    if (marginal[j] > marginal[best]) best = j;
  }
  return best;
}

} // namespace plotsmith
