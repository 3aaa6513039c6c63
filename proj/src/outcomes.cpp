#include "plotsmith/outcomes.hpp"

#include <string>

#include "plotsmith/error.hpp"

namespace plotsmith {
namespace {

double absorb_success(const PlotModel& model, const StateSpace& space, std::vector<double>& weights) {
  double absorbed = 0.0;
  for (Phase j : model.success.phases) {
    if (j < 1 || j >= space.phases()) continue;
    for (TaskMask theta = 0; theta < space.task_vectors(); ++theta) {
      if (!model.success.holds(j, theta)) continue;
      auto& w = weights[space.index(j, theta)];
      absorbed += w;
      w = 0.0;
    }
  }
  return absorbed;
}

} // namespace

double apply_disable(const StateSpace& space, std::vector<double>& weights, double prob) {
  double removed = 0.0;
  for (std::size_t s = space.index(1, 0); s < weights.size(); ++s) {
    const double moved = weights[s] * prob;
    weights[s] -= moved;
    removed += moved;
  }
  return removed;
}

OutcomeDistribution classify_outcomes(const PlotModel& model, const BeliefState& start, int horizon,
                                      std::span<const DisableEvent> disables) {
  const int first = belief_slice(start);
  if (horizon < first) {
    throw Error("bad_horizon", "horizon " + std::to_string(horizon) + " precedes the belief at t=" +
                                   std::to_string(first));
  }
  Propagator prop(model);
  std::vector<double> weights = start.weights;
  OutcomeDistribution out;
  out.p_success = absorb_success(model, start.space, weights);
  for (int t = first + 1; t <= horizon; ++t) {
    for (const auto& d : disables) {
      if (d.time == t) out.p_foiled_disabled += apply_disable(start.space, weights, d.prob);
    }
    weights = prop.advance(weights, t);
    out.p_success += absorb_success(model, start.space, weights);
  }
  for (double w : weights) out.p_foiled_free += w;
  return out;
}

double defender_seu(const OutcomeDistribution& outcomes, double u_d) {
  if (!(u_d > 0.0 && u_d < 1.0)) throw Error("bad_utility", "u_D must lie strictly between 0 and 1");
  return outcomes.p_foiled_disabled + u_d * outcomes.p_foiled_free;
}

} // namespace plotsmith
