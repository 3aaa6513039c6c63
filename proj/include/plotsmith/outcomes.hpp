#pragma once

#include <span>
#include <vector>

#include "plotsmith/filter.hpp"
#include "plotsmith/simulate.hpp"

namespace plotsmith {

/// Probabilities of the three effect classes by a horizon.
struct OutcomeDistribution {
  double p_success = 0.0;
  double p_foiled_disabled = 0.0;
  double p_foiled_free = 0.0;

  double total() const { return p_success + p_foiled_disabled + p_foiled_free; }
  bool operator==(const OutcomeDistribution&) const = default;
};

/// Removes `prob` of the active (non-inactive) mass at every state and
/// returns the amount removed.
double apply_disable(const StateSpace& space, std::vector<double>& weights, double prob);

/// Exact forward propagation from `start` to the absolute time `horizon`.
/// Mass is absorbed as success the first time the model's success predicate
/// holds; disable events remove active mass at the start of their step,
/// before the transition. Whatever remains at the horizon, inactive or still
/// unfinished, is foiled_free. Throws Error("bad_horizon") if the horizon
/// lies before the belief's slice.
OutcomeDistribution classify_outcomes(const PlotModel& model, const BeliefState& start, int horizon,
                                      std::span<const DisableEvent> disables = {});

/// 1 * p_foiled_disabled + u_D * p_foiled_free. Throws Error("bad_utility")
/// unless 0 < u_D < 1.
double defender_seu(const OutcomeDistribution& outcomes, double u_d);

/// Time of the slice a belief describes: a t = 0 prior already describes slice 1.
inline int belief_slice(const BeliefState& belief) { return belief.t < 1 ? 1 : belief.t; }

} // namespace plotsmith
