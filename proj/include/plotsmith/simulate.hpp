#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plotsmith/factors.hpp"
#include "plotsmith/model.hpp"

namespace plotsmith {

/// At `time`, an active agent is disabled (arrested) with probability `prob`.
/// Used for direct interventions; the disabled agent is inactive afterwards.
struct DisableEvent {
  int time = 1;
  double prob = 0.0;
  bool operator==(const DisableEvent&) const = default;
};

/// Ancestral sampling of times 1..steps: phase, then tasks in index order,
/// then intensities in index order. Same (model, steps, seed) gives the same
/// trajectory on every platform.
Trajectory sample_trajectory(const PlotModel& model, int steps, std::uint64_t seed,
                             std::span<const DisableEvent> disables = {});

/// `count` independent trajectories; trajectory i uses seed CounterRng::at(seed, i).
std::vector<Trajectory> sample_batch(const PlotModel& model, int steps, std::size_t count, std::uint64_t seed);

} // namespace plotsmith
