#include "plotsmith/simulate.hpp"

#include <cmath>

#include "plotsmith/rng.hpp"

namespace plotsmith {
namespace {

template <class Weights>
std::size_t draw_index(CounterRng& rng, const Weights& weights, std::size_t size) {
  double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < size; ++i) {
    double w = weights(i);
    if (w <= 0) continue;
    acc += w;
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive; // rounding slack lands on the last supported entry
}

} // namespace

Trajectory sample_trajectory(const PlotModel& model, int steps, std::uint64_t seed,
                             std::span<const DisableEvent> disables) {
  CounterRng rng(seed);
  Trajectory out;
  out.seed = seed;
  const int n = model.n();
  Phase phase = 0;
  TaskMask previous = 0;
  for (int t = 1; t <= steps; ++t) {
    // Disable events act on the state entering step t (the initial draw at t = 1).
    auto apply_disables = [&] {
      for (const auto& d : disables) {
        if (d.time == t && phase != 0 && rng.uniform() < d.prob) phase = 0;
      }
    };
    if (t == 1) {
      const auto& init = model.factors.phase.initial;
      phase = static_cast<Phase>(draw_index(rng, [&](std::size_t i) { return init[i]; }, init.size()));
      apply_disables();
    } else {
      apply_disables();
      auto row = transition_row(model, t, phase);
      phase = row[draw_index(rng, [&](std::size_t i) { return row[i].second; }, row.size())].first;
    }

    TaskMask tasks = 0;
    for (int k = 0; k < n; ++k) {
      double p = task_probability(model, t, k, tasks, t == 1 ? 0 : previous, phase);
      if (rng.uniform() < p) tasks |= TaskMask{1} << k;
    }

    Observation z(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
      const auto& factor = model.factors.intensity[k];
      const auto row = intensity_config(model, k, z) * 2 + (task_bit(tasks, k) ? 1 : 0);
      const auto& table = factor.table.at(t);
      if (factor.family == EmissionFamily::Categorical) {
        const auto& probs = table.categorical[row];
        z[k] = static_cast<double>(draw_index(rng, [&](std::size_t i) { return probs[i]; }, probs.size()));
      } else {
        z[k] = table.mean[row] + std::sqrt(table.variance[row]) * rng.normal();
      }
    }
    out.phases.push_back(phase);
    out.tasks.push_back(tasks);
    out.intensities.push_back(std::move(z));
    previous = tasks;
  }
  return out;
}

std::vector<Trajectory> sample_batch(const PlotModel& model, int steps, std::size_t count, std::uint64_t seed) {
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_trajectory(model, steps, CounterRng::at(seed, i)));
  return out;
}

} // namespace plotsmith
