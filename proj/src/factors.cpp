#include "plotsmith/factors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "plotsmith/error.hpp"

namespace plotsmith {

double phase_transition(const PlotModel& model, int t, Phase i, Phase j) {
  if (i == 0) return j == 0 ? 1.0 : 0.0;
  const auto& f = model.factors.phase;
  const double abort = f.abort_prob[i - 1].at(t);
  if (j == 0) return abort;
  const double move = f.move_prob[i - 1].at(t);
  if (j == i) return (1.0 - abort) * (1.0 - move);
  const auto& edges = model.phases.successors(i);
  auto it = std::lower_bound(edges.begin(), edges.end(), j);
  if (it == edges.end() || *it != j) return 0.0;
  const auto& floret = f.florets[model.phases.stage_of(i)].at(t);
  return (1.0 - abort) * move * floret[static_cast<std::size_t>(it - edges.begin())];
}

std::vector<std::pair<Phase, double>> transition_row(const PlotModel& model, int t, Phase i) {
  std::vector<std::pair<Phase, double>> row;
  if (i == 0) {
    row.emplace_back(0, 1.0);
    return row;
  }
  const auto& f = model.factors.phase;
  const double abort = f.abort_prob[i - 1].at(t);
  const double move = f.move_prob[i - 1].at(t);
  if (abort > 0) row.emplace_back(0, abort);
  const auto& edges = model.phases.successors(i);
  const Floret* floret = edges.empty() ? nullptr : &f.florets[model.phases.stage_of(i)].at(t);
  bool stay_done = false;
  auto add_stay = [&] {
    double stay = (1.0 - abort) * (1.0 - move);
    if (stay > 0) row.emplace_back(i, stay);
    stay_done = true;
  };
  for (std::size_t a = 0; a < edges.size(); ++a) {
    if (!stay_done && edges[a] > i) add_stay();
    double p = (1.0 - abort) * move * (*floret)[a];
    if (p > 0) row.emplace_back(edges[a], p);
  }
  if (!stay_done) add_stay();
  return row;
}

double task_probability(const PlotModel& model, int t, int task, TaskMask current, TaskMask previous, Phase phase) {
  const auto& table = model.factors.task[task].lookup(phase).at(t);
  return table.p_one[task_config(model.tasks, task, current, previous)];
}

double task_slice_density(const PlotModel& model, int t, TaskMask current, TaskMask previous, Phase phase) {
  if (t <= 1) previous = 0;
  double density = 1.0;
  for (int k = 0; k < model.n(); ++k) {
    double p = task_probability(model, t, k, current, previous, phase);
    density *= task_bit(current, k) ? p : 1.0 - p;
    if (density == 0.0) break;
  }
  return density;
}

double intensity_density(const PlotModel& model, int t, int task, const Observation& z, bool theta) {
  const auto& factor = model.factors.intensity[task];
  const auto row = intensity_config(model, task, z) * 2 + (theta ? 1 : 0);
  const auto& table = factor.table.at(t);
  const double v = z[task];
  if (factor.family == EmissionFamily::Categorical) {
    if (v < 0 || v >= factor.alphabet || std::floor(v) != v) {
      throw Error("invalid_observation", "intensity " + std::to_string(task + 1) + " symbol " + std::to_string(v) +
                                             " outside alphabet of size " + std::to_string(factor.alphabet));
    }
    return table.categorical[row][static_cast<std::size_t>(v)];
  }
  if (!std::isfinite(v)) throw Error("invalid_observation", "gaussian intensity must be finite");
  const double var = table.variance[row];
  const double d = v - table.mean[row];
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double intensity_slice_density(const PlotModel& model, int t, const Observation& z, TaskMask tasks) {
  if (static_cast<int>(z.size()) != model.n()) {
    throw Error("invalid_observation", "observation has " + std::to_string(z.size()) + " intensities, expected " +
                                           std::to_string(model.n()));
  }
  double density = 1.0;
  for (int k = 0; k < model.n(); ++k) density *= intensity_density(model, t, k, z, task_bit(tasks, k));
  return density;
}

double trajectory_log_density(const PlotModel& model, const Trajectory& trajectory) {
  const auto len = trajectory.phases.size();
  if (len == 0 || trajectory.tasks.size() != len || trajectory.intensities.size() != len) {
    throw Error("length_mismatch", "trajectory components must be non-empty and of equal length");
  }
  constexpr double kImpossible = -std::numeric_limits<double>::infinity();
  auto add = [](double acc, double p) { return p > 0 ? acc + std::log(p) : kImpossible; };

  const Phase first = trajectory.phases[0];
  if (first < 0 || first > model.m()) return kImpossible;
  double log_p = add(0.0, model.factors.phase.initial[first]);
  TaskMask previous = 0;
  for (std::size_t s = 0; s < len && log_p != kImpossible; ++s) {
    const int t = static_cast<int>(s) + 1;
    const Phase phase = trajectory.phases[s];
    if (phase < 0 || phase > model.m()) return kImpossible;
    if (s > 0) log_p = add(log_p, phase_transition(model, t, trajectory.phases[s - 1], phase));
    log_p = add(log_p, task_slice_density(model, t, trajectory.tasks[s], previous, phase));
    log_p = add(log_p, intensity_slice_density(model, t, trajectory.intensities[s], trajectory.tasks[s]));
    previous = trajectory.tasks[s];
  }
  return log_p;
}

namespace {

bool table_constant(const TaskTable& table) {
  return std::all_of(table.p_one.begin(), table.p_one.end(), [&](double p) { return p == table.p_one.front(); });
}

} // namespace

bool is_naive(const PlotModel& model) {
  for (const auto& factor : model.factors.task) {
    if (!table_constant(factor.inactive.base())) return false;
    for (const auto& o : factor.inactive.overrides()) {
      if (!table_constant(*o.value)) return false;
    }
  }
  return true;
}

bool is_regular(const PlotModel& model) {
  for (const auto& set : model.bipartite.task_sets) {
    if (set.size() <= 1) continue;
    // union-find over the task set using within-slice task edges
    std::vector<int> parent(set.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto position = [&](int task) {
      auto it = std::lower_bound(set.begin(), set.end(), task);
      return it != set.end() && *it == task ? static_cast<int>(it - set.begin()) : -1;
    };
    for (std::size_t a = 0; a < set.size(); ++a) {
      for (int p : model.tasks.contemporaneous_parents[set[a]]) {
        int b = position(p);
        if (b >= 0) parent[find(static_cast<int>(a))] = find(b);
      }
    }
    const int root = find(0);
    for (std::size_t a = 1; a < set.size(); ++a) {
      if (find(static_cast<int>(a)) != root) return false;
    }
  }
  return true;
}

} // namespace plotsmith
