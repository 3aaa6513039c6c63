#include "plotsmith/model.hpp"

#include <algorithm>
#include <cmath>

#include "plotsmith/error.hpp"

namespace plotsmith {

int PhaseGraph::stage_count() const {
  int count = 0;
  for (int s : stages) count = std::max(count, s + 1);
  return count;
}

bool BipartiteMap::indicates(Phase j, int task) const {
  if (j < 1 || j > static_cast<int>(task_sets.size())) return false;
  const auto& set = task_sets[j - 1];
  return std::binary_search(set.begin(), set.end(), task);
}

const Timed<TaskTable>& TaskFactor::lookup(Phase phase) const {
  auto it = indicative.find(phase);
  return it == indicative.end() ? inactive : it->second;
}

bool SuccessSpec::holds(Phase phase, TaskMask tasks) const {
  if ((tasks & required) != required) return false;
  return std::find(phases.begin(), phases.end(), phase) != phases.end();
}

std::size_t task_config_count(const TaskGraph& graph, int task) {
  auto bits = graph.contemporaneous_parents[task].size() + graph.cross_slice_parents[task].size();
  return std::size_t{1} << bits;
}

std::size_t task_config(const TaskGraph& graph, int task, TaskMask current, TaskMask previous) {
  std::size_t cfg = 0;
  int bit = 0;
  for (int p : graph.contemporaneous_parents[task]) {
    if (task_bit(current, p)) cfg |= std::size_t{1} << bit;
    ++bit;
  }
  for (int p : graph.cross_slice_parents[task]) {
    if (task_bit(previous, p)) cfg |= std::size_t{1} << bit;
    ++bit;
  }
  return cfg;
}

std::size_t intensity_config_count(const PlotModel& model, int task) {
  std::size_t count = 1;
  for (int p : model.tasks.intensity_parents[task]) {
    count *= static_cast<std::size_t>(std::max(1, model.factors.intensity[p].alphabet));
  }
  return count;
}

std::size_t intensity_config(const PlotModel& model, int task, const Observation& z) {
  std::size_t cfg = 0;
  std::size_t radix = 1;
  for (int p : model.tasks.intensity_parents[task]) {
    const auto& parent = model.factors.intensity[p];
    double v = z[p];
    if (v < 0 || v >= parent.alphabet || std::floor(v) != v) {
      throw Error("invalid_observation", "intensity " + std::to_string(p + 1) +
                                             " symbol out of alphabet");
    }
    cfg += static_cast<std::size_t>(v) * radix;
    radix *= static_cast<std::size_t>(parent.alphabet);
  }
  return cfg;
}

bool same_graphs(const PlotModel& a, const PlotModel& b) {
  return a.phases == b.phases && a.tasks == b.tasks && a.bipartite == b.bipartite;
}

} // namespace plotsmith
