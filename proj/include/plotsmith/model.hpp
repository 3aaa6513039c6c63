#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plotsmith/timed.hpp"

namespace plotsmith {

/// Phase index. 0 is the inactive (absorbing) state w0; 1..m are active.
using Phase = int;

/// Task vector as a little-endian bit set: bit k holds task k (0-based).
using TaskMask = std::uint32_t;

/// One slice of intensity observations, one value per task. Categorical
/// intensities carry their symbol as an integral double.
using Observation = std::vector<double>;

inline bool task_bit(TaskMask mask, int task) { return ((mask >> task) & 1u) != 0; }

/// Phase-level graph (the reduced chain event graph). The inactive state has
/// no vertex; leaving to it is governed by the abort probability.
struct PhaseGraph {
  int m = 0;
  std::string inactive_label = "Inactive";
  std::vector<std::string> labels;       // labels[i - 1] names active phase i
  std::vector<std::vector<Phase>> edges; // edges[i - 1] = E_i, ascending
  std::vector<int> stages;               // stages[i - 1] = stage id of phase i

  const std::vector<Phase>& successors(Phase i) const { return edges[i - 1]; }
  int stage_of(Phase i) const { return stages[i - 1]; }
  int stage_count() const;
  std::string label(Phase i) const { return i == 0 ? inactive_label : labels[i - 1]; }

  bool operator==(const PhaseGraph&) const = default;
};

/// Two-time-slice structure over tasks and intensities. Parent lists are
/// 0-based task indices kept in ascending order.
struct TaskGraph {
  int n = 0;
  std::vector<std::string> labels;
  std::vector<std::vector<int>> contemporaneous_parents; // Q(k), all < k
  std::vector<std::vector<int>> cross_slice_parents;     // Q'(k), previous slice
  std::vector<std::vector<int>> intensity_parents;       // Q''(k), all < k

  bool operator==(const TaskGraph&) const = default;
};

/// Which tasks are indicative of which active phase.
struct BipartiteMap {
  std::vector<std::vector<int>> task_sets; // task_sets[j - 1] = I(w_j), ascending

  bool indicates(Phase j, int task) const;

  bool operator==(const BipartiteMap&) const = default;
};

/// Floret over E_i, aligned with the ascending edge list of the stage's phases.
using Floret = std::vector<double>;

struct PhaseFactors {
  std::vector<double> initial;              // over phases 0..m
  std::vector<Timed<double>> move_prob;     // q, per active phase
  std::vector<Timed<double>> abort_prob;    // q', per active phase
  std::vector<Timed<Floret>> florets;       // per stage
};

/// P(task = 1 | parent configuration). The configuration index packs the
/// contemporaneous parents' values (in list order) into the low bits, then
/// the previous-slice parents' values.
struct TaskTable {
  std::vector<double> p_one;
  bool operator==(const TaskTable&) const = default;
};

struct TaskFactor {
  Timed<TaskTable> inactive;                 // w0 column, shared by non-indicative phases
  std::map<Phase, Timed<TaskTable>> indicative;

  /// The table in force for `phase`. Non-indicative phases resolve to the
  /// inactive table itself, not a copy.
  const Timed<TaskTable>& lookup(Phase phase) const;
};

enum class EmissionFamily { Categorical, Gaussian };

/// Emission rows are indexed by `parent_config * 2 + theta`, where the parent
/// configuration is the mixed-radix value of the categorical intensity
/// parents (first parent least significant).
struct EmissionTable {
  std::vector<std::vector<double>> categorical; // one simplex per row
  std::vector<double> mean;                     // gaussian rows
  std::vector<double> variance;
  bool operator==(const EmissionTable&) const = default;
};

struct IntensityFactor {
  EmissionFamily family = EmissionFamily::Categorical;
  int alphabet = 2; // categorical only
  Timed<EmissionTable> table;
};

struct FactorBundle {
  PhaseFactors phase;
  std::vector<TaskFactor> task;
  std::vector<IntensityFactor> intensity;
};

/// Terminal success: being in one of `phases` with every required task on.
struct SuccessSpec {
  std::vector<Phase> phases;
  TaskMask required = 0;

  bool holds(Phase phase, TaskMask tasks) const;
  bool operator==(const SuccessSpec&) const = default;
};

/// The hybrid graph plus its factors. Immutable once validated.
struct PlotModel {
  std::string name;
  PhaseGraph phases;
  TaskGraph tasks;
  BipartiteMap bipartite;
  FactorBundle factors;
  int horizon = 1;
  std::vector<std::string> time_labels;
  SuccessSpec success;

  int m() const { return phases.m; }
  int n() const { return tasks.n; }
};

/// Number of configurations indexing a task table.
std::size_t task_config_count(const TaskGraph& graph, int task);

/// Configuration index of task `task` given the current and previous slices.
std::size_t task_config(const TaskGraph& graph, int task, TaskMask current, TaskMask previous);

/// Number of parent configurations of an intensity's emission table.
std::size_t intensity_config_count(const PlotModel& model, int task);

/// Parent-configuration index of intensity `task` for the observation slice.
std::size_t intensity_config(const PlotModel& model, int task, const Observation& z);

/// True when all three graph components coincide.
bool same_graphs(const PlotModel& a, const PlotModel& b);

} // namespace plotsmith
