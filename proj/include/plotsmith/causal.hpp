#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plotsmith/model.hpp"
#include "plotsmith/simulate.hpp"
#include "plotsmith/validate.hpp"

namespace plotsmith {

/// Inclusive time window.
struct Window {
  int from = 1;
  int to = kForever;
  bool overlaps(const Window& o) const { return from <= o.to && o.from <= to; }
  bool operator==(const Window&) const = default;
};

/// Replacement of q and/or q' for one active phase (or all of them).
struct PhaseOverride {
  std::optional<Phase> phase; // empty: every active phase
  std::optional<double> move_prob;
  std::optional<double> abort_prob;
  bool operator==(const PhaseOverride&) const = default;
};

/// Forces a task to a value. With a phase, the task's siblings in that
/// phase's task set are rescaled (see do_block_tasks); without one the task
/// is forced in every phase column.
struct TaskForcing {
  std::optional<Phase> phase;
  int task = 0;
  bool value = false;
  bool operator==(const TaskForcing&) const = default;
};

/// Replacement emission table for one intensity. `offset`/`length` place it
/// inside the enclosing window (length empty: to the window's end).
struct IntensityOverride {
  int task = 0;
  EmissionTable table;
  int offset = 0;
  std::optional<int> length;
  bool operator==(const IntensityOverride&) const = default;
};

/// Payload vocabulary shared by interventions and adversary reactions.
struct FactorOverrides {
  std::vector<PhaseOverride> phases;
  std::vector<TaskForcing> tasks;
  std::vector<IntensityOverride> intensities;

  bool empty() const { return phases.empty() && tasks.empty() && intensities.empty(); }
  bool operator==(const FactorOverrides&) const = default;
};

/// Replaces the designated factors on `window`; every other factor keeps its
/// identity. Throws Error for out-of-range indices or failed do-scaling.
PlotModel apply_overrides(const PlotModel& model, const FactorOverrides& overrides, Window window);

/// Checks indices and probability ranges of a payload against a model.
std::vector<Issue> check_overrides(const PlotModel& model, const FactorOverrides& overrides, const std::string& path);

/// Pearl-style do() on the task layer of one phase: forced tasks become
/// degenerate at their value and the remaining tasks of I(w_j) are scaled by
/// C = 1 / (sum of their P(task = 1)), computed per parent configuration.
///
/// Errors: task_not_indicative, no_alternative_tasks,
/// incompatible_parent_structures (siblings must share their parent lists),
/// renormalization_exceeds_one.
PlotModel do_block_tasks(const PlotModel& model, Phase phase, std::span<const std::pair<int, bool>> forced,
                         Window window = {});

enum class InterventionKind { Null, Clarifying, Blocking, Direct, Disabling };

const char* to_string(InterventionKind kind);
std::optional<InterventionKind> intervention_kind_from_string(const std::string& s);

/// One defender action.
struct Intervention {
  std::string name;
  InterventionKind kind = InterventionKind::Null;
  int t0 = 2;
  std::optional<int> t1;
  FactorOverrides overrides;
  double disable_prob = 0.0;  // direct: agent arrested at enactment
  double abort_success = 0.0; // disabling: forced abort at enactment
  double betrayal_prob = 0.0; // chance the action reveals the defender's awareness

  Window window() const { return {t0, t1.value_or(kForever)}; }
  bool operator==(const Intervention&) const = default;
};

/// The do-nothing option.
Intervention null_intervention(int t0 = 2);

/// Payload/kind consistency, window and range checks.
std::vector<Issue> check_intervention(const PlotModel& model, const Intervention& d, const std::string& path);

/// Graph-invariant factor replacement for an adversary that does not react.
/// Null returns the input unchanged.
PlotModel apply_unintelligent(const PlotModel& model, const Intervention& d);

/// Left-to-right composition. Where two interventions touch the same factor
/// on overlapping windows the later one wins and a warning is appended.
PlotModel apply_unintelligent(const PlotModel& model, std::span<const Intervention> ds,
                              std::vector<std::string>* warnings = nullptr);

/// Disable events carried by a direct intervention (empty otherwise).
std::vector<DisableEvent> disable_events(const Intervention& d);

/// True iff the map leaves all three graph components structurally identical.
bool graph_invariance_check(const PlotModel& model, const std::function<PlotModel(const PlotModel&)>& map);
bool graph_invariance_check(const PlotModel& model, const Intervention& d);

} // namespace plotsmith
