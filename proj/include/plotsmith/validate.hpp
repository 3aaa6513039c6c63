#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "plotsmith/model.hpp"

namespace plotsmith {

/// A single finding. `path` addresses the offending element using the model
/// document's key names, e.g. `factors.phase.florets[0]`.
struct Issue {
  std::string code;
  std::string path;
  std::string message;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const { return errors.empty(); }
  bool has_error(const std::string& code) const;
  bool operator==(const ValidationReport&) const = default;
};

/// Checks every structural and numeric invariant of a candidate model.
/// Never throws on malformed input; problems become report entries.
ValidationReport validate(const PlotModel& model);

inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 20;

/// Reads PLOTSMITH_STATE_CAP, falling back to kDefaultStateCap.
std::size_t state_cap_from_env();

/// Joint (phase, task-vector) enumeration. Phase-major with w0 first; within a
/// phase the task vector is read as a little-endian binary integer.
class StateSpace {
public:
  StateSpace() = default;
  StateSpace(int m, int n, std::size_t cap = state_cap_from_env());

  int phases() const { return m_ + 1; }
  int active_phases() const { return m_; }
  int tasks() const { return n_; }
  std::size_t task_vectors() const { return std::size_t{1} << n_; }
  std::size_t size() const { return static_cast<std::size_t>(m_ + 1) << n_; }

  std::size_t index(Phase phase, TaskMask tasks) const {
    return (static_cast<std::size_t>(phase) << n_) | tasks;
  }
  Phase phase_of(std::size_t index) const { return static_cast<Phase>(index >> n_); }
  TaskMask tasks_of(std::size_t index) const {
    return static_cast<TaskMask>(index & (task_vectors() - 1));
  }

  bool operator==(const StateSpace&) const = default;

private:
  int m_ = 0;
  int n_ = 0;
};

struct JointState {
  Phase phase;
  TaskMask tasks;
  bool operator==(const JointState&) const = default;
};

/// Enumerates the joint state space of a validated model.
/// Throws Error("state_space_too_large") above the cap.
std::vector<JointState> joint_state_space(const PlotModel& model,
                                          std::size_t cap = state_cap_from_env());

} // namespace plotsmith
