#include "plotsmith/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

#include "plotsmith/error.hpp"

namespace plotsmith {
namespace {

constexpr double kSumTolerance = 1e-9;
constexpr int kMaxTasks = 30;

std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

class Checker {
public:
  explicit Checker(const PlotModel& model) : model_(model) {}

  ValidationReport run() {
    check_phase_graph();
    check_task_graph();
    check_bipartite();
    check_meta();
    if (structure_ok_) {
      check_phase_factors();
      check_task_factors();
      check_intensity_factors();
      check_success();
    }
    return std::move(report_);
  }

private:
  void error(std::string code, std::string path, std::string message) {
    report_.errors.push_back({std::move(code), std::move(path), std::move(message)});
  }
  void warning(std::string code, std::string path, std::string message) {
    report_.warnings.push_back({std::move(code), std::move(path), std::move(message)});
  }
  void structural(std::string code, std::string path, std::string message) {
    structure_ok_ = false;
    error(std::move(code), std::move(path), std::move(message));
  }

  bool check_probability(double p, const std::string& path) {
    if (!(p >= 0.0 && p <= 1.0)) {
      error("probability_out_of_range", path, "probability " + std::to_string(p) + " outside [0,1]");
      return false;
    }
    return true;
  }

  template <class T>
  void check_windows(const Timed<T>& timed, const std::string& path) {
    for (std::size_t i = 0; i < timed.overrides().size(); ++i) {
      const auto& o = timed.overrides()[i];
      if (o.from < 1 || o.from > o.to) {
        error("bad_time_window", at(path + ".overrides", i), "override window must satisfy 1 <= from <= to");
      }
    }
  }

  template <class T, class F>
  void for_each_value(const Timed<T>& timed, const std::string& path, F&& f) {
    f(timed.base(), path);
    for (std::size_t i = 0; i < timed.overrides().size(); ++i) {
      f(*timed.overrides()[i].value, at(path + ".overrides", i));
    }
    check_windows(timed, path);
  }

  void check_phase_graph() {
    const auto& g = model_.phases;
    if (g.m < 1) {
      structural("no_active_phases", "phases.labels", "a plot model needs at least one active phase");
      return;
    }
    if (static_cast<int>(g.labels.size()) != g.m) {
      structural("shape_mismatch", "phases.labels", "expected one label per active phase");
    }
    if (static_cast<int>(g.edges.size()) != g.m) {
      structural("shape_mismatch", "phases.edges", "expected one edge list per active phase");
      return;
    }
    for (int i = 1; i <= g.m; ++i) {
      const auto& e = g.edges[i - 1];
      auto path = at("phases.edges", i - 1);
      for (std::size_t a = 0; a < e.size(); ++a) {
        if (e[a] == 0) {
          structural("edge_to_inactive", at(path, a), "transitions to the inactive state use abort_prob, not an edge");
        } else if (e[a] < 0 || e[a] > g.m) {
          structural("edge_out_of_range", at(path, a), "edge target is not an active phase");
        } else if (e[a] == i) {
          structural("self_edge", at(path, a), "staying in a phase is implied, not an edge");
        }
        if (a > 0 && e[a] <= e[a - 1]) {
          structural("unsorted_edges", path, "edge lists must be strictly ascending");
        }
      }
    }
    if (static_cast<int>(g.stages.size()) != g.m) {
      structural("shape_mismatch", "phases.stages", "expected one stage id per active phase");
      return;
    }
    std::set<int> seen;
    for (int i = 1; i <= g.m; ++i) {
      int s = g.stages[i - 1];
      if (s < 0 || s >= g.m) {
        structural("stage_out_of_range", at("phases.stages", i - 1), "stage ids must lie in 0..m-1");
        continue;
      }
      seen.insert(s);
    }
    if (!structure_ok_) return;
    if (static_cast<int>(seen.size()) != g.stage_count()) {
      structural("stage_gap", "phases.stages", "stage ids must be contiguous from 0");
    }
    for (int i = 1; i <= g.m; ++i) {
      for (int j = i + 1; j <= g.m; ++j) {
        if (g.stages[i - 1] == g.stages[j - 1] && g.edges[i - 1] != g.edges[j - 1]) {
          structural("stage_edges_mismatch", at("phases.stages", j - 1),
                     "phases " + std::to_string(i) + " and " + std::to_string(j) +
                         " share a stage but have different edge sets");
        }
      }
    }
  }

  void check_parent_list(const std::vector<std::vector<int>>& lists, const std::string& path, bool within_slice,
                         const std::string& forward_code) {
    const int n = model_.tasks.n;
    if (static_cast<int>(lists.size()) != n) {
      structural("shape_mismatch", path, "expected one parent list per task");
      return;
    }
    for (int k = 0; k < n; ++k) {
      const auto& ps = lists[k];
      for (std::size_t a = 0; a < ps.size(); ++a) {
        int p = ps[a];
        if (p < 0 || p >= n) {
          structural("parent_out_of_range", at(at(path, k), a), "parent is not a task index");
        } else if (within_slice && p >= k) {
          structural(forward_code, at(at(path, k), a),
                     forward_code == "forward_contemporaneous_parent"
                         ? "forward contemporaneous parent: within-slice parents must precede the task"
                         : "forward intensity parent: within-slice parents must precede the intensity");
        }
        if (a > 0 && p <= ps[a - 1]) {
          structural("unsorted_parents", at(path, k), "parent lists must be strictly ascending");
        }
      }
    }
  }

  void check_task_graph() {
    const auto& g = model_.tasks;
    if (g.n < 1) {
      structural("no_tasks", "tasks.labels", "a plot model needs at least one task");
      return;
    }
    if (g.n > kMaxTasks) {
      structural("too_many_tasks", "tasks.labels", "at most 30 tasks are supported");
      return;
    }
    if (static_cast<int>(g.labels.size()) != g.n) {
      structural("shape_mismatch", "tasks.labels", "expected one label per task");
    }
    check_parent_list(g.contemporaneous_parents, "tasks.contemporaneous_parents", true,
                      "forward_contemporaneous_parent");
    check_parent_list(g.cross_slice_parents, "tasks.cross_slice_parents", false, "");
    check_parent_list(g.intensity_parents, "tasks.intensity_parents", true, "forward_intensity_parent");
    if (structure_ok_) {
      for (int k = 0; k < g.n; ++k) {
        if (g.contemporaneous_parents[k].size() + g.cross_slice_parents[k].size() > 20) {
          structural("too_many_parents", at("tasks.contemporaneous_parents", k), "task tables limited to 20 parents");
        }
      }
    }
  }

  void check_bipartite() {
    const auto& b = model_.bipartite;
    const int m = model_.phases.m;
    const int n = model_.tasks.n;
    if (m < 1 || n < 1) return;
    if (static_cast<int>(b.task_sets.size()) != m) {
      structural("shape_mismatch", "tasks.task_sets", "expected one task set per active phase");
      return;
    }
    std::vector<bool> covered(static_cast<std::size_t>(n), false);
    for (int j = 0; j < m; ++j) {
      const auto& set = b.task_sets[j];
      for (std::size_t a = 0; a < set.size(); ++a) {
        if (set[a] < 0 || set[a] >= n) {
          structural("task_out_of_range", at(at("tasks.task_sets", j), a), "task set names an unknown task");
          continue;
        }
        if (a > 0 && set[a] <= set[a - 1]) {
          structural("unsorted_task_set", at("tasks.task_sets", j), "task sets must be strictly ascending");
        }
        covered[set[a]] = true;
      }
    }
    for (int k = 0; k < n; ++k) {
      if (!covered[k]) {
        warning("orphan_task", at("tasks.labels", k), "task is indicative of no active phase");
      }
    }
  }

  void check_meta() {
    if (model_.horizon < 1) {
      error("bad_horizon", "meta.horizon", "horizon must be at least 1");
    }
    if (!model_.time_labels.empty() && static_cast<int>(model_.time_labels.size()) != model_.horizon) {
      error("shape_mismatch", "meta.time_labels", "expected one time label per step of the horizon");
    }
  }

  void check_phase_factors() {
    const auto& g = model_.phases;
    const auto& f = model_.factors.phase;
    const int m = g.m;
    if (static_cast<int>(f.initial.size()) != m + 1) {
      error("shape_mismatch", "phases.initial", "initial distribution must cover phases 0..m");
    } else {
      double sum = 0;
      for (std::size_t i = 0; i < f.initial.size(); ++i) {
        check_probability(f.initial[i], at("phases.initial", i));
        sum += f.initial[i];
      }
      if (std::abs(sum - 1.0) > kSumTolerance) {
        error("initial_not_normalized", "phases.initial", "initial distribution sums to " + std::to_string(sum));
      }
    }
    auto scalar_list = [&](const std::vector<Timed<double>>& list, const std::string& path) {
      if (static_cast<int>(list.size()) != m) {
        error("shape_mismatch", path, "expected one value per active phase");
        return false;
      }
      for (int i = 0; i < m; ++i) {
        for_each_value(list[i], at(path, i), [&](double v, const std::string& p) { check_probability(v, p); });
      }
      return true;
    };
    bool moves = scalar_list(f.move_prob, "factors.phase.move_prob");
    scalar_list(f.abort_prob, "factors.phase.abort_prob");
    if (moves) {
      for (int i = 1; i <= m; ++i) {
        if (!g.successors(i).empty()) continue;
        for_each_value(f.move_prob[i - 1], at("factors.phase.move_prob", i - 1), [&](double v, const std::string& p) {
          if (v > 0) error("move_without_edges", p, "phase has no outgoing edges but a positive move probability");
        });
      }
    }
    const int stages = g.stage_count();
    if (static_cast<int>(f.florets.size()) != stages) {
      error("shape_mismatch", "factors.phase.florets", "expected one floret per stage");
      return;
    }
    for (int s = 0; s < stages; ++s) {
      std::size_t width = 0;
      for (int i = 1; i <= m; ++i) {
        if (g.stage_of(i) == s) {
          width = g.successors(i).size();
          break;
        }
      }
      for_each_value(f.florets[s], at("factors.phase.florets", s), [&](const Floret& fl, const std::string& p) {
        if (fl.size() != width) {
          error("shape_mismatch", p, "floret length must equal the stage's edge count");
          return;
        }
        double sum = 0;
        for (std::size_t a = 0; a < fl.size(); ++a) {
          check_probability(fl[a], at(p, a));
          sum += fl[a];
        }
        if (width > 0 && std::abs(sum - 1.0) > kSumTolerance) {
          error("floret_not_normalized", p, "floret not normalized: sums to " + std::to_string(sum));
        }
      });
    }
  }

  void check_task_table(const Timed<TaskTable>& timed, int task, const std::string& path) {
    const auto expected = task_config_count(model_.tasks, task);
    for_each_value(timed, path, [&](const TaskTable& t, const std::string& p) {
      if (t.p_one.size() != expected) {
        error("shape_mismatch", p, "task table needs " + std::to_string(expected) + " parent configurations");
        return;
      }
      for (std::size_t a = 0; a < t.p_one.size(); ++a) check_probability(t.p_one[a], at(p, a));
    });
  }

  void check_task_factors() {
    const auto& tf = model_.factors.task;
    const int n = model_.tasks.n;
    if (static_cast<int>(tf.size()) != n) {
      error("shape_mismatch", "factors.task", "expected one task factor per task");
      return;
    }
    for (int k = 0; k < n; ++k) {
      auto path = at("factors.task", k);
      check_task_table(tf[k].inactive, k, path + ".inactive");
      for (const auto& [phase, table] : tf[k].indicative) {
        auto ppath = path + ".by_phase." + std::to_string(phase);
        if (!model_.bipartite.indicates(phase, k)) {
          error("untied_task_table", ppath,
                "task is not indicative of this phase; its table must be the inactive one");
          continue;
        }
        check_task_table(table, k, ppath);
      }
      for (int j = 1; j <= model_.phases.m; ++j) {
        if (model_.bipartite.indicates(j, k) && !tf[k].indicative.contains(j)) {
          error("missing_task_table", path + ".by_phase." + std::to_string(j),
                "indicative task has no table for this phase");
        }
      }
    }
  }

  void check_intensity_factors() {
    const auto& inf = model_.factors.intensity;
    const int n = model_.tasks.n;
    if (static_cast<int>(inf.size()) != n) {
      error("shape_mismatch", "factors.intensity", "expected one emission model per task");
      return;
    }
    for (int k = 0; k < n; ++k) {
      auto path = at("factors.intensity", k);
      for (int p : model_.tasks.intensity_parents[k]) {
        if (inf[p].family != EmissionFamily::Categorical) {
          error("continuous_intensity_parent", at("tasks.intensity_parents", k),
                "intensity parents must be categorical");
        }
      }
      if (inf[k].family == EmissionFamily::Categorical && inf[k].alphabet < 1) {
        error("bad_alphabet", path + ".alphabet", "categorical alphabet must be positive");
        continue;
      }
      bool parents_ok = true;
      for (int p : model_.tasks.intensity_parents[k]) parents_ok = parents_ok && inf[p].alphabet >= 1;
      if (!parents_ok) continue;
      const auto rows = intensity_config_count(model_, k) * 2;
      for_each_value(inf[k].table, path + ".table", [&](const EmissionTable& t, const std::string& p) {
        if (inf[k].family == EmissionFamily::Categorical) {
          if (t.categorical.size() != rows) {
            error("shape_mismatch", p, "expected " + std::to_string(rows) + " emission rows");
            return;
          }
          for (std::size_t r = 0; r < rows; ++r) {
            const auto& row = t.categorical[r];
            if (static_cast<int>(row.size()) != inf[k].alphabet) {
              error("shape_mismatch", at(p, r), "emission row length must equal the alphabet size");
              continue;
            }
            double sum = 0;
            for (std::size_t a = 0; a < row.size(); ++a) {
              check_probability(row[a], at(at(p, r), a));
              sum += row[a];
            }
            if (std::abs(sum - 1.0) > kSumTolerance) {
              error("emission_not_normalized", at(p, r), "emission row sums to " + std::to_string(sum));
            }
          }
        } else {
          if (t.mean.size() != rows || t.variance.size() != rows) {
            error("shape_mismatch", p, "expected " + std::to_string(rows) + " gaussian rows");
            return;
          }
          for (std::size_t r = 0; r < rows; ++r) {
            if (!std::isfinite(t.mean[r])) error("bad_mean", at(p + ".mean", r), "mean must be finite");
            if (!(t.variance[r] > 0) || !std::isfinite(t.variance[r])) {
              error("nonpositive_variance", at(p + ".variance", r), "gaussian variance must be positive");
            }
          }
        }
      });
    }
  }

  void check_success() {
    const auto& s = model_.success;
    for (std::size_t a = 0; a < s.phases.size(); ++a) {
      if (s.phases[a] < 1 || s.phases[a] > model_.phases.m) {
        error("success_phase_out_of_range", at("success.phases", a), "success phases must be active phases");
      }
    }
    if (model_.tasks.n < 32 && (s.required >> model_.tasks.n) != 0) {
      error("task_out_of_range", "success.required_tasks", "required task mask names unknown tasks");
    }
  }

  const PlotModel& model_;
  ValidationReport report_;
  bool structure_ok_ = true;
};

} // namespace

bool ValidationReport::has_error(const std::string& code) const {
  return std::any_of(errors.begin(), errors.end(), [&](const Issue& i) { return i.code == code; });
}

ValidationReport validate(const PlotModel& model) { return Checker(model).run(); }

std::size_t state_cap_from_env() {
  if (const char* env = std::getenv("PLOTSMITH_STATE_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultStateCap;
}

StateSpace::StateSpace(int m, int n, std::size_t cap) : m_(m), n_(n) {
  if (m < 0 || n < 0 || n > 30 || size() > cap) {
    throw Error("state_space_too_large", "state space too large: (m+1)*2^n = " +
                                             std::to_string(static_cast<unsigned long long>(m + 1)) + "*2^" +
                                             std::to_string(n) + " exceeds cap " + std::to_string(cap));
  }
}

std::vector<JointState> joint_state_space(const PlotModel& model, std::size_t cap) {
  StateSpace space(model.m(), model.n(), cap);
  std::vector<JointState> out;
  out.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) out.push_back({space.phase_of(i), space.tasks_of(i)});
  return out;
}

} // namespace plotsmith
