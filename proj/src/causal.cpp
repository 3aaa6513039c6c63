#include "plotsmith/causal.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "plotsmith/error.hpp"

namespace plotsmith {
namespace {

constexpr double kScaleSlack = 1e-12;

std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

std::vector<Phase> target_phases(const PlotModel& model, const std::optional<Phase>& phase) {
  if (phase) return {*phase};
  std::vector<Phase> all;
  for (Phase j = 1; j <= model.m(); ++j) all.push_back(j);
  return all;
}

TaskTable degenerate(const PlotModel& model, int task, bool value) {
  return TaskTable{std::vector<double>(task_config_count(model.tasks, task), value ? 1.0 : 0.0)};
}

Window sub_window(const IntensityOverride& o, Window window) {
  Window w;
  w.from = window.from + std::max(0, o.offset);
  w.to = window.to;
  if (o.length) {
    long long end = static_cast<long long>(w.from) + *o.length - 1;
    if (end < w.to) w.to = static_cast<int>(end);
  }
  return w;
}

} // namespace

std::vector<Issue> check_overrides(const PlotModel& model, const FactorOverrides& ov, const std::string& path) {
  std::vector<Issue> issues;
  auto bad = [&](std::string code, std::string p, std::string msg) {
    issues.push_back({std::move(code), std::move(p), std::move(msg)});
  };
  for (std::size_t a = 0; a < ov.phases.size(); ++a) {
    const auto& o = ov.phases[a];
    auto p = at(path + ".phases", a);
    if (o.phase && (*o.phase < 1 || *o.phase > model.m())) bad("unknown_phase", p + ".phase", "not an active phase");
    if (o.move_prob && !in_unit(*o.move_prob)) bad("probability_out_of_range", p + ".move_prob", "outside [0,1]");
    if (o.abort_prob && !in_unit(*o.abort_prob)) bad("probability_out_of_range", p + ".abort_prob", "outside [0,1]");
    if (o.move_prob && *o.move_prob > 0) {
      for (Phase j : target_phases(model, o.phase)) {
        if (j >= 1 && j <= model.m() && model.phases.successors(j).empty()) {
          bad("move_without_edges", p + ".move_prob", "phase " + std::to_string(j) + " has no outgoing edges");
          break;
        }
      }
    }
  }
  for (std::size_t a = 0; a < ov.tasks.size(); ++a) {
    const auto& f = ov.tasks[a];
    auto p = at(path + ".tasks", a);
    if (f.task < 0 || f.task >= model.n()) {
      bad("unknown_task", p + ".task", "not a task index");
      continue;
    }
    if (f.phase) {
      if (*f.phase < 1 || *f.phase > model.m()) {
        bad("unknown_phase", p + ".phase", "not an active phase");
      } else if (!model.bipartite.indicates(*f.phase, f.task)) {
        bad("task_not_indicative", p, "forced task is not in the phase's task set");
      }
    }
  }
  for (std::size_t a = 0; a < ov.intensities.size(); ++a) {
    const auto& o = ov.intensities[a];
    auto p = at(path + ".intensities", a);
    if (o.task < 0 || o.task >= model.n()) {
      bad("unknown_task", p + ".task", "not an intensity index");
      continue;
    }
    if (o.offset < 0 || (o.length && *o.length < 1)) bad("bad_time_window", p, "offset must be >= 0 and length >= 1");
    // Reuse the model validator on a copy carrying the replacement table.
    PlotModel probe = model;
    probe.factors.intensity[o.task].table = Timed<EmissionTable>(o.table);
    for (const auto& issue : validate(probe).errors) {
      if (issue.path.starts_with("factors.intensity[" + std::to_string(o.task) + "]")) {
        bad(issue.code, p + ".table", issue.message);
      }
    }
  }
  return issues;
}

PlotModel do_block_tasks(const PlotModel& model, Phase phase, std::span<const std::pair<int, bool>> forced,
                         Window window) {
  if (phase < 1 || phase > model.m()) throw Error("unknown_phase", "do_block_tasks: not an active phase");
  const auto& set = model.bipartite.task_sets[phase - 1];
  std::set<int> forced_tasks;
  for (const auto& [task, value] : forced) {
    if (!model.bipartite.indicates(phase, task)) {
      throw Error("task_not_indicative", "task " + std::to_string(task + 1) + " is not indicative of phase " +
                                             std::to_string(phase));
    }
    forced_tasks.insert(task);
  }
  std::vector<int> remaining;
  for (int k : set) {
    if (!forced_tasks.contains(k)) remaining.push_back(k);
  }
  if (remaining.empty()) throw Error("no_alternative_tasks", "no alternative tasks remain after forcing");
  for (int k : remaining) {
    if (model.tasks.contemporaneous_parents[k] != model.tasks.contemporaneous_parents[remaining.front()] ||
        model.tasks.cross_slice_parents[k] != model.tasks.cross_slice_parents[remaining.front()]) {
      throw Error("incompatible_parent_structures",
                  "do-scaling needs the remaining tasks to share their parent lists");
    }
  }

  PlotModel out = model;
  // Constant runs of the sibling tables inside the window.
  std::set<int> cuts{window.from};
  for (int k : remaining) model.factors.task[k].lookup(phase).collect_breakpoints(window.from, window.to, cuts);
  std::vector<int> starts(cuts.begin(), cuts.end());

  std::map<int, Timed<TaskTable>> scaled;
  for (int k : remaining) scaled.emplace(k, model.factors.task[k].lookup(phase));
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const int from = starts[s];
    const int to = s + 1 < starts.size() ? starts[s + 1] - 1 : window.to;
    const auto configs = model.factors.task[remaining.front()].lookup(phase).at(from).p_one.size();
    std::vector<double> total(configs, 0.0);
    for (int k : remaining) {
      const auto& p = model.factors.task[k].lookup(phase).at(from).p_one;
      for (std::size_t c = 0; c < configs; ++c) total[c] += p[c];
    }
    for (int k : remaining) {
      TaskTable table = model.factors.task[k].lookup(phase).at(from);
      for (std::size_t c = 0; c < configs; ++c) {
        const double v = table.p_one[c] == 0.0 ? 0.0 : table.p_one[c] / total[c];
        if (!(v <= 1.0 + kScaleSlack)) {
          throw Error("renormalization_exceeds_one", "renormalization exceeds 1 for task " + std::to_string(k + 1) +
                                                         " in configuration " + std::to_string(c));
        }
        table.p_one[c] = std::min(1.0, v);
      }
      scaled[k] = scaled[k].with_override(from, to, std::move(table));
    }
  }
  for (int k : remaining) out.factors.task[k].indicative[phase] = scaled[k];
  for (const auto& [task, value] : forced) {
    auto& slot = out.factors.task[task].indicative[phase];
    slot = slot.with_override(window.from, window.to, degenerate(model, task, value));
  }
  return out;
}

PlotModel apply_overrides(const PlotModel& model, const FactorOverrides& ov, Window window) {
  if (auto issues = check_overrides(model, ov, "overrides"); !issues.empty()) {
    throw Error(issues.front().code, issues.front().path + ": " + issues.front().message);
  }
  PlotModel out = model;
  auto& pf = out.factors.phase;
  for (const auto& o : ov.phases) {
    for (Phase j : target_phases(model, o.phase)) {
      if (o.move_prob) pf.move_prob[j - 1] = pf.move_prob[j - 1].with_override(window.from, window.to, *o.move_prob);
      if (o.abort_prob) {
        pf.abort_prob[j - 1] = pf.abort_prob[j - 1].with_override(window.from, window.to, *o.abort_prob);
      }
    }
  }

  std::map<Phase, std::vector<std::pair<int, bool>>> scaled_forcings;
  for (const auto& f : ov.tasks) {
    if (f.phase) {
      scaled_forcings[*f.phase].emplace_back(f.task, f.value);
      continue;
    }
    auto& factor = out.factors.task[f.task];
    auto table = std::make_shared<const TaskTable>(degenerate(model, f.task, f.value));
    factor.inactive = factor.inactive.with_override(window.from, window.to, table);
    for (auto& [phase, timed] : factor.indicative) timed = timed.with_override(window.from, window.to, table);
  }
  for (const auto& [phase, forced] : scaled_forcings) out = do_block_tasks(out, phase, forced, window);

  for (const auto& o : ov.intensities) {
    auto w = sub_window(o, window);
    auto& timed = out.factors.intensity[o.task].table;
    timed = timed.with_override(w.from, w.to, o.table);
  }
  return out;
}

const char* to_string(InterventionKind kind) {
  switch (kind) {
  case InterventionKind::Null: return "null";
  case InterventionKind::Clarifying: return "clarifying";
  case InterventionKind::Blocking: return "blocking";
  case InterventionKind::Direct: return "direct";
  case InterventionKind::Disabling: return "disabling";
  }
  return "null";
}

std::optional<InterventionKind> intervention_kind_from_string(const std::string& s) {
  for (auto k : {InterventionKind::Null, InterventionKind::Clarifying, InterventionKind::Blocking,
                 InterventionKind::Direct, InterventionKind::Disabling}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

Intervention null_intervention(int t0) {
  Intervention d;
  d.name = "null";
  d.kind = InterventionKind::Null;
  d.t0 = t0;
  return d;
}

std::vector<Issue> check_intervention(const PlotModel& model, const Intervention& d, const std::string& path) {
  std::vector<Issue> issues;
  auto bad = [&](std::string code, std::string p, std::string msg) {
    issues.push_back({std::move(code), std::move(p), std::move(msg)});
  };
  if (d.t0 < 2) bad("bad_time_window", path + ".t0", "interventions act on transitions; t0 must be >= 2");
  if (d.t1 && *d.t1 < d.t0) bad("bad_time_window", path + ".t1", "t1 must not precede t0");
  if (d.t1 && *d.t1 > model.horizon) bad("bad_time_window", path + ".t1", "t1 must not exceed the horizon");
  for (auto [v, key] : {std::pair{d.disable_prob, "disable_prob"}, std::pair{d.abort_success, "abort_success"},
                        std::pair{d.betrayal_prob, "betrayal_prob"}}) {
    if (!in_unit(v)) bad("probability_out_of_range", path + "." + key, "outside [0,1]");
  }
  const auto& ov = d.overrides;
  auto mismatch = [&](const char* what) {
    bad("payload_kind_mismatch", path, std::string(to_string(d.kind)) + " interventions cannot carry " + what);
  };
  switch (d.kind) {
  case InterventionKind::Null:
    if (!ov.empty() || d.disable_prob != 0 || d.abort_success != 0 || d.betrayal_prob != 0) mismatch("a payload");
    break;
  case InterventionKind::Clarifying:
    if (!ov.phases.empty() || !ov.tasks.empty()) mismatch("phase or task overrides");
    if (d.disable_prob != 0 || d.abort_success != 0) mismatch("disable or abort probabilities");
    break;
  case InterventionKind::Blocking:
    if (!ov.intensities.empty()) mismatch("intensity overrides");
    if (d.disable_prob != 0 || d.abort_success != 0) mismatch("disable or abort probabilities");
    break;
  case InterventionKind::Direct:
    if (!ov.tasks.empty() || !ov.intensities.empty()) mismatch("task or intensity overrides");
    if (d.abort_success != 0) mismatch("an abort_success probability");
    break;
  case InterventionKind::Disabling:
    if (!ov.empty() || d.disable_prob != 0) mismatch("factor overrides or a disable probability");
    break;
  }
  auto more = check_overrides(model, ov, path + ".overrides");
  issues.insert(issues.end(), more.begin(), more.end());
  return issues;
}

PlotModel apply_unintelligent(const PlotModel& model, const Intervention& d) {
  if (d.kind == InterventionKind::Null) return model;
  if (auto issues = check_intervention(model, d, d.name); !issues.empty()) {
    throw Error(issues.front().code, issues.front().path + ": " + issues.front().message);
  }
  PlotModel out = apply_overrides(model, d.overrides, d.window());
  if (d.kind == InterventionKind::Disabling && d.abort_success > 0) {
    // Extradition at t0: abort with rho, otherwise the usual abort law.
    auto& abort = out.factors.phase.abort_prob;
    for (Phase j = 1; j <= model.m(); ++j) {
      const double base = abort[j - 1].at(d.t0);
      abort[j - 1] = abort[j - 1].with_override(d.t0, d.t0, d.abort_success + (1.0 - d.abort_success) * base);
    }
  }
  return out;
}

namespace {

struct Touch {
  std::string factor;
  Window window;
};

std::vector<Touch> touches(const PlotModel& model, const Intervention& d) {
  std::vector<Touch> out;
  const Window w = d.window();
  for (const auto& o : d.overrides.phases) {
    for (Phase j : target_phases(model, o.phase)) {
      if (o.move_prob) out.push_back({"move_prob[" + std::to_string(j) + "]", w});
      if (o.abort_prob) out.push_back({"abort_prob[" + std::to_string(j) + "]", w});
    }
  }
  for (const auto& f : d.overrides.tasks) {
    if (f.phase) {
      for (int k : model.bipartite.task_sets[*f.phase - 1]) {
        out.push_back({"task[" + std::to_string(k + 1) + "]@" + std::to_string(*f.phase), w});
      }
    } else {
      out.push_back({"task[" + std::to_string(f.task + 1) + "]", w});
    }
  }
  for (const auto& o : d.overrides.intensities) {
    out.push_back({"intensity[" + std::to_string(o.task + 1) + "]", sub_window(o, w)});
  }
  if (d.kind == InterventionKind::Disabling) {
    for (Phase j = 1; j <= model.m(); ++j) out.push_back({"abort_prob[" + std::to_string(j) + "]", {d.t0, d.t0}});
  }
  return out;
}

} // namespace

PlotModel apply_unintelligent(const PlotModel& model, std::span<const Intervention> ds,
                              std::vector<std::string>* warnings) {
  PlotModel out = model;
  std::vector<std::pair<std::string, Touch>> seen;
  for (const auto& d : ds) {
    for (const auto& touch : touches(model, d)) {
      for (const auto& [owner, prior] : seen) {
        if (prior.factor == touch.factor && prior.window.overlaps(touch.window) && warnings) {
          warnings->push_back("intervention '" + d.name + "' overrides " + touch.factor + " already set by '" +
                              owner + "'");
        }
      }
    }
    for (auto& touch : touches(model, d)) seen.emplace_back(d.name, std::move(touch));
    out = apply_unintelligent(out, d);
  }
  return out;
}

std::vector<DisableEvent> disable_events(const Intervention& d) {
  if (d.kind != InterventionKind::Direct || d.disable_prob <= 0) return {};
  return {DisableEvent{d.t0, d.disable_prob}};
}

bool graph_invariance_check(const PlotModel& model, const std::function<PlotModel(const PlotModel&)>& map) {
  return same_graphs(model, map(model));
}

bool graph_invariance_check(const PlotModel& model, const Intervention& d) {
  return graph_invariance_check(model, [&](const PlotModel& m) { return apply_unintelligent(m, d); });
}

} // namespace plotsmith
