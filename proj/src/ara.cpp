#include "plotsmith/ara.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "plotsmith/error.hpp"

namespace plotsmith {
namespace {

constexpr double kTieTolerance = 1e-12;

struct Effective {
  double move;
  double abort;
  Floret floret;
};

// Unaware phase i under discovery probability pi: abort as before, otherwise
// discovery takes the place of staying or moving.
Effective effective_law(double pi, double q, double q_abort, const Floret& base, bool has_edges) {
  Effective e{q, q_abort, {}};
  if (pi == 0.0) {
    e.floret = has_edges ? base : Floret{};
    e.floret.push_back(has_edges ? 0.0 : 1.0);
    return e;
  }
  e.move = pi + (1.0 - pi) * q;
  for (double p : base) e.floret.push_back((1.0 - pi) * q * p / e.move);
  e.floret.push_back(pi / e.move);
  return e;
}

template <class T>
Timed<T> from_segments(const std::vector<std::pair<int, T>>& runs) {
  Timed<T> out(runs.front().second);
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const int to = r + 1 < runs.size() ? runs[r + 1].first - 1 : kForever;
    out = out.with_override(runs[r].first, to, runs[r].second);
  }
  return out;
}

FactorOverrides expand_aware(const FactorOverrides& ov, int m) {
  FactorOverrides out = ov;
  out.phases.clear();
  for (const auto& o : ov.phases) {
    if (o.phase) {
      if (*o.phase >= 1 && *o.phase <= m) {
        throw Error("override_unaware_layer",
                    "override referencing the unaware layer: phase " + std::to_string(*o.phase));
      }
      out.phases.push_back(o);
      continue;
    }
    for (Phase j = m + 1; j <= 2 * m; ++j) {
      PhaseOverride copy = o;
      copy.phase = j;
      out.phases.push_back(copy);
    }
  }
  for (const auto& f : ov.tasks) {
    if (f.phase && *f.phase >= 1 && *f.phase <= m) {
      throw Error("override_unaware_layer", "override referencing the unaware layer: phase " + std::to_string(*f.phase));
    }
  }
  return out;
}

} // namespace

DoubledModel double_model(const PlotModel& model, const DiscoveryProb& pi, const FactorOverrides& aware_overrides,
                          Window aware_window) {
  const int m = model.m();
  const auto& base = model.factors.phase;
  DoubledModel doubled;
  doubled.base_m = m;
  PlotModel& out = doubled.model;
  out = model;

  auto& graph = out.phases;
  graph.m = 2 * m;
  graph.labels.clear();
  graph.edges.clear();
  graph.stages.clear();
  for (Phase i = 1; i <= m; ++i) {
    graph.labels.push_back(model.phases.label(i));
    auto edges = model.phases.successors(i);
    edges.push_back(i + m);
    graph.edges.push_back(std::move(edges));
    graph.stages.push_back(i - 1);
  }
  for (Phase i = 1; i <= m; ++i) {
    graph.labels.push_back(model.phases.label(i) + "*");
    std::vector<Phase> edges;
    for (Phase j : model.phases.successors(i)) edges.push_back(j + m);
    graph.edges.push_back(std::move(edges));
    graph.stages.push_back(m + model.phases.stage_of(i));
  }

  auto& pf = out.factors.phase;
  pf.initial.resize(static_cast<std::size_t>(2 * m + 1), 0.0);
  pf.move_prob.clear();
  pf.abort_prob.clear();
  pf.florets.clear();
  for (Phase i = 1; i <= m; ++i) {
    const auto& floret = base.florets[model.phases.stage_of(i)];
    std::set<int> cuts{1};
    pi.collect_breakpoints(1, kForever, cuts);
    base.move_prob[i - 1].collect_breakpoints(1, kForever, cuts);
    base.abort_prob[i - 1].collect_breakpoints(1, kForever, cuts);
    floret.collect_breakpoints(1, kForever, cuts);
    std::vector<std::pair<int, double>> move, abort;
    std::vector<std::pair<int, Floret>> florets;
    const bool has_edges = !model.phases.successors(i).empty();
    for (int a : cuts) {
      auto e = effective_law(pi.at(a), base.move_prob[i - 1].at(a), base.abort_prob[i - 1].at(a), floret.at(a),
                             has_edges);
      move.emplace_back(a, e.move);
      abort.emplace_back(a, e.abort);
      florets.emplace_back(a, std::move(e.floret));
    }
    pf.move_prob.push_back(from_segments(move));
    pf.abort_prob.push_back(from_segments(abort));
    pf.florets.push_back(from_segments(florets));
  }
  for (Phase i = 1; i <= m; ++i) {
    pf.move_prob.push_back(base.move_prob[i - 1]);
    pf.abort_prob.push_back(base.abort_prob[i - 1]);
  }
  for (const auto& floret : base.florets) pf.florets.push_back(floret);

  auto& sets = out.bipartite.task_sets;
  for (Phase i = 1; i <= m; ++i) sets.push_back(model.bipartite.task_sets[i - 1]);
  for (auto& factor : out.factors.task) {
    std::map<Phase, Timed<TaskTable>> aware;
    for (const auto& [j, table] : factor.indicative) aware.emplace(j + m, table);
    factor.indicative.merge(aware);
  }
  const auto base_success = model.success.phases;
  for (Phase j : base_success) out.success.phases.push_back(j + m);

  if (!aware_overrides.empty()) out = apply_overrides(out, expand_aware(aware_overrides, m), aware_window);
  return doubled;
}

FactorOverrides to_aware_layer(const FactorOverrides& overrides, int base_m) {
  FactorOverrides out = overrides;
  out.phases.clear();
  for (const auto& o : overrides.phases) {
    if (o.phase) {
      PhaseOverride copy = o;
      copy.phase = *o.phase + base_m;
      out.phases.push_back(copy);
      continue;
    }
    for (Phase j = base_m + 1; j <= 2 * base_m; ++j) {
      PhaseOverride copy = o;
      copy.phase = j;
      out.phases.push_back(copy);
    }
  }
  for (auto& f : out.tasks) {
    if (f.phase) f.phase = *f.phase + base_m;
  }
  return out;
}

BeliefState lift_belief(const BeliefState& belief, const DoubledModel& doubled) {
  BeliefState out;
  out.t = belief.t;
  out.log_evidence = belief.log_evidence;
  out.space = StateSpace(doubled.model.m(), doubled.model.n());
  out.weights.assign(out.space.size(), 0.0);
  // Phase-major indexing puts the unaware layer exactly where the base states were.
  std::copy(belief.weights.begin(), belief.weights.end(), out.weights.begin());
  return out;
}

std::vector<double> fold_marginal(std::span<const double> doubled_marginal, int base_m) {
  std::vector<double> out(static_cast<std::size_t>(base_m + 1), 0.0);
  for (std::size_t p = 0; p < doubled_marginal.size(); ++p) {
    const auto i = p > static_cast<std::size_t>(base_m) ? p - base_m : p;
    out[i] += doubled_marginal[p];
  }
  return out;
}

double adversary_seu(const PlotModel& model, const Reaction& reaction, Window from, const BeliefState& start,
                     int horizon, const UtilityTriple& utility, std::span<const DisableEvent> disables) {
  const PlotModel reacted = reaction.overrides.empty() ? model : apply_overrides(model, reaction.overrides, from);
  return utility.expect(classify_outcomes(reacted, start, horizon, disables));
}

std::vector<Issue> check_profile(const AdversaryProfile& profile, std::span<const Reaction> catalogue,
                                 const std::string& path) {
  std::vector<Issue> issues;
  auto bad = [&](std::string code, std::string p, std::string msg) {
    issues.push_back({std::move(code), std::move(p), std::move(msg)});
  };
  auto check_simplex = [&](double sum, const std::string& p) {
    if (std::abs(sum - 1.0) > 1e-9) bad("weights_not_normalized", p, "weights sum to " + std::to_string(sum));
  };
  double total = 0.0;
  for (std::size_t s = 0; s < profile.scenarios.size(); ++s) {
    const auto& sc = profile.scenarios[s];
    const auto p = path + ".u_a_scenarios[" + std::to_string(s) + "]";
    if (!(sc.u_a >= 0.0 && sc.u_a <= 1.0)) bad("probability_out_of_range", p + ".u_a", "u_A outside [0,1]");
    if (!(sc.weight >= 0.0)) bad("probability_out_of_range", p + ".weight", "negative weight");
    total += sc.weight;
  }
  if (profile.scenarios.empty()) {
    bad("no_scenarios", path + ".u_a_scenarios", "at least one utility scenario is required");
  } else {
    check_simplex(total, path + ".u_a_scenarios");
  }
  std::set<std::string> ids;
  for (const auto& r : catalogue) ids.insert(r.id);
  for (const auto& [kind, realizations] : profile.capability) {
    const auto p = path + ".capability." + to_string(kind);
    double sum = 0.0;
    for (std::size_t c = 0; c < realizations.size(); ++c) {
      sum += realizations[c].weight;
      if (!(realizations[c].weight >= 0.0)) bad("probability_out_of_range", p, "negative weight");
      for (const auto& id : realizations[c].reactions) {
        if (!ids.contains(id)) bad("unknown_reaction", p + "[" + std::to_string(c) + "]", "unknown reaction '" + id + "'");
      }
    }
    if (!realizations.empty()) check_simplex(sum, p);
  }
  for (const auto& [name, setting] : profile.discovery) {
    const auto p = path + ".discovery." + name;
    if (setting.betrayal_prob && !(*setting.betrayal_prob >= 0.0 && *setting.betrayal_prob <= 1.0)) {
      bad("probability_out_of_range", p + ".betrayal_prob", "outside [0,1]");
    }
    if (!(setting.local_discovery_prob >= 0.0 && setting.local_discovery_prob <= 1.0)) {
      bad("probability_out_of_range", p + ".local_discovery_prob", "outside [0,1]");
    }
  }
  if (!(profile.epsilon >= 0.0 && profile.epsilon < 1.0)) bad("probability_out_of_range", path + ".epsilon", "outside [0,1)");
  return issues;
}

const char* to_string(Branch branch) {
  switch (branch) {
  case Branch::Unnoticed: return "unnoticed";
  case Branch::Local: return "local";
  case Branch::Discovered: return "discovered";
  }
  return "unnoticed";
}

std::size_t argmax_first(std::span<const double> scores) {
  const double best = *std::max_element(scores.begin(), scores.end());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= best - kTieTolerance) return i;
  }
  return 0;
}

std::vector<double> tremble(std::span<const double> scores, double epsilon) {
  std::vector<double> out(scores.size(), 0.0);
  if (scores.empty()) return out;
  const auto best = argmax_first(scores);
  if (scores.size() == 1) {
    out[0] = 1.0;
    return out;
  }
  const double rest = epsilon / static_cast<double>(scores.size() - 1);
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = i == best ? 1.0 - epsilon : rest;
  return out;
}

int enactment_time(const Intervention& d, const BeliefState& start) {
  return std::max(d.t0, belief_slice(start) + 1);
}

OutcomeDistribution IntelligentMixture::outcomes() const {
  OutcomeDistribution sum;
  for (const auto& c : components) {
    sum.p_success += c.weight * c.outcomes.p_success;
    sum.p_foiled_disabled += c.weight * c.outcomes.p_foiled_disabled;
    sum.p_foiled_free += c.weight * c.outcomes.p_foiled_free;
  }
  return sum;
}

namespace {

// Builds and scores the per-(branch, reaction) models of one intervention.
class Evaluator {
public:
  Evaluator(const AraSetting& setting, const Intervention& d) : s_(setting) {
    te_ = enactment_time(d, *s_.start);
    Intervention shifted = d;
    if (shifted.t1 && *shifted.t1 < te_) {
      throw Error("intervention_in_past", "intervention '" + d.name + "' ends before the next step");
    }
    shifted.t0 = te_;
    intervened_ = apply_unintelligent(*s_.model, shifted);
    disables_ = disable_events(shifted);
    for (std::size_t r = 0; r < s_.catalogue.size(); ++r) order_[s_.catalogue[r].id] = r;
  }

  int enactment() const { return te_; }
  const std::vector<DisableEvent>& disables() const { return disables_; }

  std::size_t position(const std::string& id) const {
    auto it = order_.find(id);
    if (it == order_.end()) throw Error("unknown_reaction", "unknown reaction '" + id + "'");
    return it->second;
  }

  const MixtureComponent& component(Branch branch, const std::string& reaction) {
    auto key = std::make_pair(branch, reaction);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    MixtureComponent c;
    c.branch = branch;
    c.reaction = reaction;
    c.base_m = s_.model->m();
    c.disables = disables_;
    const Reaction* r = reaction.empty() ? nullptr : &s_.catalogue[position(reaction)];
    if (branch == Branch::Discovered) {
      const auto pi = DiscoveryProb(0.0).with_override(te_, te_, 1.0);
      const auto aware = r ? to_aware_layer(r->overrides, c.base_m) : FactorOverrides{};
      auto doubled = double_model(intervened_, pi, aware, {te_ + 1, kForever});
      c.outcomes = classify_outcomes(doubled.model, lift_belief(*s_.start, doubled), s_.horizon, disables_);
      c.model = std::move(doubled.model);
    } else {
      c.model = r && branch == Branch::Local && !r->overrides.empty()
                    ? apply_overrides(intervened_, r->overrides, {te_, kForever})
                    : intervened_;
      c.outcomes = classify_outcomes(c.model, *s_.start, s_.horizon, disables_);
    }
    return cache_.emplace(key, std::move(c)).first->second;
  }

  std::vector<std::string> sorted(std::span<const std::string> ids) const {
    std::vector<std::string> out(ids.begin(), ids.end());
    std::stable_sort(out.begin(), out.end(),
                     [&](const auto& a, const auto& b) { return position(a) < position(b); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<double> scores(Branch branch, std::span<const std::string> ids, const UtilityTriple& u) {
    std::vector<double> out;
    for (const auto& id : ids) out.push_back(u.expect(component(branch, id).outcomes));
    return out;
  }

  std::vector<CapabilityRealization> realizations(InterventionKind kind) const {
    if (auto it = s_.profile->capability.find(kind); it != s_.profile->capability.end() && !it->second.empty()) {
      return it->second;
    }
    CapabilityRealization all;
    for (const auto& r : s_.catalogue) all.reactions.push_back(r.id);
    return {all};
  }

private:
  const AraSetting& s_;
  int te_ = 2;
  PlotModel intervened_;
  std::vector<DisableEvent> disables_;
  std::map<std::string, std::size_t> order_;
  std::map<std::pair<Branch, std::string>, MixtureComponent> cache_;
};

} // namespace

std::string best_response(const AraSetting& setting, const Intervention& d, Branch branch, double u_a,
                          std::span<const std::string> available) {
  if (available.empty()) throw Error("no_reactions", "the reaction set is empty");
  Evaluator eval(setting, d);
  const auto ids = eval.sorted(available);
  const auto scores = eval.scores(branch, ids, UtilityTriple::adversary(u_a));
  return ids[argmax_first(scores)];
}

IntelligentMixture apply_intelligent(const AraSetting& setting, const Intervention& d) {
  Evaluator eval(setting, d);
  IntelligentMixture mixture;
  mixture.enactment = eval.enactment();
  if (d.kind == InterventionKind::Null) {
    auto c = eval.component(Branch::Unnoticed, "");
    c.weight = 1.0;
    mixture.components.push_back(std::move(c));
    return mixture;
  }

  double pi = d.betrayal_prob;
  double lambda = 1.0;
  if (auto it = setting.profile->discovery.find(d.name); it != setting.profile->discovery.end()) {
    if (it->second.betrayal_prob) pi = *it->second.betrayal_prob;
    lambda = it->second.local_discovery_prob;
  }
  if (d.kind == InterventionKind::Direct || d.kind == InterventionKind::Disabling) pi = 1.0;

  std::map<std::pair<Branch, std::size_t>, double> acc; // reaction position; npos for none
  constexpr auto kNone = static_cast<std::size_t>(-1);
  acc[{Branch::Unnoticed, kNone}] += (1.0 - pi) * (1.0 - lambda);
  for (auto [branch, w] : {std::pair{Branch::Local, (1.0 - pi) * lambda}, std::pair{Branch::Discovered, pi}}) {
    if (w <= 0.0) continue;
    for (const auto& realization : eval.realizations(d.kind)) {
      if (realization.weight <= 0.0) continue;
      const auto ids = eval.sorted(realization.reactions);
      if (ids.empty()) {
        acc[{branch, kNone}] += w * realization.weight;
        continue;
      }
      for (const auto& scenario : setting.profile->scenarios) {
        const auto scores = eval.scores(branch, ids, UtilityTriple::adversary(scenario.u_a));
        const auto probs = tremble(scores, setting.profile->epsilon);
        for (std::size_t r = 0; r < ids.size(); ++r) {
          acc[{branch, eval.position(ids[r])}] += w * realization.weight * scenario.weight * probs[r];
        }
      }
    }
  }
  for (const auto& [key, weight] : acc) {
    if (weight <= 0.0) continue;
    const auto id = key.second == kNone ? std::string{} : setting.catalogue[key.second].id;
    auto c = eval.component(key.first, id);
    c.weight = weight;
    mixture.components.push_back(std::move(c));
  }
  return mixture;
}

std::vector<std::pair<std::string, double>> reaction_distribution(const AraSetting& setting, const Intervention& d) {
  const auto mixture = apply_intelligent(setting, d);
  std::map<std::string, double> mass;
  double total = 0.0;
  for (const auto& c : mixture.components) {
    if (c.branch == Branch::Unnoticed || c.reaction.empty()) continue;
    mass[c.reaction] += c.weight;
    total += c.weight;
  }
  std::vector<std::pair<std::string, double>> out;
  if (total <= 0.0) return out;
  for (const auto& r : setting.catalogue) {
    auto it = mass.find(r.id);
    out.emplace_back(r.id, it == mass.end() ? 0.0 : it->second / total);
  }
  return out;
}

} // namespace plotsmith
