#pragma once

// Shared test helpers: a random tiny-model generator and exhaustive oracles
// written directly against the model fields, independent of the engine's
// factor and filtering code.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "plotsmith/io.hpp"
#include "plotsmith/model.hpp"
#include "plotsmith/validate.hpp"

#ifndef PLOTSMITH_MODELS_DIR
#define PLOTSMITH_MODELS_DIR "models"
#endif

namespace plotsmith::testing {

inline std::string bundled_model_path() { return std::string(PLOTSMITH_MODELS_DIR) + "/bombing.json"; }

inline ModelDocument bundled_document() { return load_document(bundled_model_path()); }

struct RandomSpec {
  int max_m = 2;
  int max_n = 2;
  int alphabet = 2;
  bool time_varying = true; // sprinkle windowed overrides
  int horizon = 4;
};

class ModelFactory {
public:
  explicit ModelFactory(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform() < p; }

  std::vector<double> simplex(std::size_t k) {
    std::vector<double> v(k);
    double s = 0;
    for (auto& x : v) s += (x = uniform(0.05, 1.0));
    for (auto& x : v) x /= s;
    return v;
  }

  std::vector<int> subset(int lo, int hi, double p = 0.5) {
    std::vector<int> out;
    for (int i = lo; i < hi; ++i) {
      if (coin(p)) out.push_back(i);
    }
    return out;
  }

  PlotModel model(const RandomSpec& spec) {
    PlotModel model;
    const int m = integer(1, spec.max_m);
    const int n = integer(1, spec.max_n);
    model.name = "random";
    model.horizon = spec.horizon;

    auto& g = model.phases;
    g.m = m;
    for (int i = 1; i <= m; ++i) {
      g.labels.push_back("phase " + std::to_string(i));
      std::vector<Phase> e;
      for (int j = 1; j <= m; ++j) {
        if (j != i && coin(0.6)) e.push_back(j);
      }
      g.edges.push_back(e);
      g.stages.push_back(i - 1);
    }

    auto& tg = model.tasks;
    tg.n = n;
    for (int k = 0; k < n; ++k) {
      tg.labels.push_back("task " + std::to_string(k + 1));
      tg.contemporaneous_parents.push_back(subset(0, k));
      tg.cross_slice_parents.push_back(subset(0, n, 0.4));
      tg.intensity_parents.push_back(subset(0, k, 0.3));
    }
    for (int j = 1; j <= m; ++j) model.bipartite.task_sets.push_back(subset(0, n, 0.6));

    auto& pf = model.factors.phase;
    pf.initial = simplex(static_cast<std::size_t>(m + 1));
    for (int i = 1; i <= m; ++i) {
      const bool has_edges = !g.edges[i - 1].empty();
      pf.move_prob.push_back(timed_probability(has_edges ? uniform(0.0, 0.9) : 0.0, spec, !has_edges));
      pf.abort_prob.push_back(timed_probability(coin(0.2) ? 0.0 : uniform(0.0, 0.5), spec, false));
      Timed<Floret> floret(simplex(g.edges[i - 1].size()));
      if (spec.time_varying && has_edges && coin(0.3)) {
        const int from = integer(2, std::max(2, spec.horizon));
        floret = floret.with_override(from, from + integer(0, 2), simplex(g.edges[i - 1].size()));
      }
      pf.florets.push_back(floret);
    }

    for (int k = 0; k < n; ++k) {
      TaskFactor tf;
      tf.inactive = timed_table(k, tg, spec);
      for (int j = 1; j <= m; ++j) {
        if (model.bipartite.indicates(j, k)) tf.indicative[j] = timed_table(k, tg, spec);
      }
      model.factors.task.push_back(tf);
    }

    for (int k = 0; k < n; ++k) {
      IntensityFactor f;
      f.alphabet = spec.alphabet;
      std::size_t configs = 1;
      for (std::size_t a = 0; a < tg.intensity_parents[k].size(); ++a) configs *= static_cast<std::size_t>(spec.alphabet);
      EmissionTable t;
      for (std::size_t r = 0; r < configs * 2; ++r) t.categorical.push_back(simplex(static_cast<std::size_t>(spec.alphabet)));
      f.table = Timed<EmissionTable>(t);
      model.factors.intensity.push_back(f);
    }

    model.success.phases = {m};
    model.success.required = coin() ? 0u : 1u;
    return model;
  }

  std::mt19937_64& rng() { return rng_; }

private:
  Timed<double> timed_probability(double base, const RandomSpec& spec, bool pinned) {
    Timed<double> v(base);
    if (spec.time_varying && !pinned && coin(0.3)) {
      const int from = integer(2, std::max(2, spec.horizon));
      v = v.with_override(from, from + integer(0, 2), uniform());
    }
    return v;
  }

  Timed<TaskTable> timed_table(int k, const TaskGraph& g, const RandomSpec& spec) {
    auto make = [&] {
      TaskTable t;
      for (std::size_t c = 0; c < task_config_count(g, k); ++c) t.p_one.push_back(uniform());
      return t;
    };
    Timed<TaskTable> v(make());
    if (spec.time_varying && coin(0.2)) {
      const int from = integer(2, std::max(2, spec.horizon));
      v = v.with_override(from, kForever, make());
    }
    return v;
  }

  std::mt19937_64 rng_;
};

// Two active phases 1 -> 2, two tasks without parents, both indicative of
// phase 1 only; binary categorical intensities.
inline PlotModel tiny_model() {
  PlotModel model;
  model.name = "tiny";
  model.horizon = 6;
  model.phases.m = 2;
  model.phases.labels = {"one", "two"};
  model.phases.edges = {{2}, {}};
  model.phases.stages = {0, 1};
  model.tasks.n = 2;
  model.tasks.labels = {"a", "b"};
  model.tasks.contemporaneous_parents = {{}, {}};
  model.tasks.cross_slice_parents = {{}, {}};
  model.tasks.intensity_parents = {{}, {}};
  model.bipartite.task_sets = {{0, 1}, {}};
  auto& pf = model.factors.phase;
  pf.initial = {0.1, 0.6, 0.3};
  pf.move_prob = {Timed<double>(0.5), Timed<double>(0.0)};
  pf.abort_prob = {Timed<double>(0.1), Timed<double>(0.2)};
  pf.florets = {Timed<Floret>(Floret{1.0}), Timed<Floret>(Floret{})};
  const double on[] = {0.7, 0.2};
  for (int k = 0; k < 2; ++k) {
    TaskFactor tf;
    tf.inactive = Timed<TaskTable>(TaskTable{{0.1}});
    tf.indicative[1] = Timed<TaskTable>(TaskTable{{on[k]}});
    model.factors.task.push_back(tf);
  }
  IntensityFactor z1;
  z1.table = Timed<EmissionTable>(EmissionTable{{{0.7, 0.3}, {0.1, 0.9}}, {}, {}});
  IntensityFactor z2;
  z2.table = Timed<EmissionTable>(EmissionTable{{{0.8, 0.2}, {0.25, 0.75}}, {}, {}});
  model.factors.intensity = {z1, z2};
  model.success.phases = {2};
  return model;
}

// ---- Independent oracle -------------------------------------------------

inline double oracle_transition(const PlotModel& model, int t, Phase i, Phase j) {
  if (i == 0) return j == 0 ? 1.0 : 0.0;
  const double abort = model.factors.phase.abort_prob[i - 1].at(t);
  const double move = model.factors.phase.move_prob[i - 1].at(t);
  if (j == 0) return abort;
  if (j == i) return (1 - abort) * (1 - move);
  const auto& edges = model.phases.edges[i - 1];
  const auto& floret = model.factors.phase.florets[model.phases.stages[i - 1]].at(t);
  for (std::size_t a = 0; a < edges.size(); ++a) {
    if (edges[a] == j) return (1 - abort) * move * floret[a];
  }
  return 0.0;
}

inline double oracle_task_slice(const PlotModel& model, int t, Phase phase, TaskMask cur, TaskMask prev) {
  const auto& g = model.tasks;
  double p = 1.0;
  for (int k = 0; k < g.n; ++k) {
    const auto& tf = model.factors.task[k];
    const bool indicative = phase > 0 && tf.indicative.contains(phase);
    const auto& table = indicative ? tf.indicative.at(phase).at(t) : tf.inactive.at(t);
    std::size_t config = 0;
    int bit = 0;
    for (int q : g.contemporaneous_parents[k]) config |= static_cast<std::size_t>((cur >> q) & 1u) << bit++;
    for (int q : g.cross_slice_parents[k]) config |= static_cast<std::size_t>((prev >> q) & 1u) << bit++;
    const double p1 = table.p_one[config];
    p *= ((cur >> k) & 1u) ? p1 : 1 - p1;
  }
  return p;
}

inline double oracle_emission(const PlotModel& model, int t, TaskMask tasks, const Observation& z) {
  double p = 1.0;
  for (int k = 0; k < model.n(); ++k) {
    const auto& f = model.factors.intensity[k];
    std::size_t config = 0;
    std::size_t radix = 1;
    for (int q : model.tasks.intensity_parents[k]) {
      config += static_cast<std::size_t>(z[q]) * radix;
      radix *= static_cast<std::size_t>(model.factors.intensity[q].alphabet);
    }
    const auto& row = f.table.at(t).categorical[config * 2 + ((tasks >> k) & 1u)];
    p *= row[static_cast<std::size_t>(z[k])];
  }
  return p;
}

struct OracleResult {
  std::vector<std::vector<double>> marginals; // [t-1][phase], t = 1..T
  std::vector<double> log_evidence;            // log p(z_1..t)
};

// Enumerates every joint path (w_1..w_T, theta_1..theta_T).
inline OracleResult brute_force_filter(const PlotModel& model, const std::vector<Observation>& zs) {
  const int T = static_cast<int>(zs.size());
  const int phases = model.m() + 1;
  const TaskMask masks = TaskMask{1} << model.n();
  OracleResult out;
  out.marginals.assign(static_cast<std::size_t>(T), std::vector<double>(static_cast<std::size_t>(phases), 0.0));
  std::vector<double> evidence(static_cast<std::size_t>(T), 0.0);

  std::function<void(int, Phase, TaskMask, double)> walk = [&](int t, Phase w, TaskMask theta, double p) {
    // p is the joint probability of the path through time t and z_1..t.
    evidence[t - 1] += p;
    out.marginals[t - 1][w] += p;
    if (t == T) return;
    for (Phase j = 0; j < phases; ++j) {
      const double pw = oracle_transition(model, t + 1, w, j);
      if (pw == 0) continue;
      for (TaskMask c = 0; c < masks; ++c) {
        const double pt = oracle_task_slice(model, t + 1, j, c, theta);
        const double pz = oracle_emission(model, t + 1, c, zs[t]);
        if (pt * pz == 0) continue;
        walk(t + 1, j, c, p * pw * pt * pz);
      }
    }
  };
  for (Phase j = 0; j < phases; ++j) {
    const double p0 = model.factors.phase.initial[j];
    if (p0 == 0) continue;
    for (TaskMask c = 0; c < masks; ++c) {
      const double p = p0 * oracle_task_slice(model, 1, j, c, 0) * oracle_emission(model, 1, c, zs[0]);
      if (p > 0) walk(1, j, c, p);
    }
  }
  for (int t = 0; t < T; ++t) {
    for (auto& v : out.marginals[t]) v /= evidence[t];
    out.log_evidence.push_back(std::log(evidence[t]));
  }
  return out;
}

inline std::vector<Observation> random_observations(ModelFactory& f, const PlotModel& model, int T) {
  std::vector<Observation> zs;
  for (int t = 0; t < T; ++t) {
    Observation z;
    for (int k = 0; k < model.n(); ++k) z.push_back(f.integer(0, model.factors.intensity[k].alphabet - 1));
    zs.push_back(z);
  }
  return zs;
}

inline std::vector<double> matvec(const std::vector<std::vector<double>>& rows, const std::vector<double>& v) {
  std::vector<double> out(rows.front().size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[i] * rows[i][j];
  }
  return out;
}

} // namespace plotsmith::testing
