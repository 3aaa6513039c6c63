#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "support.hpp"

#include "plotsmith/error.hpp"
#include "plotsmith/factors.hpp"
#include "plotsmith/simulate.hpp"

using namespace plotsmith;
using namespace plotsmith::testing;

namespace {

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

} // namespace

TEST_CASE("initial belief") {
  auto model = tiny_model();
  const auto b = init_belief(model);
  CHECK(b.t == 0);
  CHECK(b.weights.size() == 12);
  CHECK(sum(b.weights) == doctest::Approx(1.0));
  const auto marginal = phase_marginal(b);
  for (int j = 0; j < 3; ++j) CHECK(marginal[j] == doctest::Approx(model.factors.phase.initial[j]));

  SUBCASE("pure inactive start with fair independent tasks") {
    model.factors.phase.initial = {1.0, 0.0, 0.0};
    for (auto& tf : model.factors.task) tf.inactive = Timed<TaskTable>(TaskTable{{0.5}});
    const auto pure = init_belief(model);
    for (TaskMask m = 0; m < 4; ++m) CHECK(pure.weights[pure.space.index(0, m)] == doctest::Approx(0.25));
  }
}

TEST_CASE("phase marginal") {
  StateSpace space(2, 1);
  std::vector<double> pure(space.size(), 0.0);
  pure[space.index(2, 1)] = 1.0;
  CHECK(phase_marginal(space, pure) == std::vector<double>{0.0, 0.0, 1.0});
  std::vector<double> uniform(space.size(), 1.0 / 6);
  for (double p : phase_marginal(space, uniform)) CHECK(p == doctest::Approx(1.0 / 3));
}

TEST_CASE("map phase breaks ties towards the lower index") {
  BeliefState b;
  b.space = StateSpace(2, 1);
  b.weights = {0.0, 0.0, 0.25, 0.25, 0.5, 0.0};
  CHECK(map_phase(b) == 1);
  b.weights = {0.1, 0.0, 0.2, 0.0, 0.7, 0.0};
  CHECK(map_phase(b) == 2);
}

TEST_CASE("filter matches exhaustive path enumeration on the tiny model") {
  const auto model = tiny_model();
  const std::vector<Observation> zs{{1, 0}, {1, 1}, {0, 0}};
  const auto oracle = brute_force_filter(model, zs);
  const auto beliefs = filter_series(model, zs);
  REQUIRE(beliefs.size() == 4);
  for (int t = 1; t <= 3; ++t) {
    CHECK(beliefs[t].t == t);
    const auto marginal = phase_marginal(beliefs[t]);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(marginal[j] - oracle.marginals[t - 1][j]) < 1e-12);
    CHECK(std::abs(beliefs[t].log_evidence - oracle.log_evidence[t - 1]) < 1e-12);
  }
}

TEST_CASE("filter matches exhaustive enumeration on random models") {
  ModelFactory factory(4242);
  RandomSpec spec;
  spec.max_m = 3;
  spec.max_n = 2;
  spec.alphabet = 3;
  for (int i = 0; i < 60; ++i) {
    spec.horizon = factory.integer(1, 4);
    const auto model = factory.model(spec);
    REQUIRE(validate(model).ok());
    const auto zs = random_observations(factory, model, spec.horizon);
    const auto oracle = brute_force_filter(model, zs);
    const auto beliefs = filter_series(model, zs);
    for (int t = 1; t <= spec.horizon; ++t) {
      const auto marginal = phase_marginal(beliefs[t]);
      for (std::size_t j = 0; j < marginal.size(); ++j) CHECK(std::abs(marginal[j] - oracle.marginals[t - 1][j]) < 1e-10);
      CHECK(std::abs(beliefs[t].log_evidence - oracle.log_evidence[t - 1]) < 1e-10);
    }
  }
}

TEST_CASE("log evidence equals the summed density of every trajectory") {
  const auto model = tiny_model();
  const std::vector<Observation> zs{{0, 1}, {1, 1}};
  double total = 0;
  for (Phase a = 0; a < 3; ++a) {
    for (Phase b = 0; b < 3; ++b) {
      for (TaskMask ta = 0; ta < 4; ++ta) {
        for (TaskMask tb = 0; tb < 4; ++tb) {
          Trajectory tr;
          tr.phases = {a, b};
          tr.tasks = {ta, tb};
          tr.intensities = zs;
          total += std::exp(trajectory_log_density(model, tr));
        }
      }
    }
  }
  CHECK(filter_series(model, zs).back().log_evidence == doctest::Approx(std::log(total)).epsilon(1e-12));
}

TEST_CASE("series folds filter steps") {
  const auto model = tiny_model();
  const std::vector<Observation> zs{{1, 0}, {0, 1}};
  CHECK(filter_series(model, {}).size() == 1);
  const auto series = filter_series(model, zs);
  const auto manual = filter_step(model, filter_step(model, init_belief(model), zs[0]), zs[1]);
  CHECK(series.back().t == manual.t);
  CHECK(series.back().weights == manual.weights);
  CHECK(series.back().log_evidence == manual.log_evidence);
}

TEST_CASE("uninformative emissions make filtering pure prediction") {
  auto model = tiny_model();
  for (auto& f : model.factors.intensity) f.table = Timed<EmissionTable>(EmissionTable{{{0.3, 0.7}, {0.3, 0.7}}, {}, {}});
  auto b = init_belief(model);
  for (int t = 0; t < 4; ++t) {
    const auto filtered = filter_step(model, b, {1, 0});
    const auto predicted = predict_step(model, b);
    for (std::size_t i = 0; i < filtered.weights.size(); ++i) {
      CHECK(filtered.weights[i] == doctest::Approx(predicted.weights[i]).epsilon(1e-12));
    }
    b = filtered;
  }
}

TEST_CASE("impossible observations are reported") {
  auto model = tiny_model();
  model.factors.intensity[0].table = Timed<EmissionTable>(EmissionTable{{{1.0, 0.0}, {1.0, 0.0}}, {}, {}});
  try {
    filter_step(model, init_belief(model), {1, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "impossible_observation");
  }
  CHECK_THROWS_AS(filter_step(model, init_belief(model), {0}), Error);
}

TEST_CASE("predict forward") {
  const auto model = tiny_model();
  const auto b = filter_series(model, std::vector<Observation>{{1, 0}, {1, 1}}).back();

  const auto none = predict_forward(model, b, 0);
  REQUIRE(none.size() == 1);
  CHECK(none[0] == phase_marginal(b));

  // Dense joint kernel raised to successive powers.
  const int phases = 3;
  const int masks = 4;
  const int size = phases * masks;
  std::vector<std::vector<double>> kernel(size, std::vector<double>(size, 0.0));
  for (Phase i = 0; i < phases; ++i) {
    for (int a = 0; a < masks; ++a) {
      for (Phase j = 0; j < phases; ++j) {
        for (int c = 0; c < masks; ++c) {
          kernel[i * masks + a][j * masks + c] =
              oracle_transition(model, 3, i, j) * oracle_task_slice(model, 3, j, static_cast<TaskMask>(c), static_cast<TaskMask>(a));
        }
      }
    }
  }
  const auto predicted = predict_forward(model, b, 5);
  REQUIRE(predicted.size() == 6);
  std::vector<double> w = b.weights;
  for (int step = 1; step <= 5; ++step) {
    w = matvec(kernel, w);
    for (Phase j = 0; j < phases; ++j) {
      double expected = 0;
      for (int c = 0; c < masks; ++c) expected += w[j * masks + c];
      CHECK(std::abs(predicted[step][j] - expected) < 1e-12);
    }
    CHECK(sum(predicted[step]) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("from the inactive state") {
    auto dead = b;
    std::fill(dead.weights.begin(), dead.weights.end(), 0.0);
    dead.weights[dead.space.index(0, 0)] = 1.0;
    for (const auto& m : predict_forward(model, dead, 10)) CHECK(m[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("a prior belief is already the first slice") {
  const auto model = tiny_model();
  const auto prior = init_belief(model);
  const auto stepped = predict_step(model, prior);
  CHECK(stepped.t == 1);
  CHECK(stepped.weights == prior.weights);
}

TEST_CASE("bundled model beliefs stay normalized") {
  const auto doc = bundled_document();
  const auto tr = sample_trajectory(doc.model, doc.model.horizon, 21);
  const auto beliefs = filter_series(doc.model, tr.intensities);
  CHECK(beliefs.size() == tr.length() + 1);
  for (const auto& b : beliefs) CHECK(sum(b.weights) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t t = 1; t < beliefs.size(); ++t) CHECK(beliefs[t].log_evidence < beliefs[t - 1].log_evidence);
}
