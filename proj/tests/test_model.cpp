#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>

#include "support.hpp"

#include "plotsmith/error.hpp"

using namespace plotsmith;
using namespace plotsmith::testing;

namespace {

bool has_issue(const ValidationReport& r, const std::string& code, const std::string& path) {
  for (const auto& e : r.errors) {
    if (e.code == code && e.path == path) return true;
  }
  return false;
}

} // namespace

TEST_CASE("bundled model validates with the expected shape") {
  const auto doc = bundled_document();
  const auto report = validate(doc.model);
  CHECK(report.ok());
  CHECK(doc.model.m() == 6);
  CHECK(doc.model.n() == 8);
  CHECK(joint_state_space(doc.model).size() == 7 * 256);
}

TEST_CASE("tiny model validates") { CHECK(validate(tiny_model()).ok()); }

TEST_CASE("forward contemporaneous parent is rejected") {
  auto model = bundled_document().model;
  model.tasks.contemporaneous_parents[2] = {3};
  const auto r = validate(model);
  CHECK(has_issue(r, "forward_contemporaneous_parent", "tasks.contemporaneous_parents[2][0]"));
}

TEST_CASE("unnormalized floret is reported at its row") {
  auto model = tiny_model();
  model.factors.phase.florets[0] = Timed<Floret>(Floret{0.9});
  CHECK(has_issue(validate(model), "floret_not_normalized", "factors.phase.florets[0]"));
}

TEST_CASE("structural errors") {
  SUBCASE("no active phases") {
    PlotModel model;
    model.tasks.n = 1;
    CHECK(validate(model).has_error("no_active_phases"));
  }
  SUBCASE("self edge") {
    auto model = tiny_model();
    model.phases.edges[0] = {1, 2};
    CHECK(validate(model).has_error("self_edge"));
  }
  SUBCASE("edge to the inactive state") {
    auto model = tiny_model();
    model.phases.edges[0] = {0, 2};
    CHECK(validate(model).has_error("edge_to_inactive"));
  }
  SUBCASE("shared stage needs equal edge sets") {
    auto model = tiny_model();
    model.phases.stages = {0, 0};
    CHECK(validate(model).has_error("stage_edges_mismatch"));
  }
  SUBCASE("stage ids must be contiguous") {
    auto model = tiny_model();
    model.phases.stages = {1, 1};
    model.phases.edges = {{2}, {1}};
    CHECK(validate(model).has_error("stage_gap"));
  }
}

TEST_CASE("numeric errors") {
  SUBCASE("abort probability above one") {
    auto model = tiny_model();
    model.factors.phase.abort_prob[0] = Timed<double>(1.2);
    CHECK(has_issue(validate(model), "probability_out_of_range", "factors.phase.abort_prob[0]"));
  }
  SUBCASE("initial distribution not normalized") {
    auto model = tiny_model();
    model.factors.phase.initial = {0.1, 0.1, 0.1};
    CHECK(validate(model).has_error("initial_not_normalized"));
  }
  SUBCASE("move probability without edges") {
    auto model = tiny_model();
    model.factors.phase.move_prob[1] = Timed<double>(0.3);
    CHECK(validate(model).has_error("move_without_edges"));
  }
  SUBCASE("missing table for an indicative task") {
    auto model = tiny_model();
    model.factors.task[0].indicative.clear();
    CHECK(has_issue(validate(model), "missing_task_table", "factors.task[0].by_phase.1"));
  }
  SUBCASE("table for a non-indicative phase") {
    auto model = tiny_model();
    model.factors.task[0].indicative[2] = Timed<TaskTable>(TaskTable{{0.5}});
    CHECK(validate(model).has_error("untied_task_table"));
  }
  SUBCASE("emission row not normalized") {
    auto model = tiny_model();
    model.factors.intensity[1].table = Timed<EmissionTable>(EmissionTable{{{0.8, 0.3}, {0.25, 0.75}}, {}, {}});
    CHECK(has_issue(validate(model), "emission_not_normalized", "factors.intensity[1].table[0]"));
  }
  SUBCASE("override with an empty window") {
    auto model = tiny_model();
    model.factors.phase.move_prob[0] = Timed<double>(0.5).with_override(0, 3, 0.2);
    CHECK(validate(model).has_error("bad_time_window"));
  }
  SUBCASE("bad value inside an override") {
    auto model = tiny_model();
    model.factors.phase.move_prob[0] = Timed<double>(0.5).with_override(2, 3, -0.2);
    CHECK(has_issue(validate(model), "probability_out_of_range", "factors.phase.move_prob[0].overrides[0]"));
  }
  SUBCASE("success phase out of range") {
    auto model = tiny_model();
    model.success.phases = {3};
    CHECK(validate(model).has_error("success_phase_out_of_range"));
  }
}

TEST_CASE("orphan tasks are warnings") {
  auto model = tiny_model();
  model.bipartite.task_sets = {{0}, {}};
  model.factors.task[1].indicative.clear();
  const auto r = validate(model);
  CHECK(r.ok());
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].code == "orphan_task");
}

TEST_CASE("joint state space enumeration order") {
  auto model = tiny_model();
  model.phases.m = 1;
  model.phases.labels = {"one"};
  model.phases.edges = {{}};
  model.phases.stages = {0};
  model.tasks.n = 1;
  StateSpace s(1, 1);
  CHECK(s.size() == 4);
  CHECK(s.index(0, 0) == 0);
  CHECK(s.index(0, 1) == 1);
  CHECK(s.index(1, 0) == 2);
  CHECK(s.index(1, 1) == 3);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.index(s.phase_of(i), s.tasks_of(i)) == i);
}

TEST_CASE("state cap") {
  CHECK_THROWS_WITH_AS(StateSpace(6, 8, 1000), doctest::Contains("exceeds cap"), Error);
  ::setenv("PLOTSMITH_STATE_CAP", "100", 1);
  CHECK(state_cap_from_env() == 100);
  ::setenv("PLOTSMITH_STATE_CAP", "junk", 1);
  CHECK(state_cap_from_env() == kDefaultStateCap);
  ::unsetenv("PLOTSMITH_STATE_CAP");
  CHECK(state_cap_from_env() == kDefaultStateCap);
}

TEST_CASE("timed values") {
  Timed<double> v(0.5);
  CHECK(v.time_homogeneous());
  auto w = v.with_override(3, 5, 0.1).with_override(5, 8, 0.2);
  CHECK(v.time_homogeneous());
  CHECK(w.at(2) == 0.5);
  CHECK(w.at(3) == 0.1);
  CHECK(w.at(5) == 0.2); // the later override wins
  CHECK(w.at(9) == 0.5);
  CHECK(w.base_ptr() == v.base_ptr());

  const auto segs = w.segments(1, 10);
  REQUIRE(segs.size() == 4);
  CHECK(segs[0].from == 1);
  CHECK(segs[0].to == 2);
  CHECK(segs[1].from == 3);
  CHECK(segs[1].to == 4);
  CHECK(segs[2].from == 5);
  CHECK(segs[2].to == 8);
  CHECK(segs[3].from == 9);
  CHECK(segs[3].to == 10);

  auto open = v.with_override(4, kForever, 0.9);
  CHECK(open.at(1000000) == 0.9);
  CHECK(open.segments(1, 20).size() == 2);
  CHECK(v.identical_to(Timed<double>(v)));
  CHECK_FALSE(v.identical_to(Timed<double>(0.5)));
}

TEST_CASE("task configuration packing") {
  TaskGraph g;
  g.n = 4;
  g.contemporaneous_parents = {{}, {0}, {}, {0, 2}};
  g.cross_slice_parents = {{}, {}, {}, {3}};
  g.intensity_parents = {{}, {}, {}, {}};
  CHECK(task_config_count(g, 0) == 1);
  CHECK(task_config_count(g, 3) == 8);
  // contemporaneous parents 0 and 2 in the low bits, previous-slice task 3 next
  CHECK(task_config(g, 3, 0b0001, 0) == 1);
  CHECK(task_config(g, 3, 0b0100, 0) == 2);
  CHECK(task_config(g, 3, 0b0101, 0b1000) == 7);
  CHECK(task_config(g, 3, 0, 0b1000) == 4);
}

TEST_CASE("intensity configuration is mixed radix with the first parent least significant") {
  auto model = tiny_model();
  model.tasks.n = 3;
  model.tasks.labels.push_back("c");
  model.tasks.contemporaneous_parents.push_back({});
  model.tasks.cross_slice_parents.push_back({});
  model.tasks.intensity_parents = {{}, {}, {0, 1}};
  model.factors.intensity[0].alphabet = 3;
  CHECK(intensity_config_count(model, 2) == 6);
  CHECK(intensity_config(model, 2, {2, 1, 0}) == 2 + 3 * 1);
  CHECK(intensity_config(model, 2, {1, 0, 0}) == 1);
}
