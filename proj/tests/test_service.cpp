#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

#include "plotsmith/service.hpp"
#include "plotsmith/simulate.hpp"

using namespace plotsmith;
using namespace plotsmith::testing;
using nlohmann::json;

namespace {

std::string create_body() {
  return json{{"document", json::parse(read_file(bundled_model_path()))}}.dump();
}

std::string observations_body(std::uint64_t seed, int steps) {
  const auto doc = bundled_document();
  const auto tr = sample_trajectory(doc.model, steps, seed);
  return json{{"observations", tr.intensities}}.dump();
}

std::string new_session(SessionStore& store) {
  const auto r = store.create(create_body());
  REQUIRE(r.status == 201);
  return json::parse(r.body)["id"];
}

} // namespace

TEST_CASE("a new session starts from the prior") {
  SessionStore store;
  const auto r = store.create(create_body());
  REQUIRE(r.status == 201);
  const auto created = json::parse(r.body);
  CHECK(created["m"] == 6);
  CHECK(created["n"] == 8);
  CHECK(created["phase_labels"].size() == 7);
  CHECK(created["interventions"].size() == 5);
  const auto beliefs = json::parse(store.beliefs(created["id"]).body);
  REQUIRE(beliefs["beliefs"].size() == 1);
  const auto marginal = beliefs["beliefs"][0]["marginal"].get<std::vector<double>>();
  const auto initial = bundled_document().model.factors.phase.initial;
  for (std::size_t j = 0; j < initial.size(); ++j) CHECK(marginal[j] == doctest::Approx(initial[j]));
  CHECK(store.size() == 1);
}

TEST_CASE("observations are filtered in batches") {
  SessionStore store;
  const auto id = new_session(store);
  const auto r = store.append_observations(id, observations_body(16, 10));
  REQUIRE(r.status == 200);
  const auto body = json::parse(r.body);
  CHECK(body["t"] == 10);
  CHECK(body["beliefs"].size() == 10);

  const auto doc = bundled_document();
  const auto tr = sample_trajectory(doc.model, 10, 16);
  const auto expected = filter_series(doc.model, tr.intensities).back();
  CHECK(body["log_evidence"].get<double>() == expected.log_evidence);

  // a bad observation rejects the whole batch
  auto bad = json::parse(observations_body(3, 4));
  bad["observations"][2] = {0, 1};
  const auto rejected = store.append_observations(id, bad.dump());
  CHECK(rejected.status == 422);
  CHECK(json::parse(rejected.body)["path"] == "observations[2]");
  CHECK(json::parse(store.beliefs(id).body)["beliefs"].size() == 11);
}

TEST_CASE("what-if through the store") {
  SessionStore store;
  const auto id = new_session(store);
  REQUIRE(store.append_observations(id, observations_body(16, 20)).status == 200);

  const auto null = json::parse(store.whatif(id, R"({"intervention": "do_nothing", "cut": 16, "horizon": 30})").body);
  for (const auto& row : null["rows"]) CHECK(row["idle"] == row["intervened"]);

  const std::string body = R"({"intervention": "confiscate_passport", "profile": "default", "horizon": 40})";
  const auto first = store.whatif(id, body);
  const auto second = store.whatif(id, body);
  REQUIRE(first.status == 200);
  CHECK(first.headers.at("X-Plotsmith-Cache") == "miss");
  CHECK(second.headers.at("X-Plotsmith-Cache") == "hit");
  CHECK(first.body == second.body);

  const json adhoc{{"intervention", {{"name", "watch"}, {"kind", "blocking"}, {"t0", 18},
                                     {"overrides", {{"phases", {{{"phase", 1}, {"abort_prob", 1}}}}}}}}};
  const auto r = store.whatif(id, adhoc.dump());
  REQUIRE(r.status == 200);
  CHECK(json::parse(r.body)["cut"] == 18);
}

TEST_CASE("scoring through the store") {
  SessionStore store;
  const auto id = new_session(store);
  REQUIRE(store.append_observations(id, observations_body(16, 12)).status == 200);
  const auto r = store.score(id, R"({"u_d": 0.6, "horizon": 40})");
  REQUIRE(r.status == 200);
  const auto report = json::parse(r.body);
  CHECK(report["entries"].size() == 5);
  CHECK(report["entries"][0]["rank"] == 1);
  CHECK(store.score(id, R"({"u_d": 0.6, "horizon": 40})").headers.at("X-Plotsmith-Cache") == "hit");

  const auto some = json::parse(store.score(id, R"({"u_d": 0.6, "horizon": 40, "candidates": ["befriend"]})").body);
  CHECK(some["entries"].size() == 2); // the do-nothing option is added
  CHECK(store.score(id, R"({"horizon": 40})").status == 400);
  CHECK(store.score(id, R"({"u_d": 1.5})").status == 422);
}

TEST_CASE("error envelopes") {
  SessionStore store;
  auto r = store.beliefs("s99");
  CHECK(r.status == 404);
  CHECK(json::parse(r.body)["code"] == "unknown_session");

  r = store.create("{not json");
  CHECK(r.status == 400);
  CHECK(json::parse(r.body)["code"] == "bad_json");

  auto doc = json::parse(read_file(bundled_model_path()));
  doc["factors"]["phase"]["abort_prob"][0] = 1.2;
  r = store.create(json{{"document", doc}}.dump());
  CHECK(r.status == 422);
  const auto body = json::parse(r.body);
  CHECK(body["code"] == "probability_out_of_range");
  CHECK_FALSE(body["details"].empty());

  const auto id = new_session(store);
  r = store.whatif(id, R"({"intervention": "no_such_thing"})");
  CHECK(r.status == 422);
  r = store.whatif(id, R"({"intervention": "befriend", "cut": 16})");
  CHECK(r.status == 422);
  CHECK(json::parse(r.body)["code"] == "not_enough_observations");
}

TEST_CASE("sessions are isolated under concurrency") {
  SessionStore store;
  const int count = 4;
  std::vector<std::string> ids;
  for (int i = 0; i < count; ++i) ids.push_back(new_session(store));

  auto run = [](SessionStore& store, const std::string& id, int i) {
    std::string out = store.append_observations(id, observations_body(100 + i, 15)).body;
    out += store.whatif(id, R"({"intervention": "raid_property", "cut": 12, "horizon": 30})").body;
    out += store.beliefs(id).body;
    return out;
  };
  std::vector<std::string> parallel(count);
  std::vector<std::thread> threads;
  for (int i = 0; i < count; ++i) threads.emplace_back([&, i] { parallel[i] = run(store, ids[i], i); });
  for (auto& t : threads) t.join();

  SessionStore serial_store;
  for (int i = 0; i < count; ++i) {
    const auto id = new_session(serial_store);
    CHECK(run(serial_store, id, i) == parallel[i]);
  }
}

TEST_CASE("snapshot and delete") {
  const auto dir = std::filesystem::temp_directory_path() / "plotsmith_service_test";
  std::filesystem::create_directories(dir);
  SessionStore store(dir.string());
  const auto id = new_session(store);
  REQUIRE(store.append_observations(id, observations_body(5, 3)).status == 200);
  const auto r = store.snapshot(id);
  REQUIRE(r.status == 200);
  const auto snap = json::parse(read_file((dir / (id + ".json")).string()));
  CHECK(snap["observations"].size() == 3);
  CHECK(parse_document(snap["document"]).errors.empty());

  CHECK(store.remove(id).status == 200);
  CHECK(store.remove(id).status == 404);
  CHECK(store.size() == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("http front end") {
  SessionStore store;
  ServeOptions options;
  options.port = 0;
  options.bearer_token = "secret";
  options.cors_origin = "http://localhost:5173";
  HttpService service(store, options);
  REQUIRE(service.start());
  REQUIRE(service.port() > 0);

  httplib::Client client("127.0.0.1", service.port());
  auto health = client.Get("/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["status"] == "ok");

  auto denied = client.Post("/v1/sessions", create_body(), "application/json");
  REQUIRE(denied);
  CHECK(denied->status == 401);
  CHECK(json::parse(denied->body)["code"] == "unauthorized");

  client.set_bearer_token_auth("secret");
  auto created = client.Post("/v1/sessions", create_body(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(created->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  const std::string id = json::parse(created->body)["id"];

  auto appended = client.Post("/v1/sessions/" + id + "/observations", observations_body(16, 16), "application/json");
  REQUIRE(appended);
  CHECK(appended->status == 200);

  const std::string body = R"({"intervention": "confiscate_passport", "horizon": 30})";
  auto miss = client.Post("/v1/sessions/" + id + "/whatif", body, "application/json");
  auto hit = client.Post("/v1/sessions/" + id + "/whatif", body, "application/json");
  REQUIRE(miss);
  REQUIRE(hit);
  CHECK(miss->get_header_value("X-Plotsmith-Cache") == "miss");
  CHECK(hit->get_header_value("X-Plotsmith-Cache") == "hit");
  CHECK(miss->body == hit->body);

  auto beliefs = client.Get("/v1/sessions/" + id + "/beliefs");
  REQUIRE(beliefs);
  CHECK(json::parse(beliefs->body)["beliefs"].size() == 17);

  auto missing = client.Get("/v1/sessions/nope/beliefs");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  auto removed = client.Delete("/v1/sessions/" + id);
  REQUIRE(removed);
  CHECK(removed->status == 200);

  auto preflight = client.Options("/v1/sessions");
  REQUIRE(preflight);
  CHECK(preflight->status == 204);

  service.stop();
}
