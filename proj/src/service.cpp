#include "plotsmith/service.hpp"

#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"

#include "plotsmith/error.hpp"
#include "plotsmith/rng.hpp"
#include "plotsmith/seu.hpp"
#include "plotsmith/whatif.hpp"

namespace plotsmith {

using nlohmann::json;

struct SessionStore::Session {
  std::mutex mutex;
  std::string id;
  ModelDocument doc;
  std::vector<Observation> observations;
  std::vector<BeliefState> beliefs;
  std::map<std::string, std::string> whatif_cache;
  std::map<std::string, std::string> score_cache;
};

namespace {

Response json_response(int status, const json& body) { return {status, body.dump(2) + "\n", {}}; }

int status_for(const std::string& code) {
  if (code == "unknown_session") return 404;
  if (code == "bad_json" || code == "wrong_type" || code == "missing_key") return 400;
  return 422;
}

json parse_body(const std::string& body) {
  try {
    return body.empty() ? json::object() : json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error("bad_json", e.what());
  }
}

// Reads an optional member, raising a 400-class error on the wrong type.
template <class T>
std::optional<T> member(const json& body, const char* k) {
  if (!body.is_object()) throw Error("wrong_type", "request body must be a JSON object");
  auto it = body.find(k);
  if (it == body.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error("wrong_type", std::string("'") + k + "' has the wrong type");
  }
}

std::string time_label(const PlotModel& model, int t) {
  const auto i = static_cast<std::size_t>(t - 1);
  return t >= 1 && i < model.time_labels.size() ? model.time_labels[i] : std::string{};
}

std::vector<std::string> phase_labels(const PlotModel& model) {
  std::vector<std::string> out;
  for (Phase j = 0; j <= model.m(); ++j) out.push_back(model.phases.label(j));
  return out;
}

Intervention resolve_intervention(const json& spec, const ModelDocument& doc) {
  if (spec.is_string()) {
    const auto* d = doc.find_intervention(spec.get<std::string>());
    if (!d) throw Error("unknown_intervention", "no intervention named '" + spec.get<std::string>() + "'");
    return *d;
  }
  if (spec.is_object()) return intervention_from_json(spec, doc);
  throw Error("wrong_type", "an intervention is a catalogue name or an intervention object");
}

const AdversaryProfile* resolve_profile(const std::optional<std::string>& name, const ModelDocument& doc) {
  if (!name) return nullptr;
  const auto* p = doc.find_profile(*name);
  if (!p) throw Error("unknown_profile", "no adversary profile named '" + *name + "'");
  return p;
}

template <class F>
Response guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return error_response(status_for(e.code()), e.code(), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal_error", e.what());
  }
}

} // namespace

Response error_response(int status, const std::string& code, const std::string& message, const std::string& path,
                        const std::vector<Issue>& details) {
  json body{{"code", code}, {"message", message}, {"path", path}};
  if (!details.empty()) {
    json list = json::array();
    for (const auto& i : details) list.push_back({{"code", i.code}, {"message", i.message}, {"path", i.path}});
    body["details"] = std::move(list);
  }
  return json_response(status, body);
}

SessionStore::SessionStore(std::string snapshot_dir) : snapshot_dir_(std::move(snapshot_dir)) {}
SessionStore::~SessionStore() = default;

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error("unknown_session", "no session '" + id + "'");
  return it->second;
}

Response SessionStore::health() const {
  return json_response(200, {{"status", "ok"}, {"sessions", size()}, {"rng", CounterRng::kAlgorithm}});
}

Response SessionStore::create(const std::string& body) {
  return guarded([&] {
    const auto request = parse_body(body);
    if (!request.is_object() || !request.contains("document")) {
      return error_response(400, "missing_key", "request needs a 'document' member", "document");
    }
    auto parsed = parse_document(request["document"]);
    if (!parsed.document) {
      const auto& first = parsed.errors.front();
      return error_response(422, first.code, first.message, first.path, parsed.errors);
    }
    auto session = std::make_shared<Session>();
    session->doc = std::move(*parsed.document);
    session->beliefs.push_back(init_belief(session->doc.model));
    {
      std::lock_guard lock(mutex_);
      session->id = "s" + std::to_string(next_id_++);
      sessions_[session->id] = session;
    }
    const auto& model = session->doc.model;
    json interventions = json::array();
    for (const auto& d : session->doc.interventions) interventions.push_back(intervention_to_json(d, model));
    json profiles = json::array();
    for (const auto& p : session->doc.profiles) profiles.push_back(p.name);
    json warnings = json::array();
    for (const auto& w : parsed.warnings) warnings.push_back({{"code", w.code}, {"message", w.message}, {"path", w.path}});
    return json_response(201, {{"id", session->id},
                               {"name", model.name},
                               {"m", model.m()},
                               {"n", model.n()},
                               {"horizon", model.horizon},
                               {"phase_labels", phase_labels(model)},
                               {"time_labels", model.time_labels},
                               {"interventions", interventions},
                               {"profiles", profiles},
                               {"warnings", warnings}});
  });
}

Response SessionStore::append_observations(const std::string& id, const std::string& body) {
  return guarded([&] {
    auto session = find(id);
    const auto request = parse_body(body);
    auto batch = member<std::vector<Observation>>(request, "observations");
    if (!batch) return error_response(400, "missing_key", "request needs 'observations'", "observations");
    std::lock_guard lock(session->mutex);
    const auto& model = session->doc.model;
    Propagator prop(model);
    std::vector<BeliefState> fresh;
    fresh.reserve(batch->size());
    const BeliefState* last = &session->beliefs.back();
    for (std::size_t i = 0; i < batch->size(); ++i) {
      const auto& z = (*batch)[i];
      if (static_cast<int>(z.size()) != model.n()) {
        return error_response(422, "invalid_observation",
                              "expected " + std::to_string(model.n()) + " intensities per observation",
                              "observations[" + std::to_string(i) + "]");
      }
      fresh.push_back(prop.filter_step(*last, z));
      last = &fresh.back();
    }
    // Commit only once the whole batch has filtered.
    session->observations.insert(session->observations.end(), batch->begin(), batch->end());
    json marginals = json::array();
    for (auto& b : fresh) {
      marginals.push_back({{"t", b.t}, {"time_label", time_label(model, b.t)}, {"marginal", phase_marginal(b)}});
      session->beliefs.push_back(std::move(b));
    }
    return json_response(200, {{"t", session->beliefs.back().t},
                               {"log_evidence", session->beliefs.back().log_evidence},
                               {"beliefs", marginals}});
  });
}

Response SessionStore::beliefs(const std::string& id) {
  return guarded([&] {
    auto session = find(id);
    std::lock_guard lock(session->mutex);
    const auto& model = session->doc.model;
    json list = json::array();
    for (const auto& b : session->beliefs) {
      list.push_back({{"t", b.t},
                      {"time_label", time_label(model, b.t)},
                      {"marginal", phase_marginal(b)},
                      {"log_evidence", b.log_evidence}});
    }
    return json_response(200, {{"phase_labels", phase_labels(model)}, {"beliefs", list}});
  });
}

Response SessionStore::whatif(const std::string& id, const std::string& body) {
  return guarded([&] {
    auto session = find(id);
    const auto request = parse_body(body);
    std::lock_guard lock(session->mutex);
    const auto& doc = session->doc;
    if (!request.is_object() || !request.contains("intervention")) {
      return error_response(400, "missing_key", "request needs 'intervention'", "intervention");
    }
    const auto d = resolve_intervention(request["intervention"], doc);
    const auto profile_name = member<std::string>(request, "profile");
    const auto* profile = resolve_profile(profile_name, doc);
    const int cut = member<int>(request, "cut").value_or(d.t0);
    const int horizon = member<int>(request, "horizon").value_or(doc.model.horizon);

    const json key{{"intervention", intervention_to_json(d, doc.model)},
                   {"profile", profile_name ? json(*profile_name) : json(nullptr)},
                   {"cut", cut},
                   {"horizon", horizon}};
    const auto cache_key = key.dump();
    if (auto it = session->whatif_cache.find(cache_key); it != session->whatif_cache.end()) {
      return Response{200, it->second, {{"X-Plotsmith-Cache", "hit"}}};
    }
    WhatIfRequest req;
    req.model = &doc.model;
    req.observations = session->observations;
    req.intervention = &d;
    req.cut = cut;
    req.horizon = horizon;
    req.catalogue = doc.reactions;
    req.profile = profile;
    auto text = whatif_json(plotsmith::whatif(req));
    session->whatif_cache.emplace(cache_key, text);
    return Response{200, std::move(text), {{"X-Plotsmith-Cache", "miss"}}};
  });
}

Response SessionStore::score(const std::string& id, const std::string& body) {
  return guarded([&] {
    auto session = find(id);
    const auto request = parse_body(body);
    std::lock_guard lock(session->mutex);
    const auto& doc = session->doc;
    const auto u_d = member<double>(request, "u_d");
    if (!u_d) return error_response(400, "missing_key", "request needs 'u_d'", "u_d");
    const int horizon = member<int>(request, "horizon").value_or(doc.model.horizon);
    auto profile_name = member<std::string>(request, "profile");
    if (!profile_name) {
      if (doc.profiles.empty()) throw Error("unknown_profile", "the model defines no adversary profile");
      profile_name = doc.profiles.front().name;
    }
    const auto* profile = resolve_profile(profile_name, doc);

    std::vector<Intervention> candidates;
    if (request.contains("candidates") && !request["candidates"].is_null()) {
      if (!request["candidates"].is_array()) throw Error("wrong_type", "'candidates' must be an array");
      for (const auto& c : request["candidates"]) candidates.push_back(resolve_intervention(c, doc));
    } else {
      // By default, every catalogue entry that can still be enacted.
      for (const auto& d : doc.interventions) {
        if (!d.t1 || *d.t1 >= enactment_time(d, session->beliefs.back())) candidates.push_back(d);
      }
    }
    json names = json::array();
    for (const auto& d : candidates) names.push_back(intervention_to_json(d, doc.model));
    const json key{{"candidates", names},
                   {"u_d", *u_d},
                   {"horizon", horizon},
                   {"profile", *profile_name},
                   {"observations", session->observations.size()}};
    const auto cache_key = key.dump();
    if (auto it = session->score_cache.find(cache_key); it != session->score_cache.end()) {
      return Response{200, it->second, {{"X-Plotsmith-Cache", "hit"}}};
    }
    AraSetting setting{&doc.model, doc.reactions, profile, &session->beliefs.back(), horizon};
    auto text = seu_json(rank_interventions(setting, candidates, *u_d));
    session->score_cache.emplace(cache_key, text);
    return Response{200, std::move(text), {{"X-Plotsmith-Cache", "miss"}}};
  });
}

Response SessionStore::snapshot(const std::string& id) {
  return guarded([&] {
    auto session = find(id);
    std::lock_guard lock(session->mutex);
    const json snap{{"document", document_to_json(session->doc)}, {"observations", session->observations}};
    const auto path = std::filesystem::path(snapshot_dir_) / (session->id + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write '" + path.string() + "'");
    out << snap.dump(2) << "\n";
    return json_response(200, {{"id", session->id}, {"path", path.string()}});
  });
}

Response SessionStore::remove(const std::string& id) {
  return guarded([&] {
    std::lock_guard lock(mutex_);
    if (sessions_.erase(id) == 0) throw Error("unknown_session", "no session '" + id + "'");
    return json_response(200, {{"deleted", id}});
  });
}

struct HttpService::Impl {
  SessionStore& store;
  ServeOptions options;
  httplib::Server server;
  std::thread thread;

  Impl(SessionStore& s, ServeOptions o) : store(s), options(std::move(o)) { routes(); }

  static void reply(httplib::Response& res, const Response& r) {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, "application/json");
  }

  void routes() {
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", options.cors_origin);
      if (req.method == "OPTIONS" || options.bearer_token.empty() || req.path == "/v1/health") {
        return httplib::Server::HandlerResponse::Unhandled;
      }
      if (req.get_header_value("Authorization") != "Bearer " + options.bearer_token) {
        reply(res, error_response(401, "unauthorized", "missing or invalid bearer token"));
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
      res.status = 204;
    });
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) { reply(res, store.health()); });
    server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, store.create(req.body));
    });
    server.Post(R"(/v1/sessions/([^/]+)/observations)", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, store.append_observations(req.matches[1], req.body));
    });
    server.Get(R"(/v1/sessions/([^/]+)/beliefs)", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, store.beliefs(req.matches[1]));
    });
    server.Post(R"(/v1/sessions/([^/]+)/whatif)", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, store.whatif(req.matches[1], req.body));
    });
    server.Post(R"(/v1/sessions/([^/]+)/score)", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, store.score(req.matches[1], req.body));
    });
    server.Post(R"(/v1/sessions/([^/]+)/snapshot)", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, store.snapshot(req.matches[1]));
    });
    server.Delete(R"(/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, store.remove(req.matches[1]));
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        Response r = error_response(res.status, res.status == 404 ? "not_found" : "http_error", "no such endpoint");
        res.set_content(r.body, "application/json");
      }
    });
  }
};

HttpService::HttpService(SessionStore& store, ServeOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

HttpService::~HttpService() { stop(); }

bool HttpService::start() {
  auto& o = impl_->options;
  if (o.port == 0) {
    port_ = impl_->server.bind_to_any_port(o.host);
  } else {
    port_ = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  if (port_ <= 0) return false;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return true;
}

void HttpService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpService::wait() {
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

bool serve(SessionStore& store, const ServeOptions& options) {
  HttpService service(store, options);
  if (!service.start()) return false;
  service.wait();
  return true;
}

} // namespace plotsmith
