// Command-line front end: validate, simulate, filter, whatif, score, serve.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "plotsmith/error.hpp"
#include "plotsmith/io.hpp"
#include "plotsmith/seu.hpp"
#include "plotsmith/service.hpp"
#include "plotsmith/simulate.hpp"
#include "plotsmith/whatif.hpp"

using namespace plotsmith;

namespace {

const Intervention& named_intervention(const ModelDocument& doc, const std::string& name) {
  const auto* d = doc.find_intervention(name);
  if (!d) throw Error("unknown_intervention", "no intervention named '" + name + "'");
  return *d;
}

const AdversaryProfile* named_profile(const ModelDocument& doc, const std::string& name) {
  if (name.empty()) return nullptr;
  const auto* p = doc.find_profile(name);
  if (!p) throw Error("unknown_profile", "no adversary profile named '" + name + "'");
  return p;
}

// Moves the intervention window to start at t0, keeping its length.
Intervention shifted(Intervention d, int t0) {
  if (d.t1) *d.t1 += t0 - d.t0;
  d.t0 = t0;
  return d;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot write '" + path + "'");
  out << text;
}

int cmd_validate(const std::string& path) {
  const auto text = read_file(path);
  auto parsed = parse_document(std::string_view(text));
  std::cout << format_issues(parsed.warnings);
  if (!parsed.document) {
    std::cout << format_issues(parsed.errors);
    std::cout << "invalid: " << parsed.errors.size() << " error(s)\n";
    return 1;
  }
  const auto& model = parsed.document->model;
  std::cout << "ok: " << model.name << " m=" << model.m() << " n=" << model.n() << " horizon=" << model.horizon
            << " states=" << StateSpace(model.m(), model.n()).size() << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"plotsmith: phase models of plots, what-if analysis and intervention scoring"};
  app.require_subcommand(1);

  std::string model_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a model document");
  validate_cmd->add_option("model", model_path, "Model document")->required();

  int steps = 0;
  std::uint64_t seed = 0;
  std::string intervene;
  int at = 0;
  auto* simulate_cmd = app.add_subcommand("simulate", "Sample a trajectory as CSV");
  simulate_cmd->add_option("model", model_path, "Model document")->required();
  simulate_cmd->add_option("--steps", steps, "Number of time steps")->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", seed, "RNG seed")->required();
  simulate_cmd->add_option("--intervene", intervene, "Catalogue intervention to apply (unintelligent adversary)");
  simulate_cmd->add_option("--at", at, "Enactment time, default the catalogue's t0")->needs("--intervene");

  std::string observations_path;
  auto* filter_cmd = app.add_subcommand("filter", "Filtered phase marginals as CSV");
  filter_cmd->add_option("model", model_path, "Model document")->required();
  filter_cmd->add_option("--observations", observations_path, "Observations CSV")->required();

  int cut = 0;
  int horizon = 0;
  std::string profile;
  std::string out_prefix;
  auto* whatif_cmd = app.add_subcommand("whatif", "Idle versus intervened predictions");
  whatif_cmd->add_option("model", model_path, "Model document")->required();
  whatif_cmd->add_option("--observations", observations_path, "Observations CSV")->required();
  whatif_cmd->add_option("--cut", cut, "Enactment time t0")->required();
  whatif_cmd->add_option("--intervene", intervene, "Catalogue intervention")->required();
  whatif_cmd->add_option("--profile", profile, "Adversary profile; omitted means an unintelligent adversary");
  whatif_cmd->add_option("--horizon", horizon, "Last predicted time, default the model horizon");
  whatif_cmd->add_option("--out-prefix", out_prefix,
                         "Write <prefix>idle.csv, <prefix>intervened.csv and <prefix>diff.csv; otherwise the diff "
                         "CSV goes to stdout");

  std::string candidates;
  double u_d = 0.0;
  std::string format = "json";
  auto* score_cmd = app.add_subcommand("score", "Rank interventions by defender expected utility");
  score_cmd->add_option("model", model_path, "Model document")->required();
  score_cmd->add_option("--candidates", candidates, "Comma-separated catalogue names, default all");
  score_cmd->add_option("--u-d", u_d, "Defender utility of a free-but-foiled outcome, in (0,1)")->required();
  score_cmd->add_option("--horizon", horizon, "Last time step, default the model horizon");
  score_cmd->add_option("--profile", profile, "Adversary profile, default the first one");
  score_cmd->add_option("--observations", observations_path, "Score from the belief after these observations");
  score_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  ServeOptions serve_options;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP API");
  serve_cmd->add_option("--port", serve_options.port, "Port");
  serve_cmd->add_option("--host", serve_options.host, "Bind address");
  serve_cmd->add_option("--token", serve_options.bearer_token, "Require this bearer token");
  serve_cmd->add_option("--cors-origin", serve_options.cors_origin, "Access-Control-Allow-Origin value");
  serve_cmd->add_option("--snapshot-dir", serve_options.snapshot_dir, "Directory for session snapshots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*validate_cmd) return cmd_validate(model_path);

    if (*serve_cmd) {
      SessionStore store(serve_options.snapshot_dir);
      std::cerr << "listening on " << serve_options.host << ":" << serve_options.port << "\n";
      if (!serve(store, serve_options)) throw Error("bind_failed", "cannot listen on port " + std::to_string(serve_options.port));
      return 0;
    }

    const auto doc = load_document(model_path);
    const auto& model = doc.model;
    const auto observations = observations_path.empty()
                                  ? std::vector<Observation>{}
                                  : read_observations(read_file(observations_path), model.n());

    if (*simulate_cmd) {
      if (intervene.empty()) {
        std::cout << trajectory_csv(sample_trajectory(model, steps, seed));
      } else {
        auto d = named_intervention(doc, intervene);
        if (at > 0) d = shifted(d, at);
        for (const auto& issue : check_intervention(model, d, "intervene")) throw Error(issue.code, issue.message);
        const auto intervened = apply_unintelligent(model, d);
        const auto disables = disable_events(d);
        std::cout << trajectory_csv(sample_trajectory(intervened, steps, seed, disables));
      }
      return 0;
    }

    if (*filter_cmd) {
      const auto beliefs = filter_series(model, observations);
      std::cout << marginals_csv(model, beliefs);
      return 0;
    }

    if (*whatif_cmd) {
      const auto d = shifted(named_intervention(doc, intervene), cut);
      WhatIfRequest req;
      req.model = &model;
      req.observations = observations;
      req.intervention = &d;
      req.cut = cut;
      req.horizon = horizon > 0 ? horizon : model.horizon;
      req.catalogue = doc.reactions;
      req.profile = named_profile(doc, profile);
      const auto result = whatif(req);
      if (out_prefix.empty()) {
        std::cout << whatif_diff_csv(result);
      } else {
        write_file(out_prefix + "idle.csv", whatif_csv(result, false));
        write_file(out_prefix + "intervened.csv", whatif_csv(result, true));
        write_file(out_prefix + "diff.csv", whatif_diff_csv(result));
      }
      return 0;
    }

    if (*score_cmd) {
      std::vector<Intervention> list;
      const auto beliefs = filter_series(model, observations);
      if (candidates.empty()) {
        for (const auto& d : doc.interventions) {
          if (!d.t1 || *d.t1 >= enactment_time(d, beliefs.back())) list.push_back(d);
        }
      } else {
        std::stringstream ss(candidates);
        for (std::string name; std::getline(ss, name, ',');) {
          if (!name.empty()) list.push_back(named_intervention(doc, name));
        }
      }
      const AdversaryProfile* p = named_profile(doc, profile);
      if (!p) {
        if (doc.profiles.empty()) throw Error("unknown_profile", "the model defines no adversary profile");
        p = &doc.profiles.front();
      }
      AraSetting setting{&model, doc.reactions, p, &beliefs.back(), horizon > 0 ? horizon : model.horizon};
      const auto report = rank_interventions(setting, list, u_d);
      std::cout << (format == "csv" ? seu_csv(report) : seu_json(report));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal_error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
