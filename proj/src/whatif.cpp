#include "plotsmith/whatif.hpp"

#include "json.hpp"

#include "plotsmith/csv.hpp"
#include "plotsmith/error.hpp"

namespace plotsmith {

std::vector<std::vector<double>> mixture_marginals(const IntelligentMixture& mixture, const BeliefState& start,
                                                   int horizon) {
  const int base_m = start.space.active_phases();
  const int te = mixture.enactment;
  std::vector<std::vector<double>> out(static_cast<std::size_t>(std::max(0, horizon - te + 2)),
                                       std::vector<double>(static_cast<std::size_t>(base_m + 1), 0.0));
  for (const auto& c : mixture.components) {
    BeliefState b = start;
    if (c.doubled()) b = lift_belief(start, DoubledModel{c.model, base_m});
    Propagator prop(c.model);
    std::vector<double> weights = b.weights;
    double disabled = 0.0;
    auto record = [&](std::size_t row) {
      auto folded = fold_marginal(phase_marginal(b.space, weights), base_m);
      folded[0] += disabled;
      for (std::size_t j = 0; j < folded.size(); ++j) out[row][j] += c.weight * folded[j];
    };
    auto disable_at = [&](int t) {
      for (const auto& d : c.disables) {
        if (d.time == t) disabled += apply_disable(b.space, weights, d.prob);
      }
    };
    disable_at(te);
    record(0);
    for (int t = te; t <= horizon; ++t) {
      if (t > te) disable_at(t);
      weights = prop.advance(weights, t);
      record(static_cast<std::size_t>(t - te + 1));
    }
  }
  return out;
}

WhatIfResult whatif(const WhatIfRequest& req) {
  const PlotModel& model = *req.model;
  const Intervention& d = *req.intervention;
  if (req.cut < 2) throw Error("bad_time_window", "the cut time must be at least 2");
  if (req.horizon < req.cut) throw Error("bad_horizon", "the horizon precedes the cut time");
  const auto used = static_cast<std::size_t>(req.cut - 1);
  if (req.observations.size() < used) {
    throw Error("not_enough_observations", "cut at t=" + std::to_string(req.cut) + " needs " + std::to_string(used) +
                                               " observations, found " + std::to_string(req.observations.size()));
  }
  const auto beliefs = filter_series(model, req.observations.first(used));
  const BeliefState& start = beliefs.back();

  Intervention shifted = d;
  shifted.t0 = req.cut;
  IntelligentMixture mixture;
  if (req.profile && shifted.kind != InterventionKind::Null) {
    AraSetting setting{&model, req.catalogue, req.profile, &start, req.horizon};
    mixture = apply_intelligent(setting, shifted);
  } else {
    mixture.enactment = req.cut;
    MixtureComponent c;
    c.weight = 1.0;
    c.base_m = model.m();
    c.model = apply_unintelligent(model, shifted);
    c.disables = disable_events(shifted);
    mixture.components.push_back(std::move(c));
  }

  WhatIfResult result;
  result.cut = req.cut;
  result.enactment = mixture.enactment;
  result.horizon = req.horizon;
  for (Phase j = 0; j <= model.m(); ++j) result.phase_labels.push_back(model.phases.label(j));

  const auto cut_marginal = phase_marginal(start);
  const auto idle = predict_forward(model, start, req.horizon - req.cut + 1);
  const auto intervened = mixture_marginals(mixture, start, req.horizon);

  auto add = [&](std::string kind, int t, std::vector<double> a, std::vector<double> b) {
    WhatIfRow row{static_cast<int>(result.rows.size()), std::move(kind), t, std::move(a), std::move(b)};
    result.rows.push_back(std::move(row));
    const auto label_index = static_cast<std::size_t>(t - 1);
    result.time_labels.push_back(t >= 1 && label_index < model.time_labels.size() ? model.time_labels[label_index]
                                                                                  : std::string{});
  };
  add("filtered", req.cut - 1, cut_marginal, cut_marginal);
  // Every component shares the same arrests, so the enactment column is read
  // straight off the cut belief rather than summed over components.
  auto enacted = start.weights;
  double disabled = 0.0;
  for (const auto& e : disable_events(shifted)) {
    if (e.time == req.cut) disabled += apply_disable(start.space, enacted, e.prob);
  }
  auto enact_marginal = phase_marginal(start.space, enacted);
  enact_marginal[0] += disabled;
  add("enact", req.cut, cut_marginal, enact_marginal);
  for (int t = req.cut; t <= req.horizon; ++t) {
    const auto k = static_cast<std::size_t>(t - req.cut + 1);
    add("predicted", t, idle[k], intervened[k]);
  }

  if (req.profile && shifted.kind != InterventionKind::Null) {
    AraSetting setting{&model, req.catalogue, req.profile, &start, req.horizon};
    result.reactions = reaction_distribution(setting, shifted);
  }
  for (auto& c : mixture.components) {
    c.model = PlotModel{};
    result.components.push_back(std::move(c));
  }
  return result;
}

std::string whatif_csv(const WhatIfResult& result, bool intervened) {
  CsvWriter csv({"row", "kind", "t", "phase_label", "probability"});
  for (const auto& row : result.rows) {
    const auto& values = intervened ? row.intervened : row.idle;
    for (std::size_t j = 0; j < values.size(); ++j) {
      csv.row({std::to_string(row.index), row.kind, std::to_string(row.t), result.phase_labels[j],
               format_number(values[j])});
    }
  }
  return csv.str();
}

std::string whatif_diff_csv(const WhatIfResult& result) {
  CsvWriter csv({"row", "kind", "t", "phase_label", "idle", "intervened", "diff"});
  for (const auto& row : result.rows) {
    for (std::size_t j = 0; j < row.idle.size(); ++j) {
      csv.row({std::to_string(row.index), row.kind, std::to_string(row.t), result.phase_labels[j],
               format_number(row.idle[j]), format_number(row.intervened[j]),
               format_number(row.intervened[j] - row.idle[j])});
    }
  }
  return csv.str();
}

std::string whatif_json(const WhatIfResult& result) {
  using nlohmann::json;
  json rows = json::array();
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    const auto& row = result.rows[r];
    std::vector<double> diff;
    for (std::size_t j = 0; j < row.idle.size(); ++j) diff.push_back(row.intervened[j] - row.idle[j]);
    rows.push_back({{"row", row.index},
                    {"kind", row.kind},
                    {"t", row.t},
                    {"time_label", result.time_labels[r]},
                    {"idle", row.idle},
                    {"intervened", row.intervened},
                    {"diff", diff}});
  }
  json reactions = json::array();
  for (const auto& [id, p] : result.reactions) reactions.push_back({{"id", id}, {"probability", p}});
  json components = json::array();
  for (const auto& c : result.components) {
    components.push_back({{"branch", to_string(c.branch)}, {"reaction", c.reaction}, {"weight", c.weight}});
  }
  json doc{{"cut", result.cut},           {"enactment", result.enactment}, {"horizon", result.horizon},
           {"phase_labels", result.phase_labels}, {"rows", std::move(rows)}, {"reactions", std::move(reactions)},
           {"components", std::move(components)}};
  return doc.dump(2) + "\n";
}

} // namespace plotsmith
