#include "plotsmith/seu.hpp"

#include <algorithm>

#include "json.hpp"

#include "plotsmith/csv.hpp"

namespace plotsmith {

std::vector<SeuEntry> rank_entries(std::vector<SeuEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = static_cast<int>(i + 1);
  return entries;
}

SeuReport rank_interventions(const AraSetting& setting, std::span<const Intervention> candidates, double u_d) {
  SeuReport report;
  report.u_d = u_d;
  report.start_t = setting.start->t;
  report.horizon = setting.horizon;
  std::vector<Intervention> all(candidates.begin(), candidates.end());
  const bool has_null =
      std::any_of(all.begin(), all.end(), [](const auto& d) { return d.kind == InterventionKind::Null; });
  if (!has_null) all.insert(all.begin(), null_intervention(std::max(2, belief_slice(*setting.start) + 1)));

  std::vector<SeuEntry> entries;
  for (const auto& d : all) {
    const auto mixture = apply_intelligent(setting, d);
    SeuEntry e;
    e.intervention = d.name;
    e.kind = d.kind;
    e.enactment = mixture.enactment;
    e.outcomes = mixture.outcomes();
    e.score = defender_seu(e.outcomes, u_d);
    for (const auto& c : mixture.components) {
      e.components.push_back({c.branch, c.reaction, c.weight, c.outcomes, defender_seu(c.outcomes, u_d)});
    }
    entries.push_back(std::move(e));
  }
  report.entries = rank_entries(std::move(entries));
  return report;
}

std::string seu_csv(const SeuReport& report) {
  CsvWriter csv({"intervention", "p_success", "p_foiled_disabled", "p_foiled_free", "score", "rank"});
  for (const auto& e : report.entries) {
    csv.row({e.intervention, format_number(e.outcomes.p_success), format_number(e.outcomes.p_foiled_disabled),
             format_number(e.outcomes.p_foiled_free), format_number(e.score), std::to_string(e.rank)});
  }
  return csv.str();
}

std::string seu_json(const SeuReport& report) {
  using nlohmann::json;
  auto outcomes = [](const OutcomeDistribution& o) {
    return json{{"p_success", o.p_success}, {"p_foiled_disabled", o.p_foiled_disabled}, {"p_foiled_free", o.p_foiled_free}};
  };
  json entries = json::array();
  for (const auto& e : report.entries) {
    json components = json::array();
    for (const auto& c : e.components) {
      components.push_back({{"branch", to_string(c.branch)},
                            {"reaction", c.reaction},
                            {"weight", c.weight},
                            {"outcomes", outcomes(c.outcomes)},
                            {"score", c.score}});
    }
    entries.push_back({{"intervention", e.intervention},
                       {"kind", to_string(e.kind)},
                       {"enactment", e.enactment},
                       {"outcomes", outcomes(e.outcomes)},
                       {"score", e.score},
                       {"rank", e.rank},
                       {"components", std::move(components)}});
  }
  json doc{{"u_d", report.u_d}, {"start_t", report.start_t}, {"horizon", report.horizon}, {"entries", std::move(entries)}};
  return doc.dump(2) + "\n";
}

} // namespace plotsmith
