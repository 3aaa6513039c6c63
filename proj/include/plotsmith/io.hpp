#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "plotsmith/ara.hpp"
#include "plotsmith/filter.hpp"
#include "plotsmith/validate.hpp"

namespace plotsmith {

/// A model file: the plot model plus its intervention catalogue, the
/// adversary's reaction catalogue and the adversary profiles.
///
/// Indices in the document (phases, tasks, stages) are 1-based; phase 0 is
/// the inactive state. Any scalar or table may be given either plainly or as
/// {"value": v, "overrides": [{"from": a, "to": b, "value": w}]} where `to`
/// may be omitted for an open-ended window.
struct ModelDocument {
  int version = 1;
  std::string time_step;
  PlotModel model;
  std::vector<Intervention> interventions;
  std::vector<Reaction> reactions; // order breaks ties between equally good reactions
  std::vector<AdversaryProfile> profiles;

  const Intervention* find_intervention(std::string_view name) const;
  const AdversaryProfile* find_profile(std::string_view name) const;
};

struct ParseResult {
  std::optional<ModelDocument> document; // set iff errors is empty
  std::vector<Issue> errors;
  std::vector<Issue> warnings;
};

/// Syntax check, schema check (unknown keys, types, shapes) and then model,
/// catalogue and profile validation. Syntax errors carry `line N` in the path.
ParseResult parse_document(std::string_view text);
ParseResult parse_document(const nlohmann::json& doc);

/// parse_document that throws Error (code of the first error) on failure.
ModelDocument parse_document_or_throw(std::string_view text);

/// Reads one intervention object against a parsed document's model, with
/// the same schema and payload checks as the catalogue. Throws Error.
Intervention intervention_from_json(const nlohmann::json& j, const ModelDocument& doc);
nlohmann::json intervention_to_json(const Intervention& d, const PlotModel& model);

/// Reads a file; Error("io_error") if it cannot be opened.
std::string read_file(const std::string& path);
ModelDocument load_document(const std::string& path);

nlohmann::json document_to_json(const ModelDocument& doc);

/// Canonical text: sorted keys, two-space indent, shortest round-trip
/// numbers, trailing newline.
std::string serialize_document(const ModelDocument& doc);

/// One message per line: `<code> <path>: <message>`.
std::string format_issues(std::span<const Issue> issues);

/// Columns t,w,theta_1..theta_n,z_1..z_n.
std::string trajectory_csv(const Trajectory& trajectory);

/// Reads the z_1..z_n columns (by header name) of an observations or
/// trajectory CSV. Rows must be ordered by t starting at 1 when a t column
/// is present.
std::vector<Observation> read_observations(std::string_view text, int n);

/// Columns t,time_label,phase_label,probability; one block per belief.
std::string marginals_csv(const PlotModel& model, std::span<const BeliefState> beliefs);

} // namespace plotsmith
