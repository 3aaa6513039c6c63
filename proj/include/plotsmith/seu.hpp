#pragma once

#include <span>
#include <string>
#include <vector>

#include "plotsmith/ara.hpp"
#include "plotsmith/outcomes.hpp"

namespace plotsmith {

struct ComponentScore {
  Branch branch = Branch::Unnoticed;
  std::string reaction;
  double weight = 0.0;
  OutcomeDistribution outcomes;
  double score = 0.0;
};

struct SeuEntry {
  std::string intervention;
  InterventionKind kind = InterventionKind::Null;
  int enactment = 2;
  OutcomeDistribution outcomes;
  double score = 0.0;
  int rank = 0; // 1 = best
  std::vector<ComponentScore> components;
};

struct SeuReport {
  double u_d = 0.5;
  int start_t = 0;
  int horizon = 1;
  std::vector<SeuEntry> entries; // best first
};

/// Scores every candidate against an intelligent adversary and sorts them by
/// descending score, keeping candidate order among equal scores. The
/// do-nothing option is inserted first when no candidate is of kind Null.
SeuReport rank_interventions(const AraSetting& setting, std::span<const Intervention> candidates, double u_d);

/// Sorted copy of `entries` with ranks assigned; helper shared with tests.
std::vector<SeuEntry> rank_entries(std::vector<SeuEntry> entries);

/// Columns: intervention,p_success,p_foiled_disabled,p_foiled_free,score,rank.
std::string seu_csv(const SeuReport& report);

/// Canonical JSON text of a report (sorted keys, shortest round-trip numbers).
std::string seu_json(const SeuReport& report);

} // namespace plotsmith
