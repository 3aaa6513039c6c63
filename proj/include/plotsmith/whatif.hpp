#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plotsmith/ara.hpp"

namespace plotsmith {

/// One chart column. Kinds: "filtered" (the cut belief), "enact" (start of
/// the enactment step, after any arrests; the idle side repeats the filtered
/// column so both charts stay aligned) and "predicted".
struct WhatIfRow {
  int index = 0;
  std::string kind;
  int t = 0;
  std::vector<double> idle;
  std::vector<double> intervened;
};

struct WhatIfResult {
  int cut = 2;
  int enactment = 2;
  int horizon = 2;
  std::vector<std::string> phase_labels;
  std::vector<std::string> time_labels; // per row, empty past the model's labels
  std::vector<WhatIfRow> rows;
  std::vector<std::pair<std::string, double>> reactions;
  std::vector<MixtureComponent> components; // models dropped, outcomes kept
};

struct WhatIfRequest {
  const PlotModel* model = nullptr;
  std::span<const Observation> observations; // at least cut - 1 of them are used
  const Intervention* intervention = nullptr;
  int cut = 2;     // enactment time t0
  int horizon = 2; // last predicted time, absolute
  std::span<const Reaction> catalogue;
  const AdversaryProfile* profile = nullptr; // null: unintelligent adversary
};

/// Idle versus intervened phase predictions from the filtered belief at
/// cut - 1. Disabled mass is shown as inactive. Throws Error for cut < 2,
/// horizon < cut or too few observations.
WhatIfResult whatif(const WhatIfRequest& request);

/// Phase marginals of a mixture: the enactment column then one per step up
/// to `horizon`. Components are weighted and doubled ones folded.
std::vector<std::vector<double>> mixture_marginals(const IntelligentMixture& mixture, const BeliefState& start,
                                                   int horizon);

/// Columns row,kind,t,phase_label,probability for one side.
std::string whatif_csv(const WhatIfResult& result, bool intervened);

/// Columns row,kind,t,phase_label,idle,intervened,diff.
std::string whatif_diff_csv(const WhatIfResult& result);

/// Canonical JSON body served by the what-if endpoint.
std::string whatif_json(const WhatIfResult& result);

} // namespace plotsmith
