#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plotsmith/causal.hpp"
#include "plotsmith/outcomes.hpp"

namespace plotsmith {

/// A counter-move available to the adversary, expressed in the same payload
/// vocabulary as an intervention and in base-model phase indices.
struct Reaction {
  std::string id;
  std::string description;
  FactorOverrides overrides;
  bool operator==(const Reaction&) const = default;
};

/// Per-time discovery probability for the doubled model.
using DiscoveryProb = Timed<double>;

/// A model whose active phases are split into an unaware layer (1..m) and an
/// aware layer (m+1..2m); phase i and i+m are the same base phase.
struct DoubledModel {
  PlotModel model;
  int base_m = 0;

  Phase base_phase(Phase p) const { return p > base_m ? p - base_m : p; }
  bool aware(Phase p) const { return p > base_m; }
};

/// Doubles the phase layer. Unaware phase i keeps its edges and gains the
/// cross edge i -> i+m; the aware layer mirrors the base graph offset by m.
/// Discovery pre-empts the move: from unaware phase i the agent aborts with
/// the usual q', otherwise is discovered with probability pi and otherwise
/// follows the base law. Task and intensity factors are shared by both layers.
/// `aware_overrides` use doubled indices and apply on `aware_window`; naming
/// an unaware phase raises Error("override_unaware_layer").
DoubledModel double_model(const PlotModel& model, const DiscoveryProb& pi, const FactorOverrides& aware_overrides = {},
                          Window aware_window = {});

/// Shifts the phase references of a base-indexed payload onto the aware
/// layer. Unphased entries are made explicit for every aware phase.
FactorOverrides to_aware_layer(const FactorOverrides& overrides, int base_m);

/// Embeds a base-model belief into the unaware layer of a doubled model.
BeliefState lift_belief(const BeliefState& belief, const DoubledModel& doubled);

/// Sums the two copies of every base phase.
std::vector<double> fold_marginal(std::span<const double> doubled_marginal, int base_m);

/// Utilities of success, abort-and-escape and disablement.
struct UtilityTriple {
  double success = 1.0;
  double free = 0.0;
  double disabled = 0.0;

  static UtilityTriple adversary(double u_a) { return {1.0, u_a, 0.0}; }
  double expect(const OutcomeDistribution& o) const {
    return success * o.p_success + free * o.p_foiled_free + disabled * o.p_foiled_disabled;
  }
};

/// The adversary's expected utility of playing `reaction` from `from` on.
/// Throws Error("bad_horizon") if the horizon precedes the belief.
double adversary_seu(const PlotModel& model, const Reaction& reaction, Window from, const BeliefState& start,
                     int horizon, const UtilityTriple& utility, std::span<const DisableEvent> disables = {});

struct UtilityScenario {
  double u_a = 0.0;
  double weight = 1.0;
  bool operator==(const UtilityScenario&) const = default;
};

/// One possible capability set with its prior weight.
struct CapabilityRealization {
  double weight = 1.0;
  std::vector<std::string> reactions;
  bool operator==(const CapabilityRealization&) const = default;
};

/// Profile-level replacement for an intervention's discovery parameters.
struct DiscoverySetting {
  std::optional<double> betrayal_prob;
  double local_discovery_prob = 1.0;
  bool operator==(const DiscoverySetting&) const = default;
};

/// The defender's model of the adversary.
struct AdversaryProfile {
  std::string name;
  std::vector<UtilityScenario> scenarios;
  std::map<InterventionKind, std::vector<CapabilityRealization>> capability; // missing kind: whole catalogue
  std::map<std::string, DiscoverySetting> discovery;                         // keyed by intervention name
  double epsilon = 0.0;                                                      // trembling hand
  bool operator==(const AdversaryProfile&) const = default;
};

std::vector<Issue> check_profile(const AdversaryProfile& profile, std::span<const Reaction> catalogue,
                                 const std::string& path);

/// Whether and how the adversary learns of an intervention.
enum class Branch { Unnoticed, Local, Discovered };
const char* to_string(Branch branch);

/// Trembling-hand choice over `scores`: 1 - epsilon on the first maximiser
/// (within 1e-12), epsilon spread evenly over the rest.
std::vector<double> tremble(std::span<const double> scores, double epsilon);

/// Index into `scores` of the first maximiser within 1e-12.
std::size_t argmax_first(std::span<const double> scores);

/// Everything the scoring of one intervention needs, fixed once.
struct AraSetting {
  const PlotModel* model = nullptr;
  std::span<const Reaction> catalogue;
  const AdversaryProfile* profile = nullptr;
  const BeliefState* start = nullptr;
  int horizon = 1;
};

/// One term of the defender's predictive mixture.
struct MixtureComponent {
  double weight = 0.0;
  Branch branch = Branch::Unnoticed;
  std::string reaction; // empty on the unnoticed branch
  PlotModel model;      // doubled on the discovered branch
  int base_m = 0;       // model.m() != base_m iff doubled
  std::vector<DisableEvent> disables;
  OutcomeDistribution outcomes; // from the setting's start belief to its horizon

  bool doubled() const { return model.m() != base_m; }
};

struct IntelligentMixture {
  int enactment = 2; // effective t0, never before the step after the belief
  std::vector<MixtureComponent> components;

  OutcomeDistribution outcomes() const;
};

/// First step the intervention can act on given the start belief.
int enactment_time(const Intervention& d, const BeliefState& start);

/// The argmax reaction (catalogue order breaks ties) for one utility value
/// and capability set, on the given branch.
std::string best_response(const AraSetting& setting, const Intervention& d, Branch branch, double u_a,
                          std::span<const std::string> available);

/// Marginal over the catalogue of the reaction A plays, given that A notices
/// the intervention (local or plot discovery). Empty when A cannot notice it.
std::vector<std::pair<std::string, double>> reaction_distribution(const AraSetting& setting, const Intervention& d);

/// The defender's predictive mixture for intervention `d` against an
/// intelligent adversary. Components with equal (branch, reaction) are merged
/// and zero-weight ones dropped; weights sum to 1.
IntelligentMixture apply_intelligent(const AraSetting& setting, const Intervention& d);

} // namespace plotsmith
