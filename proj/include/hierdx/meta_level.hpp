#pragma once

// Meta level: lookahead cost estimates for both causal pathways and the
// decision between them.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hierdx/bridge_engine.hpp"
#include "hierdx/functional_engine.hpp"
#include "hierdx/influence_diagram.hpp"
#include "hierdx/knowledge_base.hpp"
#include "hierdx/transcript.hpp"

namespace hierdx {

struct Horizon {
  std::optional<std::string> failed_node;
  std::string parent;               // context parent for a restarted run
  std::vector<std::string> nodes;   // horizon nodes
  std::size_t d = 0;                // height of the hierarchy
  std::size_t d_max = 0;            // max height below a horizon node

  bool operator==(const Horizon&) const = default;
};

// Horizon before any functional run: the faulted subsystem itself.
Horizon initial_horizon(const KnowledgeBase& kb, const std::string& faulted_subsystem);

// Prunes `failed` (and, while it leaves no live sibling, its ancestors) and
// returns the surviving siblings. Pruned components are exonerated in
// `evidence`. Throws Exhausted once pruning climbs past `scope_root`.
Horizon functional_lookahead_horizon(const KnowledgeBase& kb, const std::string& scope_root,
                                     const std::string& failed, FunctionalEvidence& evidence,
                                     std::set<std::string>& pruned);

// Average number of children per subsystem.
double branching_factor(const KnowledgeBase& kb);

// Variable/factor skeleton of a functional model over `elements`.
FactorGraph functional_template(const KnowledgeBase& kb, const std::vector<std::string>& elements);

// id_1..id_levels: op estimates after each synthetic growth step of ID_0.
std::vector<std::uint64_t> expected_id_sequence(const FactorGraph& id0, double b_avg,
                                                std::size_t levels);
// The graph after `levels` growth steps.
FactorGraph grow_template(const FactorGraph& id0, double b_avg, std::size_t levels);

// X1 = sum_j (d_max + 1 - j) / (d_max + 1) * ids[j]. Throws LengthMismatch
// unless ids has d_max + 1 entries.
double compute_X1(const std::vector<double>& ids, std::size_t d, std::size_t d_max);

struct X2Result {
  double X2 = 0.0;
  std::vector<double> level_costs;
};
X2Result compute_X2(const KnowledgeBase& kb, const Horizon& horizon);

struct YResult {
  double Y1 = 0.0;
  double Y2 = 0.0;
  bool no_bridge_candidates = false;
};
YResult compute_Y(const std::vector<ChipCandidate>& candidates);
YResult compute_Y(const KnowledgeBase& kb);

struct LookaheadEstimate {
  double X1 = 0.0;
  double X2 = 0.0;
  double Y1 = 0.0;
  double Y2 = 0.0;
  std::vector<double> level_costs;
  std::vector<std::uint64_t> ids;
  double b_avg = 0.0;
  std::size_t d = 0;
  std::size_t d_max = 0;
  bool no_bridge_candidates = false;
};

LookaheadEstimate estimate_lookahead(const KnowledgeBase& kb, const Horizon& horizon,
                                     const std::vector<ChipCandidate>& candidates);

// M in {FL, BFL}, I in {FL, BFL} with P(I = FL) = p_fl. fl_cost = X1 u + X2,
// bridge_cost = Y1 u + Y2.
InfluenceDiagram build_meta_id(double fl_cost, double bridge_cost, double p_fl);

struct MetaChoice {
  Pathway chosen = Pathway::Functional;
  double ev_fl = 0.0;
  double ev_bfl = 0.0;
};
MetaChoice choose_pathway(double fl_cost, double bridge_cost, double p_fl);
MetaChoice choose_pathway(const LookaheadEstimate& est, double u, double p_fl);

nlohmann::ordered_json estimate_to_json(const LookaheadEstimate& est, double u,
                                        const MetaChoice& choice);

}  // namespace hierdx
