#pragma once

// Bridge-fault causal pathway: which chip to inspect next.

#include <set>
#include <string>
#include <vector>

#include "hierdx/functional_engine.hpp"
#include "hierdx/influence_diagram.hpp"
#include "hierdx/knowledge_base.hpp"

namespace hierdx {

struct BridgePair {
  int pin_a = 0;
  int pin_b = 0;
  std::string net_a;
  std::string net_b;
  double prior = 0.0;
};

struct ChipCandidate {
  std::string chip;
  std::vector<BridgePair> pairs;
  double mass = 0.0;       // 1 - prod(1 - pair prior)
  double posterior = 0.0;  // with a residual "no bridge" outcome
  double effort = 0.0;
};

// Throws NoChips when the KB declares none.
std::vector<ChipCandidate> candidate_chips(const KnowledgeBase& kb);

// Candidates restricted to pairs touching the golden fan-in of every net in
// `not_ok_nets`; chips left without pairs are dropped. Chips in `excluded`
// are dropped too. Returns an empty list rather than throwing.
std::vector<ChipCandidate> filtered_candidates(const KnowledgeBase& kb,
                                               const std::vector<std::string>& not_ok_nets,
                                               const std::set<std::string>& excluded);

// Recomputes posteriors from masses: w_i = m_i prod_{j != i}(1 - m_j), with
// "no bridge" = prod_j (1 - m_j), normalized.
void renormalize(std::vector<ChipCandidate>& candidates);
double no_bridge_posterior(const std::vector<ChipCandidate>& candidates);

// Indices by nonincreasing posterior/effort; ties keep declared order.
std::vector<std::size_t> ratio_order(const std::vector<ChipCandidate>& candidates);

// Decision Inspect over candidates, chance BridgeAt over candidates plus
// "none". Value: search effort spent until the bridge is found when the
// chosen chip goes first and the rest follow in ratio order.
InfluenceDiagram build_bridge_id(const std::vector<ChipCandidate>& candidates);

std::uint64_t bridge_id_ops(std::size_t candidate_count);

// Index of the chip the model recommends.
std::size_t recommend_chip(const std::vector<ChipCandidate>& candidates);

// Order in which the engine inspects chips if none holds the bridge.
std::vector<std::size_t> engine_order(std::vector<ChipCandidate> candidates);

// Sum over chips of P(bridge there) x cumulative effort through its position,
// plus P(no bridge) x total effort.
double expected_search_effort(const std::vector<ChipCandidate>& candidates,
                              const std::vector<std::size_t>& order);

struct BridgeState {
  std::set<std::string> inspected;
  std::size_t inspections = 0;
  std::string last_chip;
};

struct BridgeOptions {
  bool functional_info_filter = true;
};

// Resolved or Failed.
StepOutcome run_bridge_component(EngineIo& io, BridgeState& state,
                                 const std::vector<std::string>& not_ok_nets,
                                 const BridgeOptions& options = {});

}  // namespace hierdx
