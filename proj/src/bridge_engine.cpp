#include "hierdx/bridge_engine.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "hierdx/error.hpp"

namespace hierdx {

namespace {

ChipCandidate make_candidate(const KnowledgeBase& kb, const Chip& chip) {
  ChipCandidate c;
  c.chip = chip.id;
  c.effort = kb.cost_model().chip_inspect_effort;
  for (std::size_t i = 0; i + 1 < chip.pins.size(); ++i) {
    const double p = i < chip.bridge_priors.size() ? chip.bridge_priors[i] : 0.0;
    c.pairs.push_back({chip.pins[i].number, chip.pins[i + 1].number, chip.pins[i].net,
                       chip.pins[i + 1].net, p});
  }
  return c;
}

double chip_mass(const std::vector<BridgePair>& pairs) {
  double clear = 1.0;
  for (const auto& p : pairs) clear *= 1.0 - p.prior;
  return 1.0 - clear;
}

}  // namespace

std::vector<ChipCandidate> candidate_chips(const KnowledgeBase& kb) {
  if (kb.chips().empty()) throw Error(ErrorCode::NoChips, "knowledge base declares no chips");
  return filtered_candidates(kb, {}, {});
}

std::vector<ChipCandidate> filtered_candidates(const KnowledgeBase& kb,
                                               const std::vector<std::string>& not_ok_nets,
                                               const std::set<std::string>& excluded) {
  std::vector<std::set<std::string>> regions;
  for (const auto& n : not_ok_nets) regions.push_back(kb.fanin_nets(n));
  std::vector<ChipCandidate> out;
  for (const auto& chip : kb.chips()) {
    if (excluded.count(chip.id)) continue;
    auto c = make_candidate(kb, chip);
    std::erase_if(c.pairs, [&](const BridgePair& p) {
      return std::any_of(regions.begin(), regions.end(), [&](const auto& r) {
        return !r.count(p.net_a) && !r.count(p.net_b);
      });
    });
    if (c.pairs.empty()) continue;
    c.mass = chip_mass(c.pairs);
    out.push_back(std::move(c));
  }
  renormalize(out);
  return out;
}

void renormalize(std::vector<ChipCandidate>& candidates) {
  if (candidates.empty()) return;
  double none = 1.0;
  for (const auto& c : candidates) none *= 1.0 - c.mass;
  double total = none;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double w = candidates[i].mass;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (j != i) w *= 1.0 - candidates[j].mass;
    }
    candidates[i].posterior = w;
    total += w;
  }
  for (auto& c : candidates) c.posterior = total > 0 ? c.posterior / total : 0.0;
}

double no_bridge_posterior(const std::vector<ChipCandidate>& candidates) {
  double s = 0.0;
  for (const auto& c : candidates) s += c.posterior;
  return std::max(0.0, 1.0 - s);
}

std::vector<std::size_t> ratio_order(const std::vector<ChipCandidate>& candidates) {
  auto ratio = [](const ChipCandidate& c) {
    if (c.effort > 0) return c.posterior / c.effort;
    return c.posterior > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  };
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ratio(candidates[a]) > ratio(candidates[b]);
  });
  return order;
}

InfluenceDiagram build_bridge_id(const std::vector<ChipCandidate>& candidates) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyAlternatives, "no chip to inspect");
  const auto n = candidates.size();
  std::vector<std::string> chips;
  std::vector<double> prior;
  for (const auto& c : candidates) {
    chips.push_back(c.chip);
    prior.push_back(c.posterior);
  }
  auto states = chips;
  states.push_back("none");
  prior.push_back(no_bridge_posterior(candidates));

  const auto base = ratio_order(candidates);
  std::vector<double> costs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> seq{i};
    for (auto k : base) {
      if (k != i) seq.push_back(k);
    }
    std::vector<double> found_at(n, 0.0);
    double spent = 0.0;
    for (auto k : seq) {
      spent += candidates[k].effort;
      found_at[k] = spent;
    }
    for (std::size_t j = 0; j < n; ++j) costs.push_back(found_at[j]);
    costs.push_back(spent);
  }

  InfluenceDiagram d;
  d.add_decision("Inspect", chips, {});
  d.add_chance("BridgeAt", states, {}, {prior});
  d.add_value("V", {"Inspect", "BridgeAt"}, std::move(costs));
  d.set_decision_order({"Inspect"});
  return d;
}

std::uint64_t bridge_id_ops(std::size_t candidate_count) {
  FactorGraph g;
  const auto inspect = g.add_variable("Inspect", candidate_count);
  const auto at = g.add_variable("BridgeAt", candidate_count + 1);
  g.factors = {{inspect}, {at}, {inspect, at}};
  return estimate_eval_ops(g);
}

std::size_t recommend_chip(const std::vector<ChipCandidate>& candidates) {
  const auto d = build_bridge_id(candidates);
  const auto sol = evaluate(d);
  const auto& chosen = sol.policy.choose(d, "Inspect", {});
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].chip == chosen) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "recommended chip not among candidates");
}

std::vector<std::size_t> engine_order(std::vector<ChipCandidate> candidates) {
  std::vector<std::size_t> ids(candidates.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<std::size_t> order;
  while (!candidates.empty()) {
    const auto k = recommend_chip(candidates);
    order.push_back(ids[k]);
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(k));
    ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(k));
    renormalize(candidates);
  }
  return order;
}

double expected_search_effort(const std::vector<ChipCandidate>& candidates,
                              const std::vector<std::size_t>& order) {
  double spent = 0.0;
  double expected = 0.0;
  for (auto k : order) {
    spent += candidates[k].effort;
    expected += candidates[k].posterior * spent;
  }
  return expected + no_bridge_posterior(candidates) * spent;
}

StepOutcome run_bridge_component(EngineIo& io, BridgeState& state,
                                 const std::vector<std::string>& not_ok_nets,
                                 const BridgeOptions& options) {
  const auto& kb = io.kb;
  static const std::vector<std::string> kNoFilter;
  for (;;) {
    const auto candidates = filtered_candidates(
        kb, options.functional_info_filter ? not_ok_nets : kNoFilter, state.inspected);
    if (candidates.empty()) return {StepOutcome::Kind::Failed, {}, state.last_chip};

    const auto k = recommend_chip(candidates);
    const auto& cand = candidates[k];
    nlohmann::ordered_json listed = nlohmann::ordered_json::array();
    for (const auto& c : candidates) {
      listed.push_back({{"chip", c.chip}, {"posterior", c.posterior}, {"effort", c.effort}});
    }
    io.transcript.model_built({{"model", "bridge"},
                               {"candidates", listed},
                               {"no_bridge", no_bridge_posterior(candidates)},
                               {"inspect", cand.chip}});

    const auto& chip = kb.chip(cand.chip);
    const auto found = io.oracle.inspect_chip(chip, cand.effort);
    io.transcript.chip_inspected(chip.id, found.found, cand.effort);
    state.inspected.insert(chip.id);
    state.last_chip = chip.id;
    ++state.inspections;
    if (!found.found) continue;

    Treatment t{TreatmentKind::RemoveBridge, chip.id, found.pin_a, found.pin_b,
                kb.cost_model().bridge_repair_cost};
    if (found.pin_a == 0 && found.pin_b == 0) {
      const auto best = std::max_element(
          cand.pairs.begin(), cand.pairs.end(),
          [](const BridgePair& a, const BridgePair& b) { return a.prior < b.prior; });
      t.pin_a = best->pin_a;
      t.pin_b = best->pin_b;
    }
    io.oracle.apply(t);
    io.transcript.treatment(t);
    if (io.oracle.device_ok()) return {StepOutcome::Kind::Resolved, {}, ""};
  }
}

}  // namespace hierdx
