#include "hierdx/meta_level.hpp"

#include <algorithm>
#include <cmath>

#include "hierdx/error.hpp"

namespace hierdx {

namespace {

std::size_t max_height(const KnowledgeBase& kb, const std::vector<std::string>& nodes) {
  std::size_t h = 0;
  for (const auto& n : nodes) h = std::max(h, kb.height(n));
  return h;
}

}  // namespace

Horizon initial_horizon(const KnowledgeBase& kb, const std::string& faulted_subsystem) {
  Horizon h;
  h.parent = kb.parent(faulted_subsystem).value_or(faulted_subsystem);
  h.nodes = {faulted_subsystem};
  h.d = kb.tree_height();
  h.d_max = kb.height(faulted_subsystem);
  return h;
}

Horizon functional_lookahead_horizon(const KnowledgeBase& kb, const std::string& scope_root,
                                     const std::string& failed, FunctionalEvidence& evidence,
                                     std::set<std::string>& pruned) {
  auto prune = [&](const std::string& node) {
    for (const auto& n : kb.subtree(node)) {
      pruned.insert(n);
      if (kb.element(n).kind == ElementKind::Component) evidence.exonerated.insert(n);
    }
  };
  std::string cur = failed;
  prune(cur);
  for (;;) {
    if (cur == scope_root || !kb.in_subtree(cur, scope_root)) {
      throw Error(ErrorCode::Exhausted, "no functional candidates remain under '" + scope_root + "'");
    }
    const auto parent = *kb.parent(cur);
    std::vector<std::string> siblings;
    for (const auto& c : kb.element(parent).children) {
      if (!pruned.count(c) && evidence.live_mass(kb, c) > 0) siblings.push_back(c);
    }
    if (!siblings.empty()) {
      Horizon h;
      h.failed_node = failed;
      h.parent = parent;
      h.nodes = std::move(siblings);
      h.d = kb.tree_height();
      h.d_max = max_height(kb, h.nodes);
      return h;
    }
    cur = parent;
    prune(cur);
  }
}

double branching_factor(const KnowledgeBase& kb) {
  std::size_t subsystems = 0;
  std::size_t children = 0;
  for (const auto& e : kb.data().elements) {
    if (e.kind != ElementKind::Subsystem) continue;
    ++subsystems;
    children += e.children.size();
  }
  if (subsystems == 0) return 1.0;
  return std::max(1.0, static_cast<double>(children) / static_cast<double>(subsystems));
}

FactorGraph functional_template(const KnowledgeBase& kb, const std::vector<std::string>& elements) {
  std::size_t testpoints = 0;
  std::size_t subsystems = 0;
  for (const auto& e : elements) {
    if (kb.element(e).output_testpoint) ++testpoints;
    if (kb.element(e).kind == ElementKind::Subsystem) ++subsystems;
  }
  FactorGraph g;
  const auto cs = g.add_variable("CS", std::max<std::size_t>(1, elements.size()));
  const auto test = g.add_variable("Test", std::max<std::size_t>(1, testpoints));
  const auto r = g.add_variable("R", 2);
  const auto treatment = g.add_variable("Treatment", 1 + elements.size() + subsystems);
  const auto ns = g.add_variable("NS", 2);
  g.factors = {{cs},
               {test},
               {r, cs, test},
               {treatment, test, r},
               {ns, cs, treatment},
               {test, treatment, ns}};
  return g;
}

FactorGraph grow_template(const FactorGraph& id0, double b_avg, std::size_t levels) {
  FactorGraph g = id0;
  const auto width = static_cast<std::size_t>(std::ceil(b_avg));
  const auto find = [&](const std::string& name) {
    const auto it = std::find(g.names.begin(), g.names.end(), name);
    if (it == g.names.end()) throw Error(ErrorCode::InvalidArgument, "template lacks " + name);
    return static_cast<std::size_t>(it - g.names.begin());
  };
  const auto r = find("R");
  const auto treatment = find("Treatment");
  auto r_factor = std::find_if(g.factors.begin(), g.factors.end(),
                               [&](const auto& f) { return !f.empty() && f.front() == r; });
  const auto r_index = static_cast<std::size_t>(r_factor - g.factors.begin());
  std::size_t frontier = find("CS");
  for (std::size_t step = 1; step <= levels; ++step) {
    std::size_t first_new = 0;
    for (std::size_t k = 0; k < width; ++k) {
      const auto v = g.add_variable("G" + std::to_string(step) + "_" + std::to_string(k), 2);
      if (k == 0) first_new = v;
      g.factors.push_back({v, frontier});
      g.factors[r_index].push_back(v);
    }
    g.domain[treatment] += width;
    frontier = first_new;
  }
  return g;
}

std::vector<std::uint64_t> expected_id_sequence(const FactorGraph& id0, double b_avg,
                                                std::size_t levels) {
  if (levels == 0) throw Error(ErrorCode::InvalidArgument, "levels must be at least 1");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 1; i <= levels; ++i) out.push_back(estimate_eval_ops(grow_template(id0, b_avg, i)));
  return out;
}

double compute_X1(const std::vector<double>& ids, std::size_t d, std::size_t d_max) {
  if (ids.size() != d_max + 1) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(d_max + 1) +
                                               " op counts, got " + std::to_string(ids.size()));
  }
  if (d_max > d) throw Error(ErrorCode::InvalidArgument, "d_max exceeds d");
  const double n = static_cast<double>(d_max + 1);
  double x1 = 0.0;
  for (std::size_t j = 0; j <= d_max; ++j) x1 += (n - static_cast<double>(j)) / n * ids[j];
  return x1;
}

X2Result compute_X2(const KnowledgeBase& kb, const Horizon& horizon) {
  struct Item {
    std::string node;
    double inspected;  // inspections from the horizon node down to the parent
  };
  X2Result r;
  std::vector<Item> level;
  for (const auto& n : horizon.nodes) level.push_back({n, 0.0});
  while (!level.empty()) {
    double sum = 0.0;
    for (const auto& it : level) sum += it.inspected + kb.element(it.node).replacement_cost;
    r.level_costs.push_back(sum / static_cast<double>(level.size()));
    std::vector<Item> next;
    for (const auto& it : level) {
      const auto& e = kb.element(it.node);
      for (const auto& c : e.children) next.push_back({c, it.inspected + e.inspection_cost});
    }
    level = std::move(next);
  }
  double total = 0.0;
  for (double x : r.level_costs) total += x;
  r.X2 = total / static_cast<double>(r.level_costs.size());
  return r;
}

YResult compute_Y(const std::vector<ChipCandidate>& candidates) {
  YResult y;
  if (candidates.empty()) {
    y.no_bridge_candidates = true;
    return y;
  }
  const auto order = engine_order(candidates);
  const auto n = candidates.size();
  double before = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::max(0.0, 1.0 - before);
    y.Y1 += w * static_cast<double>(bridge_id_ops(n - k));
    y.Y2 += w * candidates[order[k]].effort;
    before += candidates[order[k]].posterior;
  }
  return y;
}

YResult compute_Y(const KnowledgeBase& kb) {
  if (kb.chips().empty()) return compute_Y(std::vector<ChipCandidate>{});
  return compute_Y(candidate_chips(kb));
}

LookaheadEstimate estimate_lookahead(const KnowledgeBase& kb, const Horizon& horizon,
                                     const std::vector<ChipCandidate>& candidates) {
  LookaheadEstimate est;
  est.b_avg = branching_factor(kb);
  est.d = horizon.d;
  est.d_max = horizon.d_max;
  const auto x2 = compute_X2(kb, horizon);
  est.X2 = x2.X2;
  est.level_costs = x2.level_costs;
  const auto id0 = functional_template(kb, horizon.nodes);
  est.ids.push_back(estimate_eval_ops(id0));
  if (horizon.d_max > 0) {
    const auto grown = expected_id_sequence(id0, est.b_avg, horizon.d_max);
    est.ids.insert(est.ids.end(), grown.begin(), grown.end());
  }
  std::vector<double> ids(est.ids.begin(), est.ids.end());
  est.X1 = compute_X1(ids, est.d, est.d_max);
  const auto y = compute_Y(candidates);
  est.Y1 = y.Y1;
  est.Y2 = y.Y2;
  est.no_bridge_candidates = y.no_bridge_candidates;
  return est;
}

InfluenceDiagram build_meta_id(double fl_cost, double bridge_cost, double p_fl) {
  if (!(p_fl >= 0.0 && p_fl <= 1.0)) throw Error(ErrorCode::InvalidArgument, "P(FL) must lie in [0,1]");
  InfluenceDiagram d;
  d.add_decision("M", {"FL", "BFL"}, {});
  d.add_chance("I", {"FL", "BFL"}, {}, {{p_fl, 1.0 - p_fl}});
  d.add_value("V_M", {"M", "I"},
              {fl_cost, fl_cost + bridge_cost, bridge_cost + fl_cost, bridge_cost});
  d.set_decision_order({"M"});
  return d;
}

MetaChoice choose_pathway(double fl_cost, double bridge_cost, double p_fl) {
  const auto d = build_meta_id(fl_cost, bridge_cost, p_fl);
  const auto sol = evaluate(d);
  MetaChoice c;
  c.chosen = sol.policy.choose(d, "M", {}) == "FL" ? Pathway::Functional : Pathway::Bridge;
  c.ev_fl = fl_cost + (1.0 - p_fl) * bridge_cost;
  c.ev_bfl = bridge_cost + p_fl * fl_cost;
  return c;
}

MetaChoice choose_pathway(const LookaheadEstimate& est, double u, double p_fl) {
  return choose_pathway(est.X1 * u + est.X2, est.Y1 * u + est.Y2, p_fl);
}

nlohmann::ordered_json estimate_to_json(const LookaheadEstimate& est, double u,
                                        const MetaChoice& choice) {
  nlohmann::ordered_json j;
  j["X1"] = est.X1;
  j["X2"] = est.X2;
  j["Y1"] = est.Y1;
  j["Y2"] = est.Y2;
  j["u"] = u;
  j["EV_FL"] = choice.ev_fl;
  j["EV_BFL"] = choice.ev_bfl;
  j["chosen"] = to_string(choice.chosen);
  j["level_costs"] = est.level_costs;
  j["ids"] = est.ids;
  j["b_avg"] = est.b_avg;
  j["d"] = est.d;
  j["d_max"] = est.d_max;
  if (est.no_bridge_candidates) j["no_bridge_candidates"] = true;
  return j;
}

}  // namespace hierdx
