#include "hierdx/influence_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "hierdx/error.hpp"

namespace hierdx {

namespace {

constexpr double kNormalizationTolerance = 1e-9;

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  const auto max = std::numeric_limits<std::uint64_t>::max();
  return a > max - b ? max : a + b;
}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exponent) {
  std::uint64_t result = 1;
  for (std::uint64_t i = 0; i < exponent; ++i) {
    result = saturating_mul(result, base);
    if (result == std::numeric_limits<std::uint64_t>::max()) break;
  }
  return result;
}

// Strictly better by more than rounding noise; keeps "first alternative wins"
// stable under scaling and shifting of the cost table.
bool strictly_less(double candidate, double incumbent) {
  const double scale = std::max({1.0, std::fabs(candidate), std::fabs(incumbent)});
  return candidate < incumbent - 1e-12 * scale;
}

// Dense view of a validated diagram: indices instead of ids.
struct Compiled {
  struct Var {
    std::size_t node = 0;
    std::size_t domain = 0;
    std::vector<std::size_t> parents;  // node indices
    bool decision = false;
  };

  const InfluenceDiagram* diagram = nullptr;
  std::vector<Var> vars;                  // by node index; value node has domain 0
  std::size_t value_node = 0;
  std::vector<std::size_t> chance_nodes;  // topological order
  std::vector<std::size_t> decisions;     // decision order

  explicit Compiled(const InfluenceDiagram& d) : diagram(&d) {
    const auto& nodes = d.nodes();
    vars.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto& v = vars[i];
      v.node = i;
      v.domain = nodes[i].labels.size();
      v.decision = nodes[i].kind == NodeKind::Decision;
      for (const auto& p : nodes[i].parents) v.parents.push_back(*d.index_of(p));
      if (nodes[i].kind == NodeKind::Value) value_node = i;
    }
    for (const auto& id : d.decision_order()) decisions.push_back(*d.index_of(id));

    // Kahn's algorithm over the whole graph, keeping declared order on ties.
    std::vector<std::size_t> indegree(nodes.size(), 0);
    std::vector<std::vector<std::size_t>> children(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (auto p : vars[i].parents) {
        ++indegree[i];
        children[p].push_back(i);
      }
    }
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (indegree[i] == 0) ready.insert(i);
    }
    while (!ready.empty()) {
      const auto i = *ready.begin();
      ready.erase(ready.begin());
      if (nodes[i].kind == NodeKind::Chance) chance_nodes.push_back(i);
      for (auto c : children[i]) {
        if (--indegree[c] == 0) ready.insert(c);
      }
    }
  }

  std::size_t config_index(const std::vector<std::size_t>& parents,
                           const std::vector<std::size_t>& assignment) const {
    std::size_t index = 0;
    for (auto p : parents) index = index * vars[p].domain + assignment[p];
    return index;
  }

  double probability(std::size_t chance, const std::vector<std::size_t>& assignment) const {
    const auto& node = diagram->nodes()[chance];
    return node.cpt[config_index(vars[chance].parents, assignment)][assignment[chance]];
  }

  double cost(const std::vector<std::size_t>& assignment) const {
    const auto& node = diagram->nodes()[value_node];
    return node.costs[config_index(vars[value_node].parents, assignment)];
  }

  std::size_t configurations(std::size_t decision) const {
    std::size_t count = 1;
    for (auto p : vars[decision].parents) count *= vars[p].domain;
    return count;
  }
};

Policy empty_policy(const Compiled& c) {
  Policy policy;
  for (auto d : c.decisions) {
    const auto& node = c.diagram->nodes()[d];
    DecisionRule rule;
    rule.decision = node.id;
    rule.information_parents = node.parents;
    rule.choice.assign(c.configurations(d), 0);
    policy.rules.push_back(std::move(rule));
  }
  return policy;
}

void require_valid(const InfluenceDiagram& diagram) {
  const auto diagnostics = validate(diagram);
  if (!diagnostics.empty()) {
    std::ostringstream os;
    os << diagnostics.front().kind << " at '" << diagnostics.front().node
       << "': " << diagnostics.front().message;
    if (diagnostics.size() > 1) os << " (+" << diagnostics.size() - 1 << " more)";
    throw Error(ErrorCode::InvalidDiagram, os.str());
  }
}

}  // namespace

const char* to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::Chance: return "chance";
    case NodeKind::Decision: return "decision";
    case NodeKind::Value: return "value";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Construction

void InfluenceDiagram::index_node() {
  const auto i = nodes_.size() - 1;
  index_.emplace(nodes_[i].id, i);
}

InfluenceDiagram& InfluenceDiagram::add_chance(std::string id, std::vector<std::string> states,
                                               std::vector<std::string> parents,
                                               std::vector<std::vector<double>> cpt) {
  DiagramNode node;
  node.id = std::move(id);
  node.kind = NodeKind::Chance;
  node.labels = std::move(states);
  node.parents = std::move(parents);
  node.cpt = std::move(cpt);
  nodes_.push_back(std::move(node));
  index_node();
  return *this;
}

InfluenceDiagram& InfluenceDiagram::add_decision(std::string id,
                                                 std::vector<std::string> alternatives,
                                                 std::vector<std::string> information_parents) {
  DiagramNode node;
  node.id = std::move(id);
  node.kind = NodeKind::Decision;
  node.labels = std::move(alternatives);
  node.parents = std::move(information_parents);
  nodes_.push_back(std::move(node));
  index_node();
  return *this;
}

InfluenceDiagram& InfluenceDiagram::add_value(std::string id, std::vector<std::string> parents,
                                              std::vector<double> costs) {
  DiagramNode node;
  node.id = std::move(id);
  node.kind = NodeKind::Value;
  node.parents = std::move(parents);
  node.costs = std::move(costs);
  nodes_.push_back(std::move(node));
  index_node();
  return *this;
}

InfluenceDiagram& InfluenceDiagram::set_decision_order(std::vector<std::string> order) {
  decision_order_ = std::move(order);
  return *this;
}

const DiagramNode* InfluenceDiagram::find(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

const DiagramNode& InfluenceDiagram::at(const std::string& id) const {
  if (const auto* node = find(id)) return *node;
  throw Error(ErrorCode::UnknownReference, "diagram node '" + id + "'");
}

std::optional<std::size_t> InfluenceDiagram::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t InfluenceDiagram::domain_size(const std::string& id) const {
  const auto* node = find(id);
  return node ? node->labels.size() : 0;
}

std::size_t InfluenceDiagram::configuration_count(std::span<const std::string> parents) const {
  std::size_t count = 1;
  for (const auto& p : parents) count *= domain_size(p);
  return count;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Diagnostic> validate(const InfluenceDiagram& diagram) {
  std::vector<Diagnostic> out;
  const auto& nodes = diagram.nodes();
  auto report = [&out](std::string kind, std::string node, std::string message) {
    out.push_back({std::move(kind), std::move(node), std::move(message)});
  };

  std::set<std::string> seen;
  std::size_t value_nodes = 0;
  for (const auto& node : nodes) {
    if (node.id.empty()) report("EmptyId", node.id, "node id must be non-empty");
    if (!seen.insert(node.id).second) report("DuplicateId", node.id, "node id declared twice");
    if (node.kind == NodeKind::Value) ++value_nodes;
  }
  if (value_nodes != 1) {
    report("ValueNodeCount", "", "expected exactly one value node, found " +
                                     std::to_string(value_nodes));
  }

  bool structural = true;
  for (const auto& node : nodes) {
    std::set<std::string> parent_set;
    for (const auto& p : node.parents) {
      const auto* parent = diagram.find(p);
      if (!parent) {
        report("UnknownParent", node.id, "parent '" + p + "' is not declared");
        structural = false;
      } else if (parent->kind == NodeKind::Value) {
        report("ValueNodeAsParent", node.id, "value node '" + p + "' cannot be a parent");
        structural = false;
      }
      if (!parent_set.insert(p).second) {
        report("DuplicateParent", node.id, "parent '" + p + "' listed twice");
        structural = false;
      }
    }
    if (node.kind != NodeKind::Value && node.labels.empty()) {
      report("EmptyDomain", node.id, "node needs at least one state or alternative");
      structural = false;
    }
  }
  if (!structural) return out;

  for (const auto& node : nodes) {
    const auto rows = diagram.configuration_count(node.parents);
    if (node.kind == NodeKind::Chance) {
      if (node.cpt.size() != rows) {
        report("CptRowCount", node.id,
               "expected " + std::to_string(rows) + " rows, found " + std::to_string(node.cpt.size()));
        continue;
      }
      for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = node.cpt[r];
        if (row.size() != node.labels.size()) {
          report("CptRowWidth", node.id, "row " + std::to_string(r) + " has wrong width");
          continue;
        }
        double sum = 0.0;
        bool negative = false;
        for (double p : row) {
          if (!(p >= 0.0) || !std::isfinite(p)) negative = true;
          sum += p;
        }
        if (negative) {
          report("NegativeProbability", node.id, "row " + std::to_string(r));
        } else if (std::fabs(sum - 1.0) > kNormalizationTolerance) {
          std::ostringstream os;
          os << "row " << r << " sums to " << sum;
          report("CptRowNotNormalized", node.id, os.str());
        }
      }
    } else if (node.kind == NodeKind::Value) {
      if (node.costs.size() != rows) {
        report("ValueTableSize", node.id,
               "expected " + std::to_string(rows) + " entries, found " +
                   std::to_string(node.costs.size()));
      }
      for (double c : node.costs) {
        if (!std::isfinite(c)) {
          report("NonFiniteCost", node.id, "value table entries must be finite");
          break;
        }
      }
    }
  }

  // Cycle detection by repeated removal of parentless nodes.
  {
    std::vector<std::size_t> remaining_parents(nodes.size());
    std::vector<std::vector<std::size_t>> children(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      remaining_parents[i] = nodes[i].parents.size();
      for (const auto& p : nodes[i].parents) children[*diagram.index_of(p)].push_back(i);
    }
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (remaining_parents[i] == 0) stack.push_back(i);
    }
    std::size_t removed = 0;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      ++removed;
      for (auto c : children[i]) {
        if (--remaining_parents[c] == 0) stack.push_back(c);
      }
    }
    if (removed != nodes.size()) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (remaining_parents[i] != 0) {
          report("Cycle", nodes[i].id, "node lies on or below a directed cycle");
          break;
        }
      }
      return out;
    }
  }

  // Decision ordering and no-forgetting.
  const auto& order = diagram.decision_order();
  std::map<std::string, std::size_t> position;
  bool order_ok = true;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto* node = diagram.find(order[k]);
    if (!node || node->kind != NodeKind::Decision) {
      report("DecisionOrder", order[k], "decision_order entry is not a decision node");
      order_ok = false;
    } else if (!position.emplace(order[k], k).second) {
      report("DecisionOrder", order[k], "decision listed twice in decision_order");
      order_ok = false;
    }
  }
  for (const auto& node : nodes) {
    if (node.kind == NodeKind::Decision && !position.count(node.id)) {
      report("DecisionOrder", node.id, "decision missing from decision_order");
      order_ok = false;
    }
  }
  if (!order_ok) return out;

  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& node = diagram.at(order[k]);
    std::set<std::string> info(node.parents.begin(), node.parents.end());
    for (const auto& p : node.parents) {
      const auto& parent = diagram.at(p);
      if (parent.kind == NodeKind::Decision && position.at(p) >= k) {
        report("InformationOrder", node.id,
               "information parent '" + p + "' is not an earlier decision");
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto& earlier = diagram.at(order[j]);
      bool complete = info.count(earlier.id) > 0;
      for (const auto& p : earlier.parents) complete = complete && info.count(p) > 0;
      if (!complete) {
        report("NoForgettingViolation", node.id,
               "information set must include '" + earlier.id + "' and its information parents");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Policies

const DecisionRule& Policy::rule(const std::string& decision) const {
  for (const auto& r : rules) {
    if (r.decision == decision) return r;
  }
  throw Error(ErrorCode::UnknownReference, "policy has no rule for '" + decision + "'");
}

const std::string& Policy::choose(const InfluenceDiagram& diagram, const std::string& decision,
                                  std::span<const std::string> information_labels) const {
  const auto& r = rule(decision);
  if (information_labels.size() != r.information_parents.size()) {
    throw Error(ErrorCode::InvalidArgument, "information configuration has wrong arity for '" +
                                                decision + "'");
  }
  std::size_t index = 0;
  for (std::size_t i = 0; i < information_labels.size(); ++i) {
    const auto& parent = diagram.at(r.information_parents[i]);
    const auto it = std::find(parent.labels.begin(), parent.labels.end(), information_labels[i]);
    if (it == parent.labels.end()) {
      throw Error(ErrorCode::UnknownReference,
                  "label '" + information_labels[i] + "' of '" + parent.id + "'");
    }
    index = index * parent.labels.size() + static_cast<std::size_t>(it - parent.labels.begin());
  }
  return diagram.at(decision).labels.at(r.choice.at(index));
}

// ---------------------------------------------------------------------------
// Rollback evaluation

Solution evaluate(const InfluenceDiagram& diagram) {
  require_valid(diagram);
  const Compiled c(diagram);
  Policy policy = empty_policy(c);

  // Temporal sequence: observed chance nodes, decision, ..., unobserved rest.
  std::vector<std::size_t> sequence;
  std::vector<bool> placed(diagram.nodes().size(), false);
  for (auto d : c.decisions) {
    for (auto p : c.vars[d].parents) {
      if (!c.vars[p].decision && !placed[p]) {
        sequence.push_back(p);
        placed[p] = true;
      }
    }
    sequence.push_back(d);
    placed[d] = true;
  }
  for (auto x : c.chance_nodes) {
    if (!placed[x]) sequence.push_back(x);
  }

  std::vector<std::size_t> rule_of(diagram.nodes().size(), 0);
  for (std::size_t k = 0; k < c.decisions.size(); ++k) rule_of[c.decisions[k]] = k;

  std::vector<std::size_t> assignment(diagram.nodes().size(), 0);

  // Values are unnormalized: the probability of the prefix is folded into the
  // leaf weight, which is shared by every alternative at a decision and so
  // does not change the argmin.
  std::function<double(std::size_t)> rollback = [&](std::size_t pos) -> double {
    if (pos == sequence.size()) {
      double weight = 1.0;
      for (auto x : c.chance_nodes) {
        weight *= c.probability(x, assignment);
        if (weight == 0.0) return 0.0;
      }
      return weight * c.cost(assignment);
    }
    const auto node = sequence[pos];
    const auto& var = c.vars[node];
    if (!var.decision) {
      double total = 0.0;
      for (std::size_t s = 0; s < var.domain; ++s) {
        assignment[node] = s;
        total += rollback(pos + 1);
      }
      return total;
    }
    double best = 0.0;
    std::size_t best_alt = 0;
    for (std::size_t a = 0; a < var.domain; ++a) {
      assignment[node] = a;
      const double v = rollback(pos + 1);
      if (a == 0 || strictly_less(v, best)) {
        best = v;
        best_alt = a;
      }
    }
    policy.rules[rule_of[node]].choice[c.config_index(var.parents, assignment)] = best_alt;
    assignment[node] = best_alt;
    return best;
  };

  Solution solution;
  solution.expected_cost = rollback(0);
  solution.policy = std::move(policy);
  return solution;
}

// ---------------------------------------------------------------------------
// Enumeration oracle

namespace {

// Enumerates every joint chance configuration once; per policy, decisions are
// read off the policy tables in decision order.
class PolicyScorer {
 public:
  explicit PolicyScorer(const InfluenceDiagram& diagram) : c_(diagram) {
    std::size_t total = 1;
    for (auto x : c_.chance_nodes) total *= c_.vars[x].domain;
    configs_.reserve(total);
    std::vector<std::size_t> digits(c_.chance_nodes.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
      configs_.push_back(digits);
      for (std::size_t i = digits.size(); i-- > 0;) {
        if (++digits[i] < c_.vars[c_.chance_nodes[i]].domain) break;
        digits[i] = 0;
      }
    }
  }

  const Compiled& compiled() const { return c_; }

  double score(const Policy& policy) const {
    std::vector<std::size_t> assignment(c_.vars.size(), 0);
    double total = 0.0;
    for (const auto& config : configs_) {
      for (std::size_t i = 0; i < config.size(); ++i) assignment[c_.chance_nodes[i]] = config[i];
      for (std::size_t k = 0; k < c_.decisions.size(); ++k) {
        const auto d = c_.decisions[k];
        assignment[d] = policy.rules[k].choice[c_.config_index(c_.vars[d].parents, assignment)];
      }
      double weight = 1.0;
      for (auto x : c_.chance_nodes) {
        weight *= c_.probability(x, assignment);
        if (weight == 0.0) break;
      }
      if (weight != 0.0) total += weight * c_.cost(assignment);
    }
    return total;
  }

 private:
  Compiled c_;
  std::vector<std::vector<std::size_t>> configs_;
};

}  // namespace

double policy_expected_cost(const InfluenceDiagram& diagram, const Policy& policy) {
  require_valid(diagram);
  const PolicyScorer scorer(diagram);
  const auto& c = scorer.compiled();
  if (policy.rules.size() != c.decisions.size()) {
    throw Error(ErrorCode::InvalidArgument, "policy does not cover every decision");
  }
  for (std::size_t k = 0; k < c.decisions.size(); ++k) {
    const auto& node = diagram.nodes()[c.decisions[k]];
    const auto& rule = policy.rules[k];
    if (rule.decision != node.id || rule.choice.size() != c.configurations(c.decisions[k])) {
      throw Error(ErrorCode::InvalidArgument, "policy rule mismatch for '" + node.id + "'");
    }
    for (auto a : rule.choice) {
      if (a >= node.labels.size()) {
        throw Error(ErrorCode::InvalidArgument, "policy alternative out of range");
      }
    }
  }
  return scorer.score(policy);
}

std::uint64_t policy_count(const InfluenceDiagram& diagram) {
  require_valid(diagram);
  const Compiled c(diagram);
  std::uint64_t count = 1;
  for (auto d : c.decisions) {
    count = saturating_mul(count, saturating_pow(c.vars[d].domain, c.configurations(d)));
  }
  return count;
}

Solution enumerate_policies_evaluate(const InfluenceDiagram& diagram, std::uint64_t bound) {
  const auto count = policy_count(diagram);
  if (count > bound) {
    throw Error(ErrorCode::TooLarge, std::to_string(count) + " policies exceed bound " +
                                         std::to_string(bound));
  }
  const PolicyScorer scorer(diagram);
  const auto& c = scorer.compiled();
  Policy current = empty_policy(c);

  Solution best;
  bool first = true;
  while (true) {
    const double cost = scorer.score(current);
    if (first || strictly_less(cost, best.expected_cost)) {
      best.expected_cost = cost;
      best.policy = current;
      first = false;
    }
    // Odometer over every table entry of every rule; first entries vary slowest.
    bool carried = true;
    for (std::size_t k = current.rules.size(); carried && k-- > 0;) {
      auto& choice = current.rules[k].choice;
      const auto alternatives = c.vars[c.decisions[k]].domain;
      for (std::size_t e = choice.size(); e-- > 0;) {
        if (++choice[e] < alternatives) {
          carried = false;
          break;
        }
        choice[e] = 0;
      }
    }
    if (carried) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Evaluation-cost estimate

std::size_t FactorGraph::add_variable(std::string name, std::size_t domain_size) {
  names.push_back(std::move(name));
  domain.push_back(domain_size);
  return names.size() - 1;
}

FactorGraph factor_graph(const InfluenceDiagram& diagram) {
  FactorGraph graph;
  std::map<std::string, std::size_t> var_of;
  for (const auto& node : diagram.nodes()) {
    if (node.kind == NodeKind::Value) continue;
    var_of[node.id] = graph.add_variable(node.id, node.labels.size());
  }
  for (const auto& node : diagram.nodes()) {
    std::vector<std::size_t> scope;
    if (node.kind != NodeKind::Value) scope.push_back(var_of.at(node.id));
    for (const auto& p : node.parents) {
      const auto it = var_of.find(p);
      if (it != var_of.end()) scope.push_back(it->second);
    }
    if (!scope.empty()) graph.factors.push_back(std::move(scope));
  }
  return graph;
}

std::uint64_t estimate_eval_ops(const FactorGraph& graph) {
  const auto n = graph.names.size();
  std::vector<std::set<std::size_t>> factors;
  for (const auto& f : graph.factors) factors.emplace_back(f.begin(), f.end());
  std::vector<bool> eliminated(n, false);
  std::uint64_t total = 0;

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best_var = n;
    std::size_t best_degree = 0;
    std::uint64_t best_size = 0;
    std::set<std::size_t> best_scope;
    for (std::size_t v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      std::set<std::size_t> scope{v};
      for (const auto& f : factors) {
        if (f.count(v)) scope.insert(f.begin(), f.end());
      }
      std::uint64_t size = 1;
      for (auto u : scope) size = saturating_mul(size, graph.domain[u]);
      const auto degree = scope.size() - 1;
      if (best_var == n || degree < best_degree ||
          (degree == best_degree && size < best_size)) {
        best_var = v;
        best_degree = degree;
        best_size = size;
        best_scope = std::move(scope);
      }
    }
    total = saturating_add(total, best_size);
    eliminated[best_var] = true;
    std::erase_if(factors, [best_var](const auto& f) { return f.count(best_var) > 0; });
    best_scope.erase(best_var);
    if (!best_scope.empty()) factors.push_back(std::move(best_scope));
  }
  return total;
}

std::uint64_t estimate_eval_ops(const InfluenceDiagram& diagram) {
  require_valid(diagram);
  return estimate_eval_ops(factor_graph(diagram));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, path + ": " + what);
}

std::vector<std::string> string_array(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) schema_error(path + "/" + std::to_string(i), "expected a string");
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

// All parent configurations as "|"-joined keys, in table-row order.
std::vector<std::string> configuration_keys(
    const std::vector<const std::vector<std::string>*>& domains) {
  std::vector<std::string> keys{""};
  for (std::size_t i = 0; i < domains.size(); ++i) {
    std::vector<std::string> next;
    for (const auto& prefix : keys) {
      for (const auto& label : *domains[i]) next.push_back(i == 0 ? label : prefix + "|" + label);
    }
    keys = std::move(next);
  }
  return keys;
}

}  // namespace

InfluenceDiagram diagram_from_json(const nlohmann::json& document) {
  if (!document.is_object()) schema_error("", "diagram document must be an object");
  if (!document.contains("nodes") || !document["nodes"].is_array()) {
    schema_error("/nodes", "required array");
  }
  const auto& nodes = document["nodes"];

  struct Header {
    std::string id;
    NodeKind kind;
    std::vector<std::string> labels;
    std::vector<std::string> parents;
  };
  std::vector<Header> headers;
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto path = "/nodes/" + std::to_string(i);
    const auto& n = nodes[i];
    if (!n.is_object()) schema_error(path, "node must be an object");
    if (!n.contains("id") || !n["id"].is_string()) schema_error(path + "/id", "required string");
    if (!n.contains("kind") || !n["kind"].is_string()) {
      schema_error(path + "/kind", "required string");
    }
    Header h;
    h.id = n["id"].get<std::string>();
    const auto kind = n["kind"].get<std::string>();
    if (kind == "chance") {
      h.kind = NodeKind::Chance;
      if (!n.contains("states")) schema_error(path + "/states", "required for chance nodes");
      h.labels = string_array(n["states"], path + "/states");
    } else if (kind == "decision") {
      h.kind = NodeKind::Decision;
      if (!n.contains("alternatives")) {
        schema_error(path + "/alternatives", "required for decision nodes");
      }
      h.labels = string_array(n["alternatives"], path + "/alternatives");
    } else if (kind == "value") {
      h.kind = NodeKind::Value;
    } else {
      schema_error(path + "/kind", "must be chance, decision or value");
    }
    if (n.contains("parents")) h.parents = string_array(n["parents"], path + "/parents");
    by_id.emplace(h.id, headers.size());
    headers.push_back(std::move(h));
  }

  InfluenceDiagram diagram;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    const auto path = "/nodes/" + std::to_string(i);
    const auto& h = headers[i];
    std::vector<const std::vector<std::string>*> domains;
    for (const auto& p : h.parents) {
      const auto it = by_id.find(p);
      if (it == by_id.end()) {
        throw Error(ErrorCode::UnknownReference, path + "/parents: '" + p + "'");
      }
      domains.push_back(&headers[it->second].labels);
    }
    if (h.kind == NodeKind::Decision) {
      diagram.add_decision(h.id, h.labels, h.parents);
      continue;
    }
    const auto& n = nodes[i];
    if (!n.contains("table") || !n["table"].is_object()) {
      schema_error(path + "/table", "required object keyed by parent configuration");
    }
    const auto& table = n["table"];
    const auto keys = configuration_keys(domains);
    if (table.size() != keys.size()) {
      schema_error(path + "/table", "expected " + std::to_string(keys.size()) + " entries");
    }
    if (h.kind == NodeKind::Chance) {
      std::vector<std::vector<double>> cpt;
      for (const auto& key : keys) {
        if (!table.contains(key)) schema_error(path + "/table/" + key, "missing configuration");
        const auto& row = table[key];
        if (!row.is_array()) schema_error(path + "/table/" + key, "expected probability array");
        std::vector<double> probs;
        for (const auto& p : row) {
          if (!p.is_number()) schema_error(path + "/table/" + key, "expected numbers");
          probs.push_back(p.get<double>());
        }
        cpt.push_back(std::move(probs));
      }
      diagram.add_chance(h.id, h.labels, h.parents, std::move(cpt));
    } else {
      std::vector<double> costs;
      for (const auto& key : keys) {
        if (!table.contains(key)) schema_error(path + "/table/" + key, "missing configuration");
        if (!table[key].is_number()) schema_error(path + "/table/" + key, "expected a number");
        costs.push_back(table[key].get<double>());
      }
      diagram.add_value(h.id, h.parents, std::move(costs));
    }
  }
  if (document.contains("decision_order")) {
    diagram.set_decision_order(string_array(document["decision_order"], "/decision_order"));
  }
  return diagram;
}

InfluenceDiagram parse_diagram(const std::string& text) {
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, e.what());
  }
  return diagram_from_json(document);
}

nlohmann::ordered_json diagram_to_json(const InfluenceDiagram& diagram) {
  nlohmann::ordered_json out;
  out["nodes"] = nlohmann::ordered_json::array();
  for (const auto& node : diagram.nodes()) {
    nlohmann::ordered_json n;
    n["id"] = node.id;
    n["kind"] = to_string(node.kind);
    if (node.kind == NodeKind::Chance) n["states"] = node.labels;
    if (node.kind == NodeKind::Decision) n["alternatives"] = node.labels;
    n["parents"] = node.parents;
    if (node.kind != NodeKind::Decision) {
      std::vector<const std::vector<std::string>*> domains;
      for (const auto& p : node.parents) domains.push_back(&diagram.at(p).labels);
      const auto keys = configuration_keys(domains);
      nlohmann::ordered_json table = nlohmann::ordered_json::object();
      for (std::size_t r = 0; r < keys.size(); ++r) {
        if (node.kind == NodeKind::Chance) {
          table[keys[r]] = r < node.cpt.size() ? node.cpt[r] : std::vector<double>{};
        } else {
          table[keys[r]] = r < node.costs.size() ? node.costs[r] : 0.0;
        }
      }
      n["table"] = std::move(table);
    }
    out["nodes"].push_back(std::move(n));
  }
  out["decision_order"] = diagram.decision_order();
  return out;
}

nlohmann::ordered_json policy_to_json(const InfluenceDiagram& diagram, const Policy& policy) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& rule : policy.rules) {
    std::vector<const std::vector<std::string>*> domains;
    for (const auto& p : rule.information_parents) domains.push_back(&diagram.at(p).labels);
    const auto keys = configuration_keys(domains);
    const auto& alternatives = diagram.at(rule.decision).labels;
    nlohmann::ordered_json table = nlohmann::ordered_json::object();
    for (std::size_t r = 0; r < keys.size(); ++r) table[keys[r]] = alternatives[rule.choice[r]];
    out[rule.decision] = std::move(table);
  }
  return out;
}

}  // namespace hierdx
