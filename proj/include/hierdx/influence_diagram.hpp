#pragma once

// Influence diagrams over discrete variables with a single cost-valued node.
//
// Conventions:
//  * The value node holds costs; evaluation minimizes expected cost.
//  * Tables are indexed by the joint configuration of a node's parents in
//    declared parent order, first parent most significant (mixed radix).
//  * Ties between alternatives resolve to the first declared alternative.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace hierdx {

enum class NodeKind { Chance, Decision, Value };

const char* to_string(NodeKind kind) noexcept;

struct DiagramNode {
  std::string id;
  NodeKind kind = NodeKind::Chance;
  // States of a chance node or alternatives of a decision node. Empty for
  // the value node.
  std::vector<std::string> labels;
  // Probabilistic parents, information parents, or value parents.
  std::vector<std::string> parents;
  // Chance nodes: one distribution per parent configuration.
  std::vector<std::vector<double>> cpt;
  // Value node: one cost per parent configuration.
  std::vector<double> costs;

  bool operator==(const DiagramNode&) const = default;
};

class InfluenceDiagram {
 public:
  InfluenceDiagram() = default;

  InfluenceDiagram& add_chance(std::string id, std::vector<std::string> states,
                               std::vector<std::string> parents,
                               std::vector<std::vector<double>> cpt);
  InfluenceDiagram& add_decision(std::string id, std::vector<std::string> alternatives,
                                 std::vector<std::string> information_parents);
  InfluenceDiagram& add_value(std::string id, std::vector<std::string> parents,
                              std::vector<double> costs);
  InfluenceDiagram& set_decision_order(std::vector<std::string> order);

  const std::vector<DiagramNode>& nodes() const noexcept { return nodes_; }
  const std::vector<std::string>& decision_order() const noexcept { return decision_order_; }

  const DiagramNode* find(const std::string& id) const;
  const DiagramNode& at(const std::string& id) const;
  std::optional<std::size_t> index_of(const std::string& id) const;

  // Number of states/alternatives; 0 for unknown ids and the value node.
  std::size_t domain_size(const std::string& id) const;

  // Number of rows a table over `parents` must have.
  std::size_t configuration_count(std::span<const std::string> parents) const;

  bool operator==(const InfluenceDiagram& other) const {
    return nodes_ == other.nodes_ && decision_order_ == other.decision_order_;
  }

 private:
  void index_node();

  std::vector<DiagramNode> nodes_;
  std::vector<std::string> decision_order_;
  std::map<std::string, std::size_t> index_;
};

struct Diagnostic {
  std::string kind;
  std::string node;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

std::vector<Diagnostic> validate(const InfluenceDiagram& diagram);

// One decision's rule: information configuration -> chosen alternative index.
struct DecisionRule {
  std::string decision;
  std::vector<std::string> information_parents;
  std::vector<std::size_t> choice;

  bool operator==(const DecisionRule&) const = default;
};

struct Policy {
  std::vector<DecisionRule> rules;

  const DecisionRule& rule(const std::string& decision) const;

  // Alternative chosen for `decision` when its information parents take the
  // given labels (in information-parent order).
  const std::string& choose(const InfluenceDiagram& diagram, const std::string& decision,
                            std::span<const std::string> information_labels) const;

  bool operator==(const Policy&) const = default;
};

struct Solution {
  Policy policy;
  double expected_cost = 0.0;
};

// Exact optimal policy by rollback of the decision tree implied by the
// decision order. Throws InvalidDiagram if validation fails.
Solution evaluate(const InfluenceDiagram& diagram);

// Expected cost of following `policy`, by enumeration of all chance
// configurations.
double policy_expected_cost(const InfluenceDiagram& diagram, const Policy& policy);

inline constexpr std::uint64_t kDefaultPolicyBound = 1'000'000;

// Number of distinct deterministic policies, saturating at UINT64_MAX.
std::uint64_t policy_count(const InfluenceDiagram& diagram);

// Exhaustive policy enumeration. Independent of evaluate(); used as its
// oracle. Throws TooLarge when policy_count exceeds `bound`.
Solution enumerate_policies_evaluate(const InfluenceDiagram& diagram,
                                     std::uint64_t bound = kDefaultPolicyBound);

// Variable/factor skeleton used for evaluation-cost estimation.
struct FactorGraph {
  std::vector<std::string> names;
  std::vector<std::size_t> domain;
  std::vector<std::vector<std::size_t>> factors;

  std::size_t add_variable(std::string name, std::size_t domain_size);
};

FactorGraph factor_graph(const InfluenceDiagram& diagram);

// Estimated multiplications to evaluate the diagram: greedy min-degree
// elimination, each step costing the size of the combined factor.
std::uint64_t estimate_eval_ops(const FactorGraph& graph);
std::uint64_t estimate_eval_ops(const InfluenceDiagram& diagram);

// JSON document form: {"nodes": [...], "decision_order": [...]}.
InfluenceDiagram diagram_from_json(const nlohmann::json& document);
InfluenceDiagram parse_diagram(const std::string& text);
nlohmann::ordered_json diagram_to_json(const InfluenceDiagram& diagram);
nlohmann::ordered_json policy_to_json(const InfluenceDiagram& diagram, const Policy& policy);

}  // namespace hierdx
