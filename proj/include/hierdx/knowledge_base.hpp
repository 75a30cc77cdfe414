#pragma once

// Device description: part-of hierarchy, gate-level behavior, testpoints,
// chip packaging and the cost model. Immutable once constructed.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hierdx/influence_diagram.hpp"

namespace hierdx {

enum class ElementKind { Subsystem, Component };
enum class GateType { And, Or, Not, Nand, Nor, Xor, Buf };

const char* to_string(ElementKind kind) noexcept;
const char* to_string(GateType gate) noexcept;
std::optional<GateType> gate_from_string(const std::string& name) noexcept;
std::size_t gate_arity(GateType gate) noexcept;
bool eval_gate(GateType gate, std::span<const std::uint8_t> inputs) noexcept;

struct HierarchyNode {
  std::string id;
  ElementKind kind = ElementKind::Component;
  std::vector<std::string> children;
  double inspection_cost = 0.0;
  double replacement_cost = 0.0;
  // Only component priors carry fault mass; subsystem priors are kept for
  // round-tripping but do not enter beliefs.
  double failure_prior = 0.0;
  std::optional<std::string> output_testpoint;

  bool operator==(const HierarchyNode&) const = default;
};

struct ComponentBehavior {
  std::string component;
  GateType gate = GateType::Buf;
  std::vector<std::string> inputs;
  std::string output;

  bool operator==(const ComponentBehavior&) const = default;
};

struct Testpoint {
  std::string id;
  std::string net;
  double probe_cost = 0.0;

  bool operator==(const Testpoint&) const = default;
};

struct ChipPin {
  int number = 0;
  std::string net;

  bool operator==(const ChipPin&) const = default;
};

struct Chip {
  std::string id;
  std::vector<ChipPin> pins;
  // One prior per adjacent pin pair (pins[i], pins[i+1]).
  std::vector<double> bridge_priors;

  bool operator==(const Chip&) const = default;
};

struct CostModel {
  double u = 0.0;
  // Unset means 2 x complete repair cost of the hierarchy root.
  std::optional<double> fault_penalty_F;
  double pathway_prior_FL = 0.5;
  double bridge_repair_cost = 0.0;
  double chip_inspect_effort = 0.0;

  bool operator==(const CostModel&) const = default;
};

struct NetDeclarations {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  bool operator==(const NetDeclarations&) const = default;
};

struct KbData {
  std::string root;
  std::vector<HierarchyNode> elements;  // pre-order
  std::vector<ComponentBehavior> behaviors;
  NetDeclarations nets;
  std::vector<Testpoint> testpoints;
  std::vector<Chip> chips;
  CostModel cost_model;

  bool operator==(const KbData&) const = default;
};

using NetValues = std::map<std::string, int>;

class KnowledgeBase {
 public:
  explicit KnowledgeBase(KbData data);

  const KbData& data() const noexcept { return data_; }
  const std::string& root() const noexcept { return data_.root; }
  const CostModel& cost_model() const noexcept { return data_.cost_model; }
  const std::vector<Chip>& chips() const noexcept { return data_.chips; }
  const std::vector<Testpoint>& testpoints() const noexcept { return data_.testpoints; }
  const NetDeclarations& nets() const noexcept { return data_.nets; }

  bool has_element(const std::string& id) const { return element_index_.count(id) > 0; }
  const HierarchyNode& element(const std::string& id) const;
  std::optional<std::string> parent(const std::string& id) const;
  std::size_t depth(const std::string& id) const;
  // Longest downward path from `id` to a leaf, in edges.
  std::size_t height(const std::string& id) const;
  std::size_t tree_height() const { return height(root()); }
  bool in_subtree(const std::string& id, const std::string& ancestor) const;
  std::vector<std::string> subtree(const std::string& id) const;
  std::vector<std::string> components_in(const std::string& id) const;
  double subtree_prior_mass(const std::string& id) const;

  const Testpoint& testpoint(const std::string& id) const;
  bool has_testpoint(const std::string& id) const { return testpoint_index_.count(id) > 0; }
  std::optional<std::string> output_net(const std::string& element) const;

  const Chip& chip(const std::string& id) const;
  const ComponentBehavior* behavior_of(const std::string& component) const;

  // Net table. Inputs first, in declaration order, then gate outputs.
  const std::vector<std::string>& net_names() const noexcept { return net_names_; }
  std::size_t net_index(const std::string& net) const;
  bool has_net(const std::string& net) const { return net_index_.count(net) > 0; }
  bool is_output(const std::string& net) const;
  bool is_input(const std::string& net) const;

  // Behaviors in topological order; empty when the netlist is cyclic.
  const std::vector<std::size_t>& gate_order() const noexcept { return gate_order_; }
  bool netlist_acyclic() const noexcept { return acyclic_; }
  // Index of the behavior driving a net, if any.
  std::optional<std::size_t> driver(std::size_t net) const { return drivers_.at(net); }

  // Nets in the transitive fan-in of `net`, including itself.
  std::set<std::string> fanin_nets(const std::string& net) const;
  // Components whose gate lies in the transitive fan-in of `net`.
  std::set<std::string> fanin_components(const std::string& net) const;

  double fault_penalty() const;

  // Bits for every net, indexed like net_names(), from bits for the primary
  // inputs in declaration order.
  std::vector<std::uint8_t> evaluate_nets(std::span<const std::uint8_t> input_bits) const;

  bool operator==(const KnowledgeBase& other) const { return data_ == other.data_; }

 private:
  KbData data_;
  std::map<std::string, std::size_t> element_index_;
  std::map<std::string, std::string> parent_;
  std::map<std::string, std::size_t> testpoint_index_;
  std::map<std::string, std::size_t> chip_index_;
  std::map<std::string, std::size_t> behavior_index_;
  std::vector<std::string> net_names_;
  std::map<std::string, std::size_t> net_index_;
  std::vector<std::optional<std::size_t>> drivers_;
  std::vector<std::size_t> gate_order_;
  std::set<std::string> outputs_;
  std::set<std::string> inputs_;
  bool acyclic_ = true;
};

KnowledgeBase kb_from_json(const nlohmann::json& document);
KnowledgeBase parse_kb(const std::string& document);
KnowledgeBase load_kb_file(const std::string& path);
nlohmann::ordered_json kb_to_json(const KnowledgeBase& kb);
std::string serialize_kb(const KnowledgeBase& kb);

std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb);

// Fault-free forward evaluation. `inputs` must assign every primary input.
NetValues golden_simulate(const KnowledgeBase& kb, const NetValues& inputs);

// Parses "0,1,1" into bits for the primary inputs in declaration order.
NetValues parse_input_vector(const KnowledgeBase& kb, const std::string& csv);
std::vector<std::uint8_t> input_bits(const KnowledgeBase& kb, const NetValues& inputs);

// RC(leaf) = replacement; RC(s) = inspection(s) + min over children RC(child).
double repair_cost_complete(const KnowledgeBase& kb, const std::string& node);

// Depth-limited variant: frontier nodes at depth <= horizon_depth below
// `node` (or leaves reached earlier) are costed at their replacement cost
// plus the inspection costs of their strict ancestors up to and including
// `node`.
double repair_cost_heuristic(const KnowledgeBase& kb, const std::string& node,
                             std::size_t horizon_depth);

}  // namespace hierdx
