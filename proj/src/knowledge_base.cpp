#include "hierdx/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "hierdx/error.hpp"

namespace hierdx {

const char* to_string(ElementKind kind) noexcept {
  return kind == ElementKind::Subsystem ? "subsystem" : "component";
}

const char* to_string(GateType gate) noexcept {
  switch (gate) {
    case GateType::And: return "AND";
    case GateType::Or: return "OR";
    case GateType::Not: return "NOT";
    case GateType::Nand: return "NAND";
    case GateType::Nor: return "NOR";
    case GateType::Xor: return "XOR";
    case GateType::Buf: return "BUF";
  }
  return "?";
}

std::optional<GateType> gate_from_string(const std::string& name) noexcept {
  static const std::map<std::string, GateType> table{
      {"AND", GateType::And}, {"OR", GateType::Or},   {"NOT", GateType::Not},
      {"NAND", GateType::Nand}, {"NOR", GateType::Nor}, {"XOR", GateType::Xor},
      {"BUF", GateType::Buf}};
  const auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::size_t gate_arity(GateType gate) noexcept {
  return gate == GateType::Not || gate == GateType::Buf ? 1 : 2;
}

bool eval_gate(GateType gate, std::span<const std::uint8_t> in) noexcept {
  switch (gate) {
    case GateType::Buf: return in[0] != 0;
    case GateType::Not: return in[0] == 0;
    case GateType::And: return in[0] && in[1];
    case GateType::Or: return in[0] || in[1];
    case GateType::Nand: return !(in[0] && in[1]);
    case GateType::Nor: return !(in[0] || in[1]);
    case GateType::Xor: return (in[0] != 0) != (in[1] != 0);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Indexing

KnowledgeBase::KnowledgeBase(KbData data) : data_(std::move(data)) {
  for (std::size_t i = 0; i < data_.elements.size(); ++i) {
    element_index_.emplace(data_.elements[i].id, i);
  }
  for (const auto& e : data_.elements) {
    for (const auto& c : e.children) parent_.emplace(c, e.id);
  }
  for (std::size_t i = 0; i < data_.testpoints.size(); ++i) {
    testpoint_index_.emplace(data_.testpoints[i].id, i);
  }
  for (std::size_t i = 0; i < data_.chips.size(); ++i) chip_index_.emplace(data_.chips[i].id, i);
  for (std::size_t i = 0; i < data_.behaviors.size(); ++i) {
    behavior_index_.emplace(data_.behaviors[i].component, i);
  }

  auto add_net = [this](const std::string& name) {
    if (net_index_.emplace(name, net_names_.size()).second) net_names_.push_back(name);
  };
  for (const auto& n : data_.nets.inputs) add_net(n);
  for (const auto& b : data_.behaviors) add_net(b.output);
  for (const auto& b : data_.behaviors) {
    for (const auto& n : b.inputs) add_net(n);
  }
  for (const auto& n : data_.nets.outputs) add_net(n);
  inputs_.insert(data_.nets.inputs.begin(), data_.nets.inputs.end());
  outputs_.insert(data_.nets.outputs.begin(), data_.nets.outputs.end());

  drivers_.assign(net_names_.size(), std::nullopt);
  for (std::size_t i = 0; i < data_.behaviors.size(); ++i) {
    auto& slot = drivers_[net_index_.at(data_.behaviors[i].output)];
    if (!slot) slot = i;
  }

  // Topological order of gates; a gate is ready once every input net is a
  // primary input or driven by an already ordered gate.
  std::vector<std::size_t> pending_inputs(data_.behaviors.size(), 0);
  std::vector<std::vector<std::size_t>> readers(net_names_.size());
  std::vector<bool> net_ready(net_names_.size(), false);
  for (const auto& n : data_.nets.inputs) net_ready[net_index_.at(n)] = true;
  for (std::size_t i = 0; i < data_.behaviors.size(); ++i) {
    for (const auto& n : data_.behaviors[i].inputs) {
      const auto idx = net_index_.at(n);
      if (!net_ready[idx]) {
        ++pending_inputs[i];
        readers[idx].push_back(i);
      }
    }
  }
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < data_.behaviors.size(); ++i) {
    if (pending_inputs[i] == 0) queue.push_back(i);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto g = queue[head];
    const auto out = net_index_.at(data_.behaviors[g].output);
    if (drivers_[out] != g || net_ready[out]) continue;
    net_ready[out] = true;
    for (auto r : readers[out]) {
      if (--pending_inputs[r] == 0) queue.push_back(r);
    }
  }
  gate_order_.clear();
  for (auto g : queue) {
    if (drivers_[net_index_.at(data_.behaviors[g].output)] == g) gate_order_.push_back(g);
  }
  std::size_t driving = 0;
  for (const auto& d : drivers_) driving += d.has_value();
  acyclic_ = gate_order_.size() == driving;
  if (!acyclic_) gate_order_.clear();
}

const HierarchyNode& KnowledgeBase::element(const std::string& id) const {
  const auto it = element_index_.find(id);
  if (it == element_index_.end()) throw Error(ErrorCode::UnknownElement, "'" + id + "'");
  return data_.elements[it->second];
}

std::optional<std::string> KnowledgeBase::parent(const std::string& id) const {
  element(id);
  const auto it = parent_.find(id);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

std::size_t KnowledgeBase::depth(const std::string& id) const {
  std::size_t d = 0;
  for (auto p = parent(id); p; p = parent(*p)) {
    if (++d > data_.elements.size()) break;
  }
  return d;
}

std::size_t KnowledgeBase::height(const std::string& id) const {
  const auto& e = element(id);
  std::size_t h = 0;
  for (const auto& c : e.children) {
    if (has_element(c)) h = std::max(h, 1 + height(c));
  }
  return h;
}

bool KnowledgeBase::in_subtree(const std::string& id, const std::string& ancestor) const {
  if (!has_element(id)) return false;
  std::optional<std::string> cur = id;
  for (std::size_t guard = 0; cur && guard <= data_.elements.size(); ++guard) {
    if (*cur == ancestor) return true;
    cur = parent(*cur);
  }
  return false;
}

std::vector<std::string> KnowledgeBase::subtree(const std::string& id) const {
  std::vector<std::string> out;
  std::vector<std::string> stack{id};
  element(id);
  while (!stack.empty()) {
    auto cur = std::move(stack.back());
    stack.pop_back();
    if (!has_element(cur) || out.size() > data_.elements.size()) continue;
    const auto& e = element(cur);
    out.push_back(cur);
    for (auto it = e.children.rbegin(); it != e.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<std::string> KnowledgeBase::components_in(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& e : subtree(id)) {
    if (element(e).kind == ElementKind::Component) out.push_back(e);
  }
  return out;
}

double KnowledgeBase::subtree_prior_mass(const std::string& id) const {
  double mass = 0.0;
  for (const auto& c : components_in(id)) mass += element(c).failure_prior;
  return mass;
}

const Testpoint& KnowledgeBase::testpoint(const std::string& id) const {
  const auto it = testpoint_index_.find(id);
  if (it == testpoint_index_.end()) throw Error(ErrorCode::UnknownTestpoint, "'" + id + "'");
  return data_.testpoints[it->second];
}

std::optional<std::string> KnowledgeBase::output_net(const std::string& element_id) const {
  const auto& e = element(element_id);
  if (!e.output_testpoint || !has_testpoint(*e.output_testpoint)) return std::nullopt;
  return testpoint(*e.output_testpoint).net;
}

const Chip& KnowledgeBase::chip(const std::string& id) const {
  const auto it = chip_index_.find(id);
  if (it == chip_index_.end()) throw Error(ErrorCode::UnknownElement, "chip '" + id + "'");
  return data_.chips[it->second];
}

const ComponentBehavior* KnowledgeBase::behavior_of(const std::string& component) const {
  const auto it = behavior_index_.find(component);
  return it == behavior_index_.end() ? nullptr : &data_.behaviors[it->second];
}

std::size_t KnowledgeBase::net_index(const std::string& net) const {
  const auto it = net_index_.find(net);
  if (it == net_index_.end()) throw Error(ErrorCode::UnknownReference, "net '" + net + "'");
  return it->second;
}

bool KnowledgeBase::is_output(const std::string& net) const { return outputs_.count(net) > 0; }
bool KnowledgeBase::is_input(const std::string& net) const { return inputs_.count(net) > 0; }

std::set<std::string> KnowledgeBase::fanin_nets(const std::string& net) const {
  std::set<std::string> seen;
  std::vector<std::string> stack{net};
  while (!stack.empty()) {
    auto cur = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    const auto d = drivers_.at(net_index(cur));
    if (!d) continue;
    for (const auto& in : data_.behaviors[*d].inputs) stack.push_back(in);
  }
  return seen;
}

std::set<std::string> KnowledgeBase::fanin_components(const std::string& net) const {
  std::set<std::string> out;
  for (const auto& n : fanin_nets(net)) {
    if (const auto d = drivers_.at(net_index(n))) out.insert(data_.behaviors[*d].component);
  }
  return out;
}

double KnowledgeBase::fault_penalty() const {
  if (data_.cost_model.fault_penalty_F) return *data_.cost_model.fault_penalty_F;
  return 2.0 * repair_cost_complete(*this, root());
}

std::vector<std::uint8_t> KnowledgeBase::evaluate_nets(std::span<const std::uint8_t> bits) const {
  if (!acyclic_) throw Error(ErrorCode::InvalidArgument, "netlist has a combinational cycle");
  if (bits.size() != data_.nets.inputs.size()) {
    throw Error(ErrorCode::MissingInput, "expected " + std::to_string(data_.nets.inputs.size()) +
                                             " input bits");
  }
  std::vector<std::uint8_t> values(net_names_.size(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) values[i] = bits[i] ? 1 : 0;
  std::uint8_t in[2] = {0, 0};
  for (auto g : gate_order_) {
    const auto& b = data_.behaviors[g];
    for (std::size_t k = 0; k < b.inputs.size() && k < 2; ++k) {
      in[k] = values[net_index_.at(b.inputs[k])];
    }
    values[net_index_.at(b.output)] = eval_gate(b.gate, std::span(in, b.inputs.size())) ? 1 : 0;
  }
  return values;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, path + ": " + what);
}

const nlohmann::json& required(const nlohmann::json& obj, const char* key,
                               const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  if (!obj.contains(key)) schema_error(path + "/" + key, "required");
  return obj[key];
}

std::string string_field(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = required(obj, key, path);
  if (!v.is_string()) schema_error(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

double number_field(const nlohmann::json& obj, const char* key, const std::string& path,
                    std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    schema_error(path + "/" + key, "required");
  }
  const auto& v = obj[key];
  if (!v.is_number()) schema_error(path + "/" + key, "expected a number");
  return v.get<double>();
}

std::vector<std::string> string_list(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) schema_error(path + "/" + std::to_string(i), "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

void parse_hierarchy(const nlohmann::json& node, const std::string& path, KbData& kb,
                     std::size_t depth) {
  if (depth > 10'000) schema_error(path, "hierarchy too deep");
  HierarchyNode h;
  h.id = string_field(node, "id", path);
  const auto kind = string_field(node, "kind", path);
  if (kind == "subsystem") {
    h.kind = ElementKind::Subsystem;
  } else if (kind == "component") {
    h.kind = ElementKind::Component;
  } else {
    schema_error(path + "/kind", "must be subsystem or component");
  }
  h.inspection_cost = number_field(node, "inspection_cost", path, 0.0);
  h.replacement_cost = number_field(node, "replacement_cost", path);
  h.failure_prior = number_field(node, "failure_prior", path, 0.0);
  if (node.contains("output_testpoint") && !node["output_testpoint"].is_null()) {
    if (!node["output_testpoint"].is_string()) {
      schema_error(path + "/output_testpoint", "expected a string or null");
    }
    h.output_testpoint = node["output_testpoint"].get<std::string>();
  }
  const nlohmann::json empty = nlohmann::json::array();
  const auto& children = node.contains("children") ? node["children"] : empty;
  if (!children.is_array()) schema_error(path + "/children", "expected an array");
  for (const auto& c : children) {
    if (!c.is_object()) schema_error(path + "/children", "expected objects");
    h.children.push_back(string_field(c, "id", path + "/children"));
  }
  kb.elements.push_back(std::move(h));
  for (std::size_t i = 0; i < children.size(); ++i) {
    parse_hierarchy(children[i], path + "/children/" + std::to_string(i), kb, depth + 1);
  }
}

}  // namespace

KnowledgeBase kb_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) schema_error("", "knowledge base document must be an object");
  KbData kb;

  const auto& hierarchy = required(doc, "hierarchy", "");
  parse_hierarchy(hierarchy, "/hierarchy", kb, 0);
  kb.root = kb.elements.front().id;

  const auto& nets = required(doc, "nets", "");
  kb.nets.inputs = string_list(required(nets, "inputs", "/nets"), "/nets/inputs");
  kb.nets.outputs = string_list(required(nets, "outputs", "/nets"), "/nets/outputs");

  const auto& behaviors = required(doc, "behaviors", "");
  if (!behaviors.is_array()) schema_error("/behaviors", "expected an array");
  for (std::size_t i = 0; i < behaviors.size(); ++i) {
    const auto path = "/behaviors/" + std::to_string(i);
    ComponentBehavior b;
    b.component = string_field(behaviors[i], "component", path);
    const auto gate = gate_from_string(string_field(behaviors[i], "gate", path));
    if (!gate) schema_error(path + "/gate", "unknown gate type");
    b.gate = *gate;
    b.inputs = string_list(required(behaviors[i], "inputs", path), path + "/inputs");
    b.output = string_field(behaviors[i], "output", path);
    kb.behaviors.push_back(std::move(b));
  }

  const auto& testpoints = required(doc, "testpoints", "");
  if (!testpoints.is_array()) schema_error("/testpoints", "expected an array");
  for (std::size_t i = 0; i < testpoints.size(); ++i) {
    const auto path = "/testpoints/" + std::to_string(i);
    Testpoint t;
    t.id = string_field(testpoints[i], "id", path);
    t.net = string_field(testpoints[i], "net", path);
    t.probe_cost = number_field(testpoints[i], "probe_cost", path);
    kb.testpoints.push_back(std::move(t));
  }

  if (doc.contains("chips")) {
    const auto& chips = doc["chips"];
    if (!chips.is_array()) schema_error("/chips", "expected an array");
    for (std::size_t i = 0; i < chips.size(); ++i) {
      const auto path = "/chips/" + std::to_string(i);
      Chip c;
      c.id = string_field(chips[i], "id", path);
      const auto& pins = required(chips[i], "pins", path);
      if (!pins.is_array()) schema_error(path + "/pins", "expected an array");
      for (std::size_t k = 0; k < pins.size(); ++k) {
        const auto ppath = path + "/pins/" + std::to_string(k);
        const auto& num = required(pins[k], "number", ppath);
        if (!num.is_number_integer()) schema_error(ppath + "/number", "expected an integer");
        c.pins.push_back({num.get<int>(), string_field(pins[k], "net", ppath)});
      }
      const auto& priors = required(chips[i], "bridge_priors", path);
      if (!priors.is_array()) schema_error(path + "/bridge_priors", "expected an array");
      for (const auto& p : priors) {
        if (!p.is_number()) schema_error(path + "/bridge_priors", "expected numbers");
        c.bridge_priors.push_back(p.get<double>());
      }
      kb.chips.push_back(std::move(c));
    }
  }

  const auto& cm = required(doc, "cost_model", "");
  kb.cost_model.u = number_field(cm, "u", "/cost_model");
  if (cm.contains("fault_penalty_F") && !cm["fault_penalty_F"].is_null()) {
    kb.cost_model.fault_penalty_F = number_field(cm, "fault_penalty_F", "/cost_model");
  }
  kb.cost_model.pathway_prior_FL = number_field(cm, "pathway_prior_FL", "/cost_model");
  kb.cost_model.bridge_repair_cost = number_field(cm, "bridge_repair_cost", "/cost_model");
  kb.cost_model.chip_inspect_effort = number_field(cm, "chip_inspect_effort", "/cost_model");

  // Reference resolution.
  std::set<std::string> declared(kb.nets.inputs.begin(), kb.nets.inputs.end());
  for (const auto& b : kb.behaviors) declared.insert(b.output);
  std::set<std::string> element_ids;
  for (const auto& e : kb.elements) element_ids.insert(e.id);
  std::set<std::string> testpoint_ids;
  for (const auto& t : kb.testpoints) testpoint_ids.insert(t.id);
  auto require_net = [&declared](const std::string& net, const std::string& path) {
    if (!declared.count(net)) {
      throw Error(ErrorCode::UnknownReference, path + ": undeclared net '" + net + "'");
    }
  };
  for (std::size_t i = 0; i < kb.behaviors.size(); ++i) {
    const auto path = "/behaviors/" + std::to_string(i);
    if (!element_ids.count(kb.behaviors[i].component)) {
      throw Error(ErrorCode::UnknownReference,
                  path + ": unknown component '" + kb.behaviors[i].component + "'");
    }
    for (const auto& n : kb.behaviors[i].inputs) require_net(n, path + "/inputs");
  }
  for (const auto& n : kb.nets.outputs) require_net(n, "/nets/outputs");
  for (std::size_t i = 0; i < kb.testpoints.size(); ++i) {
    require_net(kb.testpoints[i].net, "/testpoints/" + std::to_string(i));
  }
  for (std::size_t i = 0; i < kb.chips.size(); ++i) {
    for (const auto& p : kb.chips[i].pins) require_net(p.net, "/chips/" + std::to_string(i));
  }
  for (const auto& e : kb.elements) {
    if (e.output_testpoint && !testpoint_ids.count(*e.output_testpoint)) {
      throw Error(ErrorCode::UnknownReference,
                  "/hierarchy: '" + e.id + "' names unknown testpoint '" + *e.output_testpoint + "'");
    }
  }
  return KnowledgeBase(std::move(kb));
}

KnowledgeBase parse_kb(const std::string& document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, e.what());
  }
  return kb_from_json(doc);
}

KnowledgeBase load_kb_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_kb(buffer.str());
}

namespace {

nlohmann::ordered_json hierarchy_to_json(const KnowledgeBase& kb, const std::string& id) {
  const auto& e = kb.element(id);
  nlohmann::ordered_json j;
  j["id"] = e.id;
  j["kind"] = to_string(e.kind);
  j["inspection_cost"] = e.inspection_cost;
  j["replacement_cost"] = e.replacement_cost;
  j["failure_prior"] = e.failure_prior;
  j["output_testpoint"] = e.output_testpoint ? nlohmann::ordered_json(*e.output_testpoint)
                                             : nlohmann::ordered_json(nullptr);
  j["children"] = nlohmann::ordered_json::array();
  for (const auto& c : e.children) j["children"].push_back(hierarchy_to_json(kb, c));
  return j;
}

}  // namespace

nlohmann::ordered_json kb_to_json(const KnowledgeBase& kb) {
  const auto& d = kb.data();
  nlohmann::ordered_json j;
  j["hierarchy"] = hierarchy_to_json(kb, d.root);
  j["behaviors"] = nlohmann::ordered_json::array();
  for (const auto& b : d.behaviors) {
    j["behaviors"].push_back({{"component", b.component},
                              {"gate", to_string(b.gate)},
                              {"inputs", b.inputs},
                              {"output", b.output}});
  }
  j["nets"] = {{"inputs", d.nets.inputs}, {"outputs", d.nets.outputs}};
  j["testpoints"] = nlohmann::ordered_json::array();
  for (const auto& t : d.testpoints) {
    j["testpoints"].push_back({{"id", t.id}, {"net", t.net}, {"probe_cost", t.probe_cost}});
  }
  j["chips"] = nlohmann::ordered_json::array();
  for (const auto& c : d.chips) {
    nlohmann::ordered_json pins = nlohmann::ordered_json::array();
    for (const auto& p : c.pins) pins.push_back({{"number", p.number}, {"net", p.net}});
    j["chips"].push_back({{"id", c.id}, {"pins", pins}, {"bridge_priors", c.bridge_priors}});
  }
  const auto& cm = d.cost_model;
  j["cost_model"] = {{"u", cm.u},
                     {"fault_penalty_F", cm.fault_penalty_F
                                             ? nlohmann::ordered_json(*cm.fault_penalty_F)
                                             : nlohmann::ordered_json(nullptr)},
                     {"pathway_prior_FL", cm.pathway_prior_FL},
                     {"bridge_repair_cost", cm.bridge_repair_cost},
                     {"chip_inspect_effort", cm.chip_inspect_effort}};
  return j;
}

std::string serialize_kb(const KnowledgeBase& kb) { return kb_to_json(kb).dump(2); }

// ---------------------------------------------------------------------------
// Validation

std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb) {
  std::vector<Diagnostic> out;
  auto report = [&out](std::string kind, std::string node, std::string message) {
    out.push_back({std::move(kind), std::move(node), std::move(message)});
  };
  const auto& d = kb.data();

  std::set<std::string> ids;
  for (const auto& e : d.elements) {
    if (!ids.insert(e.id).second) report("DuplicateElement", e.id, "element id declared twice");
  }
  std::map<std::string, int> parent_count;
  for (const auto& e : d.elements) {
    for (const auto& c : e.children) ++parent_count[c];
  }
  for (const auto& e : d.elements) {
    if (e.kind == ElementKind::Component && !e.children.empty()) {
      report("ComponentNotLeaf", e.id, "components must be leaves");
    }
    if (e.kind == ElementKind::Subsystem && e.children.empty()) {
      report("SubsystemWithoutChildren", e.id, "subsystems need at least one child");
    }
    if (parent_count[e.id] > 1) report("MultipleParents", e.id, "element has several parents");
    if (e.inspection_cost < 0 || e.replacement_cost < 0) {
      report("NegativeCost", e.id, "costs must be non-negative");
    }
    if (!(e.failure_prior >= 0.0 && e.failure_prior <= 1.0)) {
      report("PriorOutOfRange", e.id, "failure_prior must lie in [0,1]");
    }
    if (e.id != d.root && !e.output_testpoint) {
      report("MissingOutputTestpoint", e.id, "non-root elements need an output testpoint");
    }
    if (e.kind == ElementKind::Component && !kb.behavior_of(e.id)) {
      report("ComponentWithoutBehavior", e.id, "component has no gate behavior");
    }
  }

  std::set<std::string> behaved;
  for (const auto& b : d.behaviors) {
    if (!behaved.insert(b.component).second) {
      report("DuplicateBehavior", b.component, "component has several behaviors");
    }
    if (kb.has_element(b.component) && kb.element(b.component).kind != ElementKind::Component) {
      report("BehaviorOnSubsystem", b.component, "only components carry gate behavior");
    }
    if (b.inputs.size() != gate_arity(b.gate)) {
      report("GateArity", b.component,
             std::string(to_string(b.gate)) + " needs " + std::to_string(gate_arity(b.gate)) +
                 " inputs");
    }
  }

  std::map<std::string, int> sources;
  for (const auto& n : d.nets.inputs) ++sources[n];
  for (const auto& b : d.behaviors) ++sources[b.output];
  for (const auto& [net, count] : sources) {
    if (count > 1) report("MultipleDrivers", net, "net has " + std::to_string(count) + " drivers");
  }
  if (!kb.netlist_acyclic()) report("CombinationalCycle", "", "netlist contains a cycle");

  std::set<std::string> tp_ids;
  for (const auto& t : d.testpoints) {
    if (!tp_ids.insert(t.id).second) report("DuplicateTestpoint", t.id, "testpoint declared twice");
    if (t.probe_cost < 0) report("NegativeCost", t.id, "probe cost must be non-negative");
  }

  for (const auto& c : d.chips) {
    for (std::size_t i = 1; i < c.pins.size(); ++i) {
      if (c.pins[i].number <= c.pins[i - 1].number) {
        report("PinOrder", c.id, "pin numbers must be strictly increasing");
        break;
      }
    }
    const auto pairs = c.pins.empty() ? 0 : c.pins.size() - 1;
    if (c.bridge_priors.size() != pairs) {
      report("BridgePriorCount", c.id,
             "expected " + std::to_string(pairs) + " bridge priors (one per adjacent pair)");
    }
    for (double p : c.bridge_priors) {
      if (!(p >= 0.0 && p <= 1.0)) {
        report("PriorOutOfRange", c.id, "bridge priors must lie in [0,1]");
        break;
      }
    }
  }

  const auto& cm = d.cost_model;
  if (cm.u < 0 || cm.bridge_repair_cost < 0 || cm.chip_inspect_effort < 0 ||
      (cm.fault_penalty_F && *cm.fault_penalty_F < 0)) {
    report("CostModelRange", "cost_model", "costs must be non-negative");
  }
  if (!(cm.pathway_prior_FL >= 0.0 && cm.pathway_prior_FL <= 1.0)) {
    report("CostModelRange", "cost_model", "pathway_prior_FL must lie in [0,1]");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation

std::vector<std::uint8_t> input_bits(const KnowledgeBase& kb, const NetValues& inputs) {
  for (const auto& [net, value] : inputs) {
    if (!kb.is_input(net)) throw Error(ErrorCode::UnknownReference, "'" + net + "' is not an input");
    (void)value;
  }
  std::vector<std::uint8_t> bits;
  for (const auto& net : kb.nets().inputs) {
    const auto it = inputs.find(net);
    if (it == inputs.end()) throw Error(ErrorCode::MissingInput, "'" + net + "'");
    bits.push_back(it->second ? 1 : 0);
  }
  return bits;
}

NetValues golden_simulate(const KnowledgeBase& kb, const NetValues& inputs) {
  const auto values = kb.evaluate_nets(input_bits(kb, inputs));
  NetValues out;
  for (std::size_t i = 0; i < values.size(); ++i) out[kb.net_names()[i]] = values[i];
  return out;
}

NetValues parse_input_vector(const KnowledgeBase& kb, const std::string& csv) {
  NetValues out;
  std::stringstream ss(csv);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= kb.nets().inputs.size()) {
      throw Error(ErrorCode::InvalidArgument, "more bits than primary inputs");
    }
    if (item != "0" && item != "1") throw Error(ErrorCode::InvalidArgument, "bits must be 0 or 1");
    out[kb.nets().inputs[i++]] = item == "1";
  }
  if (i != kb.nets().inputs.size()) {
    throw Error(ErrorCode::MissingInput, "expected " + std::to_string(kb.nets().inputs.size()) +
                                             " bits, got " + std::to_string(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Repair costs

double repair_cost_complete(const KnowledgeBase& kb, const std::string& node) {
  const auto& e = kb.element(node);
  if (e.children.empty()) return e.replacement_cost;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : e.children) best = std::min(best, repair_cost_complete(kb, c));
  return e.inspection_cost + best;
}

double repair_cost_heuristic(const KnowledgeBase& kb, const std::string& node,
                             std::size_t horizon_depth) {
  if (horizon_depth == 0) {
    throw Error(ErrorCode::InvalidArgument, "horizon depth must be at least 1");
  }
  std::function<double(const std::string&, std::size_t)> expand =
      [&](const std::string& id, std::size_t depth) -> double {
    const auto& e = kb.element(id);
    if (e.children.empty() || depth == horizon_depth) return e.replacement_cost;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : e.children) best = std::min(best, expand(c, depth + 1));
    return e.inspection_cost + best;
  };
  return expand(node, 0);
}

}  // namespace hierdx
