#include "hierdx/device_simulator.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "hierdx/error.hpp"

namespace hierdx {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

int parse_pin(const std::string& s, const std::string& text) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::InvalidArgument, "bad pin number in fault spec '" + text + "'");
  }
  return std::stoi(s);
}

// Index of the first pin of the adjacent pair {a, b}, if any.
std::optional<std::size_t> adjacent_pair(const Chip& chip, int a, int b) {
  for (std::size_t i = 0; i + 1 < chip.pins.size(); ++i) {
    const int lo = chip.pins[i].number;
    const int hi = chip.pins[i + 1].number;
    if ((lo == a && hi == b) || (lo == b && hi == a)) return i;
  }
  return std::nullopt;
}

}  // namespace

FaultSpec parse_fault_spec(const std::string& text) {
  const auto parts = split(text, ':');
  FaultSpec f;
  if (parts.size() == 3 && parts[0] == "functional") {
    f.kind = FaultKind::Functional;
    f.target = parts[1];
    if (parts[2] == "sa0") {
      f.stuck_value = 0;
    } else if (parts[2] == "sa1") {
      f.stuck_value = 1;
    } else {
      throw Error(ErrorCode::InvalidArgument, "stuck mode must be sa0 or sa1 in '" + text + "'");
    }
  } else if (parts.size() == 4 && parts[0] == "bridge") {
    f.kind = FaultKind::Bridge;
    f.target = parts[1];
    const auto pins = split(parts[2], '-');
    if (pins.size() != 2) throw Error(ErrorCode::InvalidArgument, "expected <a>-<b> in '" + text + "'");
    f.pin_a = parse_pin(pins[0], text);
    f.pin_b = parse_pin(pins[1], text);
    if (parts[3] == "and") {
      f.wiring = Wiring::And;
    } else if (parts[3] == "or") {
      f.wiring = Wiring::Or;
    } else {
      throw Error(ErrorCode::InvalidArgument, "wiring must be and or or in '" + text + "'");
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unrecognized fault spec '" + text + "'");
  }
  if (f.target.empty()) throw Error(ErrorCode::InvalidArgument, "empty target in '" + text + "'");
  return f;
}

std::string to_string(const FaultSpec& f) {
  if (f.kind == FaultKind::Functional) {
    return "functional:" + f.target + (f.stuck_value ? ":sa1" : ":sa0");
  }
  return "bridge:" + f.target + ":" + std::to_string(f.pin_a) + "-" + std::to_string(f.pin_b) +
         (f.wiring == Wiring::And ? ":and" : ":or");
}

std::vector<FaultSpec> all_stuck_faults(const KnowledgeBase& kb) {
  std::vector<FaultSpec> out;
  for (const auto& e : kb.data().elements) {
    if (e.kind != ElementKind::Component) continue;
    for (int v = 0; v < 2; ++v) out.push_back({FaultKind::Functional, e.id, v, 0, 0, Wiring::And});
  }
  return out;
}

std::vector<FaultSpec> all_bridge_faults(const KnowledgeBase& kb, Wiring wiring) {
  std::vector<FaultSpec> out;
  for (const auto& c : kb.chips()) {
    for (std::size_t i = 0; i + 1 < c.pins.size(); ++i) {
      out.push_back({FaultKind::Bridge, c.id, 0, c.pins[i].number, c.pins[i + 1].number, wiring});
    }
  }
  return out;
}

const char* to_string(TreatmentKind kind) noexcept {
  switch (kind) {
    case TreatmentKind::Nothing: return "nothing";
    case TreatmentKind::Replace: return "replace";
    case TreatmentKind::Repair: return "repair";
    case TreatmentKind::RemoveBridge: return "remove_bridge";
  }
  return "?";
}

std::string Treatment::label() const {
  switch (kind) {
    case TreatmentKind::Nothing: return "nothing";
    case TreatmentKind::RemoveBridge:
      return "remove_bridge:" + target + ":" + std::to_string(pin_a) + "-" + std::to_string(pin_b);
    default: return std::string(to_string(kind)) + ":" + target;
  }
}

// ---------------------------------------------------------------------------

DeviceSim::DeviceSim(const KnowledgeBase& kb, std::optional<FaultSpec> fault, std::uint64_t seed)
    : kb_(&kb), injected_(std::move(fault)), seed_(seed) {
  if (!kb.netlist_acyclic()) {
    throw Error(ErrorCode::InvalidArgument, "cannot simulate a netlist with a combinational cycle");
  }
  for (const auto& n : kb.nets().inputs) inputs_[n] = 0;
  if (!injected_) return;
  const auto& f = *injected_;
  if (f.kind == FaultKind::Functional) {
    if (!kb.has_element(f.target) || kb.element(f.target).kind != ElementKind::Component ||
        !kb.behavior_of(f.target)) {
      throw Error(ErrorCode::UnknownElement, "no component '" + f.target + "'");
    }
    const auto& b = *kb.behavior_of(f.target);
    stuck_gate_ = kb.driver(kb.net_index(b.output));
  } else {
    const auto& chips = kb.chips();
    const auto it = std::find_if(chips.begin(), chips.end(),
                                 [&](const Chip& c) { return c.id == f.target; });
    if (it == chips.end()) throw Error(ErrorCode::UnknownElement, "no chip '" + f.target + "'");
    const auto pair = adjacent_pair(*it, f.pin_a, f.pin_b);
    if (!pair) {
      throw Error(ErrorCode::UnknownChipPair, f.target + " pins " + std::to_string(f.pin_a) + "-" +
                                                  std::to_string(f.pin_b) + " are not adjacent");
    }
    bridge_a_ = kb.net_index(it->pins[*pair].net);
    bridge_b_ = kb.net_index(it->pins[*pair + 1].net);
  }
  active_ = true;
}

void DeviceSim::set_inputs(const NetValues& inputs) {
  input_bits(*kb_, inputs);
  inputs_ = inputs;
}

std::uint8_t DeviceSim::read(const std::vector<std::uint8_t>& driven, std::size_t net) const {
  if (active_ && injected_->kind == FaultKind::Bridge && (net == bridge_a_ || net == bridge_b_)) {
    const auto a = driven[bridge_a_];
    const auto b = driven[bridge_b_];
    return injected_->wiring == Wiring::And ? (a & b) : (a | b);
  }
  return driven[net];
}

std::vector<std::uint8_t> DeviceSim::evaluate(std::span<const std::uint8_t> bits) const {
  if (!active_) return kb_->evaluate_nets(bits);
  const auto& kb = *kb_;
  if (bits.size() != kb.nets().inputs.size()) {
    throw Error(ErrorCode::MissingInput, "expected " + std::to_string(kb.nets().inputs.size()) +
                                             " input bits");
  }
  const auto& behaviors = kb.data().behaviors;
  std::vector<std::uint8_t> driven(kb.net_names().size(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) driven[i] = bits[i] ? 1 : 0;

  // A bridge can feed a gate's output back into its own fan-in, so iterate
  // to a fixpoint; the pass cap makes oscillating loops deterministic.
  const std::size_t max_passes = injected_->kind == FaultKind::Bridge ? kb.gate_order().size() + 2 : 1;
  std::uint8_t in[2] = {0, 0};
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool changed = false;
    for (auto g : kb.gate_order()) {
      const auto& b = behaviors[g];
      const auto out = kb.net_index(b.output);
      std::uint8_t value;
      if (stuck_gate_ && *stuck_gate_ == g) {
        value = static_cast<std::uint8_t>(injected_->stuck_value);
      } else {
        for (std::size_t k = 0; k < b.inputs.size(); ++k) in[k] = read(driven, kb.net_index(b.inputs[k]));
        value = eval_gate(b.gate, std::span(in, b.inputs.size())) ? 1 : 0;
      }
      if (driven[out] != value) {
        driven[out] = value;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::vector<std::uint8_t> seen(driven.size());
  for (std::size_t i = 0; i < driven.size(); ++i) seen[i] = read(driven, i);
  return seen;
}

NetValues DeviceSim::simulate(const NetValues& inputs) const {
  const auto values = evaluate(input_bits(*kb_, inputs));
  NetValues out;
  for (std::size_t i = 0; i < values.size(); ++i) out[kb_->net_names()[i]] = values[i];
  return out;
}

std::vector<int> DeviceSim::observe_outputs(const NetValues& inputs) const {
  const auto values = evaluate(input_bits(*kb_, inputs));
  std::vector<int> out;
  for (const auto& n : kb_->nets().outputs) out.push_back(values[kb_->net_index(n)]);
  return out;
}

ProbeResult DeviceSim::probe(const std::string& testpoint_id) {
  const auto& kb = *kb_;
  const auto& tp = kb.testpoint(testpoint_id);
  const auto target = kb.net_index(tp.net);

  // Cone of the faulty device: fan-in closure, crossing the bridge.
  std::vector<bool> in_cone(kb.net_names().size(), false);
  std::vector<std::size_t> stack{target};
  const bool bridged = active_ && injected_->kind == FaultKind::Bridge;
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    if (in_cone[n]) continue;
    in_cone[n] = true;
    if (bridged && n == bridge_a_) stack.push_back(bridge_b_);
    if (bridged && n == bridge_b_) stack.push_back(bridge_a_);
    if (const auto d = kb.driver(n)) {
      for (const auto& i : kb.data().behaviors[*d].inputs) stack.push_back(kb.net_index(i));
    }
  }
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < kb.nets().inputs.size(); ++i) {
    if (in_cone[i]) support.push_back(i);
  }
  if (support.size() > kMaxConeInputs) {
    throw Error(ErrorCode::ConeTooWide, testpoint_id + " depends on " +
                                            std::to_string(support.size()) + " inputs");
  }

  bool ok = true;
  if (active_) {
    std::vector<std::uint8_t> bits(kb.nets().inputs.size(), 0);
    for (std::uint64_t v = 0; ok && v < (std::uint64_t{1} << support.size()); ++v) {
      for (std::size_t k = 0; k < support.size(); ++k) bits[support[k]] = (v >> k) & 1U;
      ok = kb.evaluate_nets(bits)[target] == evaluate(bits)[target];
    }
  }

  ProbeResult r;
  r.testpoint = testpoint_id;
  r.measured_bit = evaluate(input_bits(kb, inputs_))[target];
  r.ok = ok;
  r.cost_charged = tp.probe_cost;
  ledger_.probes += tp.probe_cost;
  return r;
}

void DeviceSim::apply_treatment(const Treatment& t) {
  const auto& kb = *kb_;
  switch (t.kind) {
    case TreatmentKind::Nothing: break;
    case TreatmentKind::Replace:
      kb.element(t.target);
      if (active_ && injected_->kind == FaultKind::Functional &&
          kb.in_subtree(injected_->target, t.target)) {
        active_ = false;
      }
      break;
    case TreatmentKind::Repair:
      throw Error(ErrorCode::InvalidArgument, "repair is carried out by expanding the subsystem");
    case TreatmentKind::RemoveBridge: {
      const auto& chip = kb.chip(t.target);
      if (!adjacent_pair(chip, t.pin_a, t.pin_b)) {
        throw Error(ErrorCode::UnknownChipPair, t.label());
      }
      const auto& f = *injected_;
      if (active_ && f.kind == FaultKind::Bridge && f.target == t.target &&
          std::minmax(f.pin_a, f.pin_b) == std::minmax(t.pin_a, t.pin_b)) {
        active_ = false;
      }
      break;
    }
  }
  ledger_.treatments += t.cost;
  repair_log_.push_back(t);
}

ChipInspection DeviceSim::inspect_chip(const std::string& chip_id, double effort) {
  kb_->chip(chip_id);
  ledger_.effort += effort;
  ChipInspection r;
  if (active_ && injected_->kind == FaultKind::Bridge && injected_->target == chip_id) {
    r = {true, injected_->pin_a, injected_->pin_b};
    located_ = r;
  }
  return r;
}

std::vector<std::vector<std::uint8_t>> DeviceSim::default_vectors() const {
  const auto n = kb_->nets().inputs.size();
  std::vector<std::vector<std::uint8_t>> out;
  if (n <= kExhaustiveInputLimit) {
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) {
      std::vector<std::uint8_t> bits(n);
      for (std::size_t i = 0; i < n; ++i) bits[i] = (v >> (n - 1 - i)) & 1U;
      out.push_back(std::move(bits));
    }
    return out;
  }
  std::mt19937_64 rng(seed_);
  for (std::size_t k = 0; k < kSampledVectors; ++k) {
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = rng() & 1U;
    out.push_back(std::move(bits));
  }
  return out;
}

bool DeviceSim::outputs_match(std::span<const std::uint8_t> bits) const {
  if (!active_) return true;
  const auto golden = kb_->evaluate_nets(bits);
  const auto faulty = evaluate(bits);
  for (const auto& o : kb_->nets().outputs) {
    const auto i = kb_->net_index(o);
    if (golden[i] != faulty[i]) return false;
  }
  return true;
}

bool DeviceSim::device_ok() const {
  if (!active_) return true;
  for (const auto& bits : default_vectors()) {
    if (!outputs_match(bits)) return false;
  }
  return true;
}

bool DeviceSim::device_ok(const std::vector<NetValues>& vectors) const {
  for (const auto& v : vectors) {
    if (!outputs_match(input_bits(*kb_, v))) return false;
  }
  return true;
}

std::optional<NetValues> DeviceSim::detecting_inputs() const {
  for (const auto& bits : default_vectors()) {
    if (!outputs_match(bits)) {
      NetValues v;
      for (std::size_t i = 0; i < bits.size(); ++i) v[kb_->nets().inputs[i]] = bits[i];
      return v;
    }
  }
  return std::nullopt;
}

}  // namespace hierdx
