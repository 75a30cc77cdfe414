#pragma once

// Golden netlist plus at most one injected fault. Stands in for the physical
// device and the technician: answers probes, I/O checks and chip inspections
// and records every cost it is charged.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hierdx/knowledge_base.hpp"

namespace hierdx {

enum class FaultKind { Functional, Bridge };
enum class Wiring { And, Or };

struct FaultSpec {
  FaultKind kind = FaultKind::Functional;
  std::string target;  // component id or chip id
  int stuck_value = 0;
  int pin_a = 0;
  int pin_b = 0;
  Wiring wiring = Wiring::And;

  bool operator==(const FaultSpec&) const = default;
};

// "functional:<element>:<sa0|sa1>" or "bridge:<chip>:<a>-<b>:<and|or>".
FaultSpec parse_fault_spec(const std::string& text);
std::string to_string(const FaultSpec& fault);

// Every single stuck-at fault on every component.
std::vector<FaultSpec> all_stuck_faults(const KnowledgeBase& kb);
// Every adjacent-pair bridge on every chip with the given wiring.
std::vector<FaultSpec> all_bridge_faults(const KnowledgeBase& kb, Wiring wiring);

enum class TreatmentKind { Nothing, Replace, Repair, RemoveBridge };

const char* to_string(TreatmentKind kind) noexcept;

struct Treatment {
  TreatmentKind kind = TreatmentKind::Nothing;
  std::string target;  // element or chip; empty for Nothing
  int pin_a = 0;
  int pin_b = 0;
  double cost = 0.0;

  // "nothing", "replace:X", "repair:X", "remove_bridge:CHIP:a-b".
  std::string label() const;
  bool operator==(const Treatment&) const = default;
};

struct CostLedger {
  double probes = 0.0;
  double treatments = 0.0;
  double inspections = 0.0;
  double effort = 0.0;

  double total() const { return probes + treatments + inspections + effort; }
  bool operator==(const CostLedger&) const = default;
};

struct ProbeResult {
  std::string testpoint;
  int measured_bit = 0;
  bool ok = true;
  double cost_charged = 0.0;
};

struct ChipInspection {
  bool found = false;
  int pin_a = 0;
  int pin_b = 0;
};

inline constexpr std::uint64_t kDefaultSimSeed = 0x5eed'0001ULL;
inline constexpr std::size_t kMaxConeInputs = 20;
inline constexpr std::size_t kExhaustiveInputLimit = 12;
inline constexpr std::size_t kSampledVectors = 256;

class DeviceSim {
 public:
  // Throws UnknownElement / UnknownChipPair for dangling fault references.
  DeviceSim(const KnowledgeBase& kb, std::optional<FaultSpec> fault,
            std::uint64_t seed = kDefaultSimSeed);

  const KnowledgeBase& kb() const noexcept { return *kb_; }
  const std::optional<FaultSpec>& injected() const noexcept { return injected_; }
  bool fault_active() const noexcept { return active_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Inputs used for measured bits. Defaults to all zeros.
  void set_inputs(const NetValues& inputs);
  const NetValues& inputs() const noexcept { return inputs_; }

  // Value seen by a reader of every net, indexed like kb.net_names().
  std::vector<std::uint8_t> evaluate(std::span<const std::uint8_t> input_bits) const;
  NetValues simulate(const NetValues& inputs) const;
  // Observed device outputs, in declared output order.
  std::vector<int> observe_outputs(const NetValues& inputs) const;

  ProbeResult probe(const std::string& testpoint);
  void apply_treatment(const Treatment& treatment);
  void charge_inspection(double cost) { ledger_.inspections += cost; }
  ChipInspection inspect_chip(const std::string& chip, double effort);

  bool device_ok() const;
  bool device_ok(const std::vector<NetValues>& vectors) const;
  // Default vector set: exhaustive up to kExhaustiveInputLimit inputs, else
  // kSampledVectors seeded random vectors.
  std::vector<std::vector<std::uint8_t>> default_vectors() const;

  // First default vector on which the device outputs differ from golden.
  std::optional<NetValues> detecting_inputs() const;

  const CostLedger& ledger() const noexcept { return ledger_; }
  double cumulative_probe_cost() const noexcept { return ledger_.probes; }
  const std::vector<Treatment>& repair_log() const noexcept { return repair_log_; }

 private:
  std::uint8_t read(const std::vector<std::uint8_t>& driven, std::size_t net) const;
  bool outputs_match(std::span<const std::uint8_t> bits) const;

  const KnowledgeBase* kb_;
  std::optional<FaultSpec> injected_;
  bool active_ = false;
  std::uint64_t seed_;
  NetValues inputs_;
  // Resolved fault data.
  std::optional<std::size_t> stuck_gate_;
  std::size_t bridge_a_ = 0;
  std::size_t bridge_b_ = 0;
  CostLedger ledger_;
  std::vector<Treatment> repair_log_;
  std::optional<ChipInspection> located_;
};

}  // namespace hierdx
