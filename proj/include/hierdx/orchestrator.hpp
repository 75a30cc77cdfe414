#pragma once

// Top-level loop: choose a causal pathway, run its component, and on failure
// update pathway beliefs and the functional horizon.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hierdx/bridge_engine.hpp"
#include "hierdx/functional_engine.hpp"
#include "hierdx/meta_level.hpp"
#include "hierdx/oracle.hpp"
#include "hierdx/transcript.hpp"

namespace hierdx {

struct DiagnosisConfig {
  RepairCostConfig repair;
  bool functional_info_filter = true;
  std::size_t alternation_cap = 8;
};

struct PathwayBeliefs {
  double fl = 0.0;
  double bfl = 0.0;
};

// P(FL) ∝ prior_fl x fl_remaining, P(BFL) ∝ (1 - prior_fl) x bfl_remaining,
// where the remaining terms are the surviving share of each pathway's fault
// mass. Throws Exhausted when both vanish.
PathwayBeliefs update_pathway_beliefs(double prior_fl, double fl_remaining, double bfl_remaining);

struct MetaRecord {
  LookaheadEstimate estimate;
  MetaChoice choice;
  double p_fl = 0.0;
  bool fl_available = true;
  bool bfl_available = true;
};

enum class DiagnosisOutcome { Running, DeviceOk, AssumptionViolation };

class DiagnosisSession {
 public:
  DiagnosisSession(const KnowledgeBase& kb, NetValues inputs, NetValues observed, Oracle& oracle,
                   DiagnosisConfig config = {});

  // Runs to a terminal event. Oracle exceptions (NeedAnswer) propagate and
  // leave the partial transcript in place.
  DiagnosisOutcome run();

  const Transcript& transcript() const noexcept { return transcript_; }
  DiagnosisOutcome outcome() const noexcept { return outcome_; }
  const std::vector<MetaRecord>& meta() const noexcept { return meta_; }
  const std::optional<Context>& context() const noexcept { return context_; }
  std::size_t component_steps() const noexcept;
  std::size_t meta_iterations() const noexcept { return meta_.size(); }
  const std::string& scope_root() const noexcept { return scope_root_; }
  const FunctionalState& functional_state() const noexcept { return fl_; }
  const BridgeState& bridge_state() const noexcept { return bfl_; }
  const std::set<std::string>& pruned() const noexcept { return pruned_; }
  PathwayBeliefs beliefs() const;
  const std::string& reason() const noexcept { return reason_; }

 private:
  void initialize();
  void violate(const std::string& reason);
  double fl_remaining() const;
  double bfl_remaining() const;
  std::vector<ChipCandidate> bridge_candidates() const;

  const KnowledgeBase& kb_;
  NetValues inputs_;
  NetValues observed_;
  Oracle& oracle_;
  DiagnosisConfig config_;
  Transcript transcript_;
  DiagnosisOutcome outcome_ = DiagnosisOutcome::Running;
  std::string reason_;

  std::string scope_root_;
  std::optional<Context> context_;
  FunctionalState fl_;
  BridgeState bfl_;
  Horizon horizon_;
  std::set<std::string> pruned_;
  double fl_initial_mass_ = 0.0;
  double bfl_initial_mass_ = 0.0;
  bool fl_exhausted_ = false;
  bool bfl_exhausted_ = false;
  std::vector<MetaRecord> meta_;
};

// The meta-level record the session would produce first for these
// observations. Throws NoFaultObserved when the outputs match the golden model.
MetaRecord first_meta_record(const KnowledgeBase& kb, const NetValues& inputs,
                             const NetValues& observed, const DiagnosisConfig& config = {});
// Estimate for an explicit horizon, before any evidence: unfiltered chips and
// the prior pathway belief.
MetaRecord horizon_meta_record(const KnowledgeBase& kb, const std::vector<std::string>& nodes);

// Global step bound: 2 x (hierarchy height + chips + 2).
std::size_t step_bound(const KnowledgeBase& kb);

struct SimulatedRun {
  DiagnosisOutcome outcome = DiagnosisOutcome::Running;
  Transcript transcript;
  CostLedger sim_ledger;
  std::size_t component_steps = 0;
  std::size_t meta_iterations = 0;
  NetValues inputs;
};

// Injects `fault`, observes the device on `inputs` (or on the first
// detecting vector when omitted) and diagnoses it against the simulator.
SimulatedRun simulate_diagnosis(const KnowledgeBase& kb, const std::optional<FaultSpec>& fault,
                                const std::optional<NetValues>& inputs,
                                const DiagnosisConfig& config = {},
                                std::uint64_t seed = kDefaultSimSeed);

}  // namespace hierdx
