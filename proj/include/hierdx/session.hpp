#pragma once

// A diagnosis session driven step by step from outside: simulated sessions
// run against an injected fault, interactive ones pause for each answer the
// technician has to supply. Interactive runs are replayed from the start on
// every advance, which keeps them deterministic.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hierdx/orchestrator.hpp"

namespace hierdx {

enum class SessionMode { Simulated, Interactive };
enum class Phase { Running, AwaitingProbe, AwaitingActionResult, Done };

const char* to_string(SessionMode m) noexcept;
const char* to_string(Phase p) noexcept;

struct SessionRequest {
  std::shared_ptr<const KnowledgeBase> kb;
  SessionMode mode = SessionMode::Simulated;
  std::optional<FaultSpec> fault;
  std::optional<NetValues> inputs;
  std::optional<NetValues> observations;
  DiagnosisConfig config;
  std::uint64_t seed = kDefaultSimSeed;
};

// Parses {kb: object | path, mode, fault?, inputs?, observations?, seed?,
// repair_cost?, functional_info_filter?, alternation_cap?}.
SessionRequest parse_session_request(const nlohmann::json& body);

// Accepts "0,1,1", [0,1,1] or {"X1": 0, ...}.
NetValues parse_inputs(const KnowledgeBase& kb, const nlohmann::json& value);
// Same forms over the primary outputs.
NetValues parse_observations(const KnowledgeBase& kb, const nlohmann::json& value);

class Session {
 public:
  explicit Session(SessionRequest request);

  // Runs until the next question or the end. WrongPhase unless running.
  void advance();
  // {testpoint, ok} or {chip, found, pins?}. WrongPhase unless awaiting a
  // probe or when the answer names a different testpoint or chip.
  void probe_result(const nlohmann::json& body);
  // {device_ok}. WrongPhase unless awaiting an action result.
  void action_result(const nlohmann::json& body);

  Phase phase() const noexcept { return phase_; }
  SessionMode mode() const noexcept { return request_.mode; }
  const std::optional<Question>& pending() const noexcept { return pending_; }
  const Transcript& transcript() const noexcept { return transcript_; }
  DiagnosisOutcome outcome() const noexcept { return outcome_; }
  const NetValues& inputs() const noexcept { return inputs_; }
  const NetValues& observations() const noexcept { return observations_; }

  nlohmann::ordered_json state() const;

 private:
  void replay();

  SessionRequest request_;
  NetValues inputs_;
  NetValues observations_;
  Phase phase_ = Phase::Running;
  std::optional<Question> pending_;
  std::vector<Answer> answers_;
  Transcript transcript_;
  DiagnosisOutcome outcome_ = DiagnosisOutcome::Running;
  std::optional<Context> context_;
  std::set<std::string> pruned_;
  std::vector<MetaRecord> meta_;
  std::set<std::string> exonerated_;
  std::optional<std::string> last_treatment_;
  std::optional<CostLedger> sim_ledger_;
};

}  // namespace hierdx
