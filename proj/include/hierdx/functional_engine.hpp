#pragma once

// Functional causal pathway: top-down elaboration of one-step decision models
// over the subsystem hierarchy.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hierdx/influence_diagram.hpp"
#include "hierdx/knowledge_base.hpp"
#include "hierdx/oracle.hpp"
#include "hierdx/transcript.hpp"

namespace hierdx {

struct Context {
  std::string faulted_parent;
  std::vector<std::string> elements;

  bool operator==(const Context&) const = default;
};

struct RepairCostConfig {
  enum class Mode { Complete, Heuristic } mode = Mode::Complete;
  std::size_t horizon = 1;

  double cost(const KnowledgeBase& kb, const std::string& node) const;
};

// "complete" or "heuristic:<h>".
RepairCostConfig parse_repair_cost(const std::string& text);

// Component-level fault evidence accumulated over a session. A component is
// live until some observation rules it out.
struct FunctionalEvidence {
  std::set<std::string> exonerated;
  std::set<std::string> probed_nets;
  // Device outputs and probed nets observed faulty.
  std::vector<std::string> not_ok_nets;

  bool live(const std::string& component) const { return !exonerated.count(component); }
  double live_mass(const KnowledgeBase& kb, const std::string& node) const;
  void exonerate(const std::set<std::string>& components);
  // Exonerates every component of the hierarchy outside `suspects`.
  void exonerate_all_but(const KnowledgeBase& kb, const std::set<std::string>& suspects);
};

// Device outputs whose observed value differs from the golden value.
std::vector<std::string> discrepant_outputs(const KnowledgeBase& kb, const NetValues& inputs,
                                            const NetValues& observed);

// Evidence implied by the initial observations: components outside the
// fan-in of a discrepant output are exonerated.
FunctionalEvidence initial_evidence(const KnowledgeBase& kb, const NetValues& inputs,
                                    const NetValues& observed);

Context initialize_context(const KnowledgeBase& kb, const NetValues& inputs,
                           const NetValues& observed);

std::vector<std::string> enumerate_testpoints(const Context& ctx, const KnowledgeBase& kb,
                                              const std::set<std::string>& probed_nets = {});

std::vector<Treatment> enumerate_treatments(const Context& ctx, const KnowledgeBase& kb,
                                            const RepairCostConfig& repair = {});

// Components whose gates lie in the testpoint's fan-in cone.
std::set<std::string> cone_components(const KnowledgeBase& kb, const std::string& testpoint);

// Normalized belief per context element, proportional to live fault mass.
// All zeros when no live mass remains.
std::vector<double> context_beliefs(const Context& ctx, const KnowledgeBase& kb,
                                    const FunctionalEvidence& evidence);

struct FunctionalDecisionModel {
  InfluenceDiagram diagram;
  std::vector<std::string> testpoints;  // empty for a treatment-only model
  std::vector<Treatment> treatments;
};

struct ModelOptions {
  RepairCostConfig repair;
  std::set<std::string> probed_nets;
  const FunctionalEvidence* evidence = nullptr;
};

// Throws EmptyAlternatives when the context offers no testpoint.
FunctionalDecisionModel build_functional_id(const Context& ctx, const KnowledgeBase& kb,
                                            const std::vector<double>& beliefs,
                                            const ModelOptions& options = {});

// Same model without the Test and R nodes and without "nothing", for
// contexts with nothing left to probe.
FunctionalDecisionModel build_treatment_only_id(const Context& ctx, const KnowledgeBase& kb,
                                                const std::vector<double>& beliefs,
                                                const ModelOptions& options = {});

struct StepOutcome {
  enum class Kind { Expanded, Resolved, Failed } kind = Kind::Resolved;
  Context next;      // Expanded: the context to continue in
  std::string node;  // Failed

  bool operator==(const StepOutcome&) const = default;
};

struct EngineIo {
  const KnowledgeBase& kb;
  Oracle& oracle;
  Transcript& transcript;
};

struct FunctionalState {
  Context context;
  FunctionalEvidence evidence;
  std::size_t processes = 0;
};

StepOutcome run_meta_process(EngineIo& io, FunctionalState& state,
                             const RepairCostConfig& repair = {});

// Resolved or Failed; never Expanded.
StepOutcome run_functional_component(EngineIo& io, FunctionalState& state,
                                     const RepairCostConfig& repair = {});

}  // namespace hierdx
