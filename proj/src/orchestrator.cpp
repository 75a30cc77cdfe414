#include "hierdx/orchestrator.hpp"

#include <algorithm>

#include "hierdx/error.hpp"

namespace hierdx {

PathwayBeliefs update_pathway_beliefs(double prior_fl, double fl_remaining, double bfl_remaining) {
  const double fl = prior_fl * std::max(0.0, fl_remaining);
  const double bfl = (1.0 - prior_fl) * std::max(0.0, bfl_remaining);
  if (!(fl + bfl > 0.0)) throw Error(ErrorCode::Exhausted, "both causal pathways are exhausted");
  return {fl / (fl + bfl), bfl / (fl + bfl)};
}

DiagnosisSession::DiagnosisSession(const KnowledgeBase& kb, NetValues inputs, NetValues observed,
                                   Oracle& oracle, DiagnosisConfig config)
    : kb_(kb),
      inputs_(std::move(inputs)),
      observed_(std::move(observed)),
      oracle_(oracle),
      config_(config) {}

std::size_t DiagnosisSession::component_steps() const noexcept {
  return fl_.processes + bfl_.inspections;
}

void DiagnosisSession::violate(const std::string& reason) {
  reason_ = reason;
  outcome_ = DiagnosisOutcome::AssumptionViolation;
  transcript_.assumption_violation(reason);
}

std::vector<ChipCandidate> DiagnosisSession::bridge_candidates() const {
  static const std::vector<std::string> kNoFilter;
  return filtered_candidates(kb_, config_.functional_info_filter ? fl_.evidence.not_ok_nets : kNoFilter,
                             bfl_.inspected);
}

double DiagnosisSession::fl_remaining() const {
  if (fl_exhausted_ || fl_initial_mass_ <= 0) return 0.0;
  return fl_.evidence.live_mass(kb_, scope_root_) / fl_initial_mass_;
}

double DiagnosisSession::bfl_remaining() const {
  if (bfl_exhausted_ || bfl_initial_mass_ <= 0) return 0.0;
  double mass = 0.0;
  for (const auto& c : bridge_candidates()) mass += c.mass;
  return mass / bfl_initial_mass_;
}

PathwayBeliefs DiagnosisSession::beliefs() const {
  return update_pathway_beliefs(kb_.cost_model().pathway_prior_FL, fl_remaining(), bfl_remaining());
}

void DiagnosisSession::initialize() {
  if (discrepant_outputs(kb_, inputs_, observed_).empty()) {
    violate("no fault observed at the device outputs");
    return;
  }
  fl_.evidence = initial_evidence(kb_, inputs_, observed_);
  Context ctx;
  try {
    ctx = initialize_context(kb_, inputs_, observed_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AmbiguousRoot) throw;
    // No single subsystem explains the outputs; a bridge still might.
    ctx = {kb_.root(), kb_.element(kb_.root()).children};
  }
  scope_root_ = ctx.faulted_parent;
  fl_.context = ctx;
  context_ = ctx;
  horizon_ = initial_horizon(kb_, scope_root_);
  fl_initial_mass_ = fl_.evidence.live_mass(kb_, scope_root_);
  fl_exhausted_ = fl_initial_mass_ <= 0;
  for (const auto& c : filtered_candidates(kb_, {}, {})) bfl_initial_mass_ += c.mass;
  bfl_exhausted_ = bfl_initial_mass_ <= 0;
}

DiagnosisOutcome DiagnosisSession::run() {
  if (outcome_ != DiagnosisOutcome::Running) return outcome_;
  if (scope_root_.empty()) {
    initialize();
    if (outcome_ != DiagnosisOutcome::Running) return outcome_;
  }
  const double u = kb_.cost_model().u;
  while (outcome_ == DiagnosisOutcome::Running) {
    if (meta_.size() >= config_.alternation_cap) {
      violate("alternation cap of " + std::to_string(config_.alternation_cap) + " reached");
      break;
    }
    if (fl_remaining() <= 0) fl_exhausted_ = true;
    if (bfl_remaining() <= 0) bfl_exhausted_ = true;
    if (fl_exhausted_ && bfl_exhausted_) {
      violate("both causal pathways exhausted without repairing the device");
      break;
    }
    const auto b = beliefs();
    const auto candidates = bridge_candidates();

    MetaRecord rec;
    rec.p_fl = b.fl;
    rec.fl_available = !fl_exhausted_;
    rec.bfl_available = !bfl_exhausted_;
    if (fl_exhausted_) {
      const auto y = compute_Y(candidates);
      rec.estimate.Y1 = y.Y1;
      rec.estimate.Y2 = y.Y2;
      rec.estimate.no_bridge_candidates = y.no_bridge_candidates;
    } else {
      rec.estimate = estimate_lookahead(kb_, horizon_, candidates);
    }
    rec.choice = choose_pathway(rec.estimate, u, b.fl);
    if (fl_exhausted_) rec.choice.chosen = Pathway::Bridge;
    if (bfl_exhausted_) rec.choice.chosen = Pathway::Functional;
    meta_.push_back(rec);
    transcript_.pathway_chosen(rec.choice.chosen, rec.choice.ev_fl, rec.choice.ev_bfl, b.fl);

    EngineIo io{kb_, oracle_, transcript_};
    if (rec.choice.chosen == Pathway::Functional) {
      const auto out = run_functional_component(io, fl_, config_.repair);
      context_ = fl_.context;
      if (out.kind == StepOutcome::Kind::Resolved) {
        transcript_.device_ok();
        outcome_ = DiagnosisOutcome::DeviceOk;
        break;
      }
      transcript_.component_failed(Pathway::Functional, out.node);
      try {
        horizon_ = functional_lookahead_horizon(kb_, scope_root_, out.node, fl_.evidence, pruned_);
        fl_.context = {horizon_.parent, horizon_.nodes};
        context_ = fl_.context;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Exhausted) throw;
        fl_exhausted_ = true;
      }
    } else {
      const auto out = run_bridge_component(io, bfl_, fl_.evidence.not_ok_nets,
                                            {config_.functional_info_filter});
      if (out.kind == StepOutcome::Kind::Resolved) {
        transcript_.device_ok();
        outcome_ = DiagnosisOutcome::DeviceOk;
        break;
      }
      transcript_.component_failed(Pathway::Bridge, out.node);
      bfl_exhausted_ = true;
    }
  }
  return outcome_;
}

MetaRecord first_meta_record(const KnowledgeBase& kb, const NetValues& inputs,
                             const NetValues& observed, const DiagnosisConfig& config) {
  if (discrepant_outputs(kb, inputs, observed).empty()) {
    throw Error(ErrorCode::NoFaultObserved, "observed outputs match the golden model");
  }
  ScriptedOracle silent({});
  DiagnosisSession s(kb, inputs, observed, silent, config);
  try {
    s.run();
  } catch (const NeedAnswer&) {
  }
  if (s.meta().empty()) throw Error(ErrorCode::Exhausted, "no pathway available: " + s.reason());
  return s.meta().front();
}

MetaRecord horizon_meta_record(const KnowledgeBase& kb, const std::vector<std::string>& nodes) {
  if (nodes.empty()) throw Error(ErrorCode::InvalidArgument, "horizon is empty");
  Horizon h;
  for (const auto& n : nodes) {
    kb.element(n);
    h.d_max = std::max(h.d_max, kb.height(n));
  }
  h.parent = kb.parent(nodes.front()).value_or(nodes.front());
  h.nodes = nodes;
  h.d = kb.tree_height();
  MetaRecord rec;
  rec.p_fl = kb.cost_model().pathway_prior_FL;
  const auto candidates = kb.chips().empty() ? std::vector<ChipCandidate>{}
                                             : filtered_candidates(kb, {}, {});
  rec.estimate = estimate_lookahead(kb, h, candidates);
  rec.choice = choose_pathway(rec.estimate, kb.cost_model().u, rec.p_fl);
  return rec;
}

std::size_t step_bound(const KnowledgeBase& kb) {
  return 2 * (kb.tree_height() + kb.chips().size() + 2);
}

SimulatedRun simulate_diagnosis(const KnowledgeBase& kb, const std::optional<FaultSpec>& fault,
                                const std::optional<NetValues>& inputs,
                                const DiagnosisConfig& config, std::uint64_t seed) {
  DeviceSim sim(kb, fault, seed);
  SimulatedRun run;
  if (inputs) {
    run.inputs = *inputs;
  } else if (auto detecting = sim.detecting_inputs()) {
    run.inputs = *detecting;
  } else {
    run.inputs = sim.inputs();
  }
  sim.set_inputs(run.inputs);
  const auto values = sim.simulate(run.inputs);
  NetValues observed;
  for (const auto& o : kb.nets().outputs) observed[o] = values.at(o);

  SimulatorOracle oracle(sim);
  DiagnosisSession session(kb, run.inputs, observed, oracle, config);
  run.outcome = session.run();
  run.transcript = session.transcript();
  run.sim_ledger = sim.ledger();
  run.component_steps = session.component_steps();
  run.meta_iterations = session.meta_iterations();
  return run;
}

}  // namespace hierdx
