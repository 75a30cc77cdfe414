#include "hierdx/functional_engine.hpp"

#include <algorithm>
#include <numeric>

#include "hierdx/error.hpp"

namespace hierdx {

double RepairCostConfig::cost(const KnowledgeBase& kb, const std::string& node) const {
  return mode == Mode::Complete ? repair_cost_complete(kb, node)
                                : repair_cost_heuristic(kb, node, horizon);
}

RepairCostConfig parse_repair_cost(const std::string& text) {
  RepairCostConfig c;
  if (text == "complete") return c;
  const std::string prefix = "heuristic:";
  if (text.rfind(prefix, 0) == 0) {
    const auto digits = text.substr(prefix.size());
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      const auto h = std::stoul(digits);
      if (h >= 1) {
        c.mode = RepairCostConfig::Mode::Heuristic;
        c.horizon = h;
        return c;
      }
    }
  }
  throw Error(ErrorCode::InvalidArgument,
              "repair cost must be 'complete' or 'heuristic:<h>' with h >= 1, got '" + text + "'");
}

double FunctionalEvidence::live_mass(const KnowledgeBase& kb, const std::string& node) const {
  double mass = 0.0;
  for (const auto& c : kb.components_in(node)) {
    if (live(c)) mass += kb.element(c).failure_prior;
  }
  return mass;
}

void FunctionalEvidence::exonerate(const std::set<std::string>& components) {
  exonerated.insert(components.begin(), components.end());
}

void FunctionalEvidence::exonerate_all_but(const KnowledgeBase& kb,
                                           const std::set<std::string>& suspects) {
  for (const auto& c : kb.components_in(kb.root())) {
    if (!suspects.count(c)) exonerated.insert(c);
  }
}

std::vector<std::string> discrepant_outputs(const KnowledgeBase& kb, const NetValues& inputs,
                                            const NetValues& observed) {
  const auto golden = golden_simulate(kb, inputs);
  std::vector<std::string> out;
  for (const auto& o : kb.nets().outputs) {
    const auto it = observed.find(o);
    if (it == observed.end()) throw Error(ErrorCode::MissingInput, "no observation for output '" + o + "'");
    if ((it->second != 0) != (golden.at(o) != 0)) out.push_back(o);
  }
  for (const auto& [net, value] : observed) {
    if (!kb.is_output(net)) {
      throw Error(ErrorCode::UnknownReference, "'" + net + "' is not a device output");
    }
    (void)value;
  }
  return out;
}

FunctionalEvidence initial_evidence(const KnowledgeBase& kb, const NetValues& inputs,
                                    const NetValues& observed) {
  FunctionalEvidence ev;
  for (const auto& o : discrepant_outputs(kb, inputs, observed)) {
    ev.exonerate_all_but(kb, kb.fanin_components(o));
    ev.not_ok_nets.push_back(o);
  }
  return ev;
}

namespace {

// Nets read inside `node`'s subtree but driven outside it.
std::set<std::string> subsystem_input_nets(const KnowledgeBase& kb, const std::string& node) {
  std::set<std::string> driven_inside;
  std::set<std::string> read;
  for (const auto& c : kb.components_in(node)) {
    if (const auto* b = kb.behavior_of(c)) {
      driven_inside.insert(b->output);
      read.insert(b->inputs.begin(), b->inputs.end());
    }
  }
  std::set<std::string> out;
  for (const auto& n : read) {
    if (!driven_inside.count(n)) out.insert(n);
  }
  return out;
}

Context children_context(const KnowledgeBase& kb, const std::string& node) {
  return {node, kb.element(node).children};
}

}  // namespace

Context initialize_context(const KnowledgeBase& kb, const NetValues& inputs,
                           const NetValues& observed) {
  const auto bad = discrepant_outputs(kb, inputs, observed);
  if (bad.empty()) throw Error(ErrorCode::NoFaultObserved, "observed outputs match the golden device");
  const std::set<std::string> bad_set(bad.begin(), bad.end());
  const auto& root = kb.element(kb.root());
  if (root.kind == ElementKind::Component) return {root.id, {root.id}};

  std::vector<std::string> best;
  std::size_t best_depth = 0;
  for (const auto& e : kb.data().elements) {
    if (e.kind != ElementKind::Subsystem) continue;
    const auto out = kb.output_net(e.id);
    if (!out || !bad_set.count(*out)) continue;
    const auto ins = subsystem_input_nets(kb, e.id);
    if (std::any_of(ins.begin(), ins.end(), [&](const auto& n) { return bad_set.count(n) > 0; })) {
      continue;
    }
    const auto d = kb.depth(e.id);
    if (best.empty() || d < best_depth) {
      best = {e.id};
      best_depth = d;
    } else if (d == best_depth) {
      best.push_back(e.id);
    }
  }
  if (best.size() > 1) {
    std::string names;
    for (const auto& b : best) names += (names.empty() ? "" : ", ") + b;
    throw Error(ErrorCode::AmbiguousRoot, "several faulted subsystems at depth " +
                                              std::to_string(best_depth) + ": " + names);
  }
  if (best.empty()) return children_context(kb, kb.root());
  return children_context(kb, best.front());
}

std::vector<std::string> enumerate_testpoints(const Context& ctx, const KnowledgeBase& kb,
                                              const std::set<std::string>& probed_nets) {
  std::vector<std::string> out;
  std::set<std::string> nets;
  for (const auto& e : ctx.elements) {
    const auto& tp = kb.element(e).output_testpoint;
    if (!tp || !kb.has_testpoint(*tp)) continue;
    const auto& net = kb.testpoint(*tp).net;
    if (kb.is_output(net) || probed_nets.count(net) || !nets.insert(net).second) continue;
    out.push_back(*tp);
  }
  return out;
}

std::vector<Treatment> enumerate_treatments(const Context& ctx, const KnowledgeBase& kb,
                                            const RepairCostConfig& repair) {
  std::vector<Treatment> out{{TreatmentKind::Nothing, "", 0, 0, 0.0}};
  for (const auto& id : ctx.elements) {
    const auto& e = kb.element(id);
    out.push_back({TreatmentKind::Replace, id, 0, 0, e.replacement_cost});
    if (e.kind == ElementKind::Subsystem) {
      out.push_back({TreatmentKind::Repair, id, 0, 0, repair.cost(kb, id)});
    }
  }
  return out;
}

std::set<std::string> cone_components(const KnowledgeBase& kb, const std::string& testpoint) {
  return kb.fanin_components(kb.testpoint(testpoint).net);
}

std::vector<double> context_beliefs(const Context& ctx, const KnowledgeBase& kb,
                                    const FunctionalEvidence& evidence) {
  std::vector<double> w;
  for (const auto& e : ctx.elements) w.push_back(evidence.live_mass(kb, e));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x = total > 0 ? x / total : 0.0;
  return w;
}

namespace {

void check_beliefs(const Context& ctx, const std::vector<double>& beliefs) {
  if (ctx.elements.empty()) throw Error(ErrorCode::InvalidArgument, "empty context");
  if (beliefs.size() != ctx.elements.size()) {
    throw Error(ErrorCode::LengthMismatch, "one belief per context element expected");
  }
  const double total = std::accumulate(beliefs.begin(), beliefs.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "beliefs must sum to 1");
  }
}

// P(R = not_ok | CS = element, Test = testpoint): the share of the element's
// live fault mass inside the testpoint's cone.
double not_ok_likelihood(const KnowledgeBase& kb, const std::string& element,
                         const std::set<std::string>& cone, const FunctionalEvidence* evidence) {
  auto comps = kb.components_in(element);
  if (evidence) {
    std::vector<std::string> live;
    for (const auto& c : comps) {
      if (evidence->live(c)) live.push_back(c);
    }
    if (!live.empty()) comps = std::move(live);
  }
  double mass = 0.0;
  double inside = 0.0;
  std::size_t count_inside = 0;
  for (const auto& c : comps) {
    const double p = kb.element(c).failure_prior;
    mass += p;
    if (cone.count(c)) {
      inside += p;
      ++count_inside;
    }
  }
  if (mass > 0) return inside / mass;
  return comps.empty() ? 0.0 : static_cast<double>(count_inside) / comps.size();
}

bool covers(const Treatment& t, const std::string& element) {
  return (t.kind == TreatmentKind::Replace || t.kind == TreatmentKind::Repair) &&
         t.target == element;
}

std::vector<std::string> treatment_labels(const std::vector<Treatment>& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(t.label());
  return out;
}

void add_outcome_nodes(InfluenceDiagram& d, const Context& ctx,
                       const std::vector<Treatment>& treatments) {
  std::vector<std::vector<double>> ns;
  for (const auto& e : ctx.elements) {
    for (const auto& t : treatments) {
      ns.push_back(covers(t, e) ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0});
    }
  }
  d.add_chance("NS", {"device_ok", "device_faulty"}, {"CS", "Treatment"}, std::move(ns));
}

}  // namespace

FunctionalDecisionModel build_functional_id(const Context& ctx, const KnowledgeBase& kb,
                                            const std::vector<double>& beliefs,
                                            const ModelOptions& options) {
  check_beliefs(ctx, beliefs);
  FunctionalDecisionModel m;
  m.testpoints = enumerate_testpoints(ctx, kb, options.probed_nets);
  if (m.testpoints.empty()) {
    throw Error(ErrorCode::EmptyAlternatives,
                "no testpoint available in the context of '" + ctx.faulted_parent + "'");
  }
  m.treatments = enumerate_treatments(ctx, kb, options.repair);
  const double penalty = kb.fault_penalty();

  auto& d = m.diagram;
  d.add_chance("CS", ctx.elements, {}, {beliefs});
  d.add_decision("Test", m.testpoints, {});
  std::vector<std::vector<double>> r;
  std::vector<std::set<std::string>> cones;
  for (const auto& t : m.testpoints) cones.push_back(cone_components(kb, t));
  for (const auto& e : ctx.elements) {
    for (const auto& cone : cones) {
      const double p = not_ok_likelihood(kb, e, cone, options.evidence);
      r.push_back({1.0 - p, p});
    }
  }
  d.add_chance("R", {"ok", "not_ok"}, {"CS", "Test"}, std::move(r));
  d.add_decision("Treatment", treatment_labels(m.treatments), {"Test", "R"});
  add_outcome_nodes(d, ctx, m.treatments);
  std::vector<double> v;
  for (const auto& tp : m.testpoints) {
    const double probe = kb.testpoint(tp).probe_cost;
    for (const auto& t : m.treatments) {
      v.push_back(probe + t.cost);
      v.push_back(probe + t.cost + penalty);
    }
  }
  d.add_value("V", {"Test", "Treatment", "NS"}, std::move(v));
  d.set_decision_order({"Test", "Treatment"});
  return m;
}

FunctionalDecisionModel build_treatment_only_id(const Context& ctx, const KnowledgeBase& kb,
                                                const std::vector<double>& beliefs,
                                                const ModelOptions& options) {
  check_beliefs(ctx, beliefs);
  FunctionalDecisionModel m;
  m.treatments = enumerate_treatments(ctx, kb, options.repair);
  m.treatments.erase(m.treatments.begin());  // "nothing"
  const double penalty = kb.fault_penalty();
  auto& d = m.diagram;
  d.add_chance("CS", ctx.elements, {}, {beliefs});
  d.add_decision("Treatment", treatment_labels(m.treatments), {});
  add_outcome_nodes(d, ctx, m.treatments);
  std::vector<double> v;
  for (const auto& t : m.treatments) {
    v.push_back(t.cost);
    v.push_back(t.cost + penalty);
  }
  d.add_value("V", {"Treatment", "NS"}, std::move(v));
  d.set_decision_order({"Treatment"});
  return m;
}

namespace {

const Treatment& find_treatment(const std::vector<Treatment>& ts, const std::string& label) {
  for (const auto& t : ts) {
    if (t.label() == label) return t;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown treatment '" + label + "'");
}

nlohmann::ordered_json context_json(const Context& ctx) {
  return {{"faulted_parent", ctx.faulted_parent}, {"elements", ctx.elements}};
}

StepOutcome execute(EngineIo& io, FunctionalState& state, const Treatment& t) {
  const auto& kb = io.kb;
  if (t.kind == TreatmentKind::Repair) {
    const auto& s = kb.element(t.target);
    io.oracle.expand(s);
    io.transcript.expanded(s.id, s.inspection_cost);
    state.context = children_context(kb, s.id);
    return {StepOutcome::Kind::Expanded, state.context, ""};
  }
  io.oracle.apply(t);
  io.transcript.treatment(t);
  if (io.oracle.device_ok()) return {StepOutcome::Kind::Resolved, {}, ""};
  if (t.kind == TreatmentKind::Replace) {
    const auto comps = kb.components_in(t.target);
    state.evidence.exonerate({comps.begin(), comps.end()});
    return {StepOutcome::Kind::Failed, {}, t.target};
  }
  // Leaving the device faulty is never accepted: the context stays open while
  // it holds live candidates. The next process probes a new net or treats.
  if (t.kind == TreatmentKind::Nothing) {
    const auto b = context_beliefs(state.context, kb, state.evidence);
    if (std::any_of(b.begin(), b.end(), [](double x) { return x > 0; })) {
      return {StepOutcome::Kind::Expanded, state.context, ""};
    }
  }
  return {StepOutcome::Kind::Failed, {}, state.context.faulted_parent};
}

}  // namespace

StepOutcome run_meta_process(EngineIo& io, FunctionalState& state,
                             const RepairCostConfig& repair) {
  const auto& kb = io.kb;
  const auto& ctx = state.context;
  ++state.processes;
  const auto beliefs = context_beliefs(ctx, kb, state.evidence);
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    if (beliefs[i] > 0) live.push_back(i);
  }
  if (live.empty()) return {StepOutcome::Kind::Failed, {}, ctx.faulted_parent};

  nlohmann::ordered_json summary{{"context", context_json(ctx)}, {"beliefs", beliefs}};

  if (live.size() == 1) {
    const auto& e = kb.element(ctx.elements[live.front()]);
    Treatment t{TreatmentKind::Replace, e.id, 0, 0, e.replacement_cost};
    if (e.kind == ElementKind::Subsystem) {
      const double rc = repair.cost(kb, e.id);
      if (rc < e.replacement_cost) t = {TreatmentKind::Repair, e.id, 0, 0, rc};
    }
    summary["model"] = "single_candidate";
    summary["treatment"] = t.label();
    io.transcript.model_built(std::move(summary));
    return execute(io, state, t);
  }

  ModelOptions options{repair, state.evidence.probed_nets, &state.evidence};
  if (enumerate_testpoints(ctx, kb, options.probed_nets).empty()) {
    const auto model = build_treatment_only_id(ctx, kb, beliefs, options);
    const auto sol = evaluate(model.diagram);
    const auto& choice = sol.policy.choose(model.diagram, "Treatment", {});
    summary["model"] = "treatment_only";
    summary["treatments"] = treatment_labels(model.treatments);
    summary["expected_cost"] = sol.expected_cost;
    summary["treatment"] = choice;
    io.transcript.model_built(std::move(summary));
    return execute(io, state, find_treatment(model.treatments, choice));
  }

  const auto model = build_functional_id(ctx, kb, beliefs, options);
  const auto sol = evaluate(model.diagram);
  const auto test = sol.policy.choose(model.diagram, "Test", {});
  summary["model"] = "functional";
  summary["testpoints"] = model.testpoints;
  summary["treatments"] = treatment_labels(model.treatments);
  summary["expected_cost"] = sol.expected_cost;
  summary["test"] = test;
  const std::string if_ok[] = {test, "ok"};
  const std::string if_not_ok[] = {test, "not_ok"};
  summary["policy"] = {{"ok", sol.policy.choose(model.diagram, "Treatment", if_ok)},
                       {"not_ok", sol.policy.choose(model.diagram, "Treatment", if_not_ok)}};
  io.transcript.model_built(std::move(summary));

  const auto& tp = kb.testpoint(test);
  const bool ok = io.oracle.probe_ok(tp);
  io.transcript.probe(tp.id, ok, tp.probe_cost);
  const auto cone = cone_components(kb, tp.id);
  state.evidence.probed_nets.insert(tp.net);
  if (ok) {
    state.evidence.exonerate(cone);
  } else {
    state.evidence.exonerate_all_but(kb, cone);
    state.evidence.not_ok_nets.push_back(tp.net);
  }
  const std::string observed[] = {test, ok ? "ok" : "not_ok"};
  const auto& choice = sol.policy.choose(model.diagram, "Treatment", observed);
  return execute(io, state, find_treatment(model.treatments, choice));
}

StepOutcome run_functional_component(EngineIo& io, FunctionalState& state,
                                     const RepairCostConfig& repair) {
  for (;;) {
    auto out = run_meta_process(io, state, repair);
    if (out.kind != StepOutcome::Kind::Expanded) return out;
  }
}

}  // namespace hierdx
