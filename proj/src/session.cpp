#include "hierdx/session.hpp"

#include "hierdx/error.hpp"

namespace hierdx {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(SessionMode m) noexcept {
  return m == SessionMode::Simulated ? "simulated" : "interactive";
}

const char* to_string(Phase p) noexcept {
  switch (p) {
    case Phase::Running: return "running";
    case Phase::AwaitingProbe: return "awaiting_probe";
    case Phase::AwaitingActionResult: return "awaiting_action_result";
    case Phase::Done: return "done";
  }
  return "?";
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

const json& field(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key)) bad(std::string("missing field '") + key + "'");
  return body.at(key);
}

bool bool_field(const json& body, const char* key) {
  const auto& v = field(body, key);
  if (!v.is_boolean()) bad(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string string_field(const json& body, const char* key) {
  const auto& v = field(body, key);
  if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

NetValues parse_net_map(const KnowledgeBase& kb, const json& value, bool outputs) {
  NetValues out;
  for (const auto& [net, bit] : value.items()) {
    if (outputs ? !kb.is_output(net) : !kb.is_input(net)) {
      throw Error(ErrorCode::UnknownReference,
                  "'" + net + "' is not a primary " + (outputs ? "output" : "input"));
    }
    if (!bit.is_number_integer() || (bit.get<int>() != 0 && bit.get<int>() != 1)) {
      bad("value of '" + net + "' must be 0 or 1");
    }
    out[net] = bit.get<int>();
  }
  const auto& expected = outputs ? kb.nets().outputs : kb.nets().inputs;
  for (const auto& n : expected) {
    if (!out.count(n)) throw Error(ErrorCode::MissingInput, "no value for '" + n + "'");
  }
  return out;
}

ordered_json context_tree(const KnowledgeBase& kb, const std::string& id,
                          const std::optional<Context>& ctx, const std::set<std::string>& pruned,
                          const FunctionalEvidence* evidence) {
  const auto& e = kb.element(id);
  ordered_json n{{"id", id}, {"kind", to_string(e.kind)}};
  bool in_context = false;
  if (ctx) {
    for (const auto& c : ctx->elements) in_context = in_context || c == id;
    n["faulted_parent"] = ctx->faulted_parent == id;
  } else {
    n["faulted_parent"] = false;
  }
  n["in_context"] = in_context;
  n["pruned"] = pruned.count(id) > 0;
  if (evidence) n["live"] = evidence->live_mass(kb, id) > 0;
  if (!e.children.empty()) {
    ordered_json kids = ordered_json::array();
    for (const auto& c : e.children) kids.push_back(context_tree(kb, c, ctx, pruned, evidence));
    n["children"] = std::move(kids);
  }
  return n;
}

// The repair whose expansion the engine is currently working through.
std::optional<std::string> treatment_in_progress(const Transcript& t) {
  std::optional<std::string> decided;
  std::optional<std::string> active;
  const ordered_json* model = nullptr;
  for (const auto& e : t.events()) {
    const auto& kind = e["event"];
    if (kind == "ModelBuilt") {
      model = &e;
      if (e.contains("treatment") && e["model"] != "bridge") decided = e["treatment"].get<std::string>();
    } else if (kind == "Probe" && model && model->contains("policy")) {
      decided = (*model)["policy"][e["result"].get<std::string>()].get<std::string>();
    } else if (kind == "Expanded" && decided) {
      active = decided;
    } else if (kind == "Treatment" || kind == "ComponentFailed" || kind == "PathwayChosen") {
      active.reset();
    }
  }
  return active;
}

}  // namespace

NetValues parse_observations(const KnowledgeBase& kb, const json& value) {
  if (value.is_object()) return parse_net_map(kb, value, true);
  std::vector<int> bits;
  if (value.is_string()) {
    std::string s = value.get<std::string>();
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto comma = s.find(',', pos);
      const auto tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (tok != "0" && tok != "1") bad("observation bits must be 0 or 1");
      bits.push_back(tok == "1");
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  } else if (value.is_array()) {
    for (const auto& b : value) {
      if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1)) {
        bad("observation bits must be 0 or 1");
      }
      bits.push_back(b.get<int>());
    }
  } else {
    bad("observations must be a string, array or object");
  }
  const auto& outs = kb.nets().outputs;
  if (bits.size() != outs.size()) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(outs.size()) +
                                               " output bits, got " + std::to_string(bits.size()));
  }
  NetValues out;
  for (std::size_t i = 0; i < outs.size(); ++i) out[outs[i]] = bits[i];
  return out;
}

NetValues parse_inputs(const KnowledgeBase& kb, const json& value) {
  if (value.is_string()) return parse_input_vector(kb, value.get<std::string>());
  if (value.is_object()) return parse_net_map(kb, value, false);
  if (value.is_array()) {
    std::string csv;
    for (const auto& b : value) {
      if (!b.is_number_integer()) bad("input bits must be integers");
      if (!csv.empty()) csv += ',';
      csv += std::to_string(b.get<int>());
    }
    return parse_input_vector(kb, csv);
  }
  bad("inputs must be a string, array or object");
}

SessionRequest parse_session_request(const json& body) {
  if (!body.is_object()) bad("request body must be a JSON object");
  SessionRequest r;
  const auto& kb = field(body, "kb");
  if (kb.is_string()) {
    r.kb = std::make_shared<KnowledgeBase>(load_kb_file(kb.get<std::string>()));
  } else if (kb.is_object()) {
    r.kb = std::make_shared<KnowledgeBase>(kb_from_json(kb));
  } else {
    bad("'kb' must be a path or an inline knowledge base");
  }
  const auto diags = validate_kb(*r.kb);
  if (!diags.empty()) {
    throw Error(ErrorCode::SchemaViolation,
                "knowledge base is invalid: " + diags.front().kind + " at '" + diags.front().node +
                    "': " + diags.front().message);
  }
  if (body.contains("mode")) {
    const auto mode = string_field(body, "mode");
    if (mode == "simulated") {
      r.mode = SessionMode::Simulated;
    } else if (mode == "interactive") {
      r.mode = SessionMode::Interactive;
    } else {
      bad("mode must be 'simulated' or 'interactive'");
    }
  }
  if (body.contains("fault") && !body["fault"].is_null()) {
    r.fault = parse_fault_spec(string_field(body, "fault"));
    DeviceSim probe_refs(*r.kb, r.fault);  // rejects dangling references
  }
  if (body.contains("inputs") && !body["inputs"].is_null()) r.inputs = parse_inputs(*r.kb, body["inputs"]);
  if (body.contains("observations") && !body["observations"].is_null()) {
    r.observations = parse_observations(*r.kb, body["observations"]);
  }
  if (body.contains("seed")) {
    if (!body["seed"].is_number_unsigned()) bad("seed must be a non-negative integer");
    r.seed = body["seed"].get<std::uint64_t>();
  }
  if (body.contains("repair_cost")) r.config.repair = parse_repair_cost(string_field(body, "repair_cost"));
  if (body.contains("functional_info_filter")) {
    r.config.functional_info_filter = bool_field(body, "functional_info_filter");
  }
  if (body.contains("alternation_cap")) {
    if (!body["alternation_cap"].is_number_unsigned() || body["alternation_cap"].get<std::size_t>() == 0) {
      bad("alternation_cap must be a positive integer");
    }
    r.config.alternation_cap = body["alternation_cap"].get<std::size_t>();
  }
  if (r.mode == SessionMode::Simulated && r.observations) {
    bad("simulated sessions derive observations from the injected fault");
  }
  if (r.mode == SessionMode::Interactive && !r.observations && !r.fault) {
    bad("interactive sessions need observations");
  }
  if (r.mode == SessionMode::Interactive && r.observations && !r.inputs) {
    throw Error(ErrorCode::MissingInput, "observations need the input vector they were taken on");
  }
  return r;
}

Session::Session(SessionRequest request) : request_(std::move(request)) {
  if (!request_.kb) bad("session needs a knowledge base");
  const auto& kb = *request_.kb;
  if (request_.observations) {
    inputs_ = *request_.inputs;
    observations_ = *request_.observations;
    return;
  }
  DeviceSim sim(kb, request_.fault, request_.seed);
  if (request_.inputs) {
    inputs_ = *request_.inputs;
  } else if (auto detecting = sim.detecting_inputs()) {
    inputs_ = *detecting;
  } else {
    inputs_ = sim.inputs();
    for (const auto& n : kb.nets().inputs) inputs_.emplace(n, 0);
  }
  const auto values = sim.simulate(inputs_);
  for (const auto& o : kb.nets().outputs) observations_[o] = values.at(o);
}

void Session::replay() {
  const auto& kb = *request_.kb;
  auto capture = [&](const DiagnosisSession& s) {
    transcript_ = s.transcript();
    outcome_ = s.outcome();
    context_ = s.context();
    pruned_ = s.pruned();
    meta_ = s.meta();
    exonerated_ = s.functional_state().evidence.exonerated;
  };
  if (request_.mode == SessionMode::Simulated) {
    DeviceSim sim(kb, request_.fault, request_.seed);
    sim.set_inputs(inputs_);
    SimulatorOracle oracle(sim);
    DiagnosisSession s(kb, inputs_, observations_, oracle, request_.config);
    s.run();
    capture(s);
    sim_ledger_ = sim.ledger();
    pending_.reset();
    phase_ = Phase::Done;
    return;
  }
  ScriptedOracle oracle(answers_);
  DiagnosisSession s(kb, inputs_, observations_, oracle, request_.config);
  try {
    s.run();
    capture(s);
    pending_.reset();
    last_treatment_.reset();
    phase_ = Phase::Done;
  } catch (const NeedAnswer& need) {
    capture(s);
    pending_ = need.question();
    last_treatment_.reset();
    if (!oracle.applied().empty()) last_treatment_ = oracle.applied().back().label();
    phase_ = need.question().kind == QuestionKind::DeviceOk ? Phase::AwaitingActionResult
                                                            : Phase::AwaitingProbe;
  }
}

void Session::advance() {
  if (phase_ != Phase::Running) {
    throw Error(ErrorCode::WrongPhase, std::string("cannot advance while ") + to_string(phase_));
  }
  replay();
}

void Session::probe_result(const json& body) {
  if (phase_ != Phase::AwaitingProbe || !pending_) {
    throw Error(ErrorCode::WrongPhase, std::string("no probe result expected while ") + to_string(phase_));
  }
  if (!body.is_object()) bad("request body must be a JSON object");
  Answer a;
  if (pending_->kind == QuestionKind::Probe) {
    const auto tp = string_field(body, "testpoint");
    const bool ok = bool_field(body, "ok");
    if (tp != pending_->subject) {
      throw Error(ErrorCode::WrongPhase, "expected a result for testpoint '" + pending_->subject +
                                             "', got '" + tp + "'");
    }
    a.value = ok;
  } else {
    const auto chip = string_field(body, "chip");
    const bool found = bool_field(body, "found");
    if (chip != pending_->subject) {
      throw Error(ErrorCode::WrongPhase, "expected a result for chip '" + pending_->subject +
                                             "', got '" + chip + "'");
    }
    a.value = found;
    if (found && body.contains("pins") && !body["pins"].is_null()) {
      const auto& p = body["pins"];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
        bad("pins must be a pair of pin numbers");
      }
      const int pa = p[0].get<int>();
      const int pb = p[1].get<int>();
      const auto& c = request_.kb->chip(chip);
      for (std::size_t i = 0; i + 1 < c.pins.size(); ++i) {
        const int x = c.pins[i].number;
        const int y = c.pins[i + 1].number;
        if ((x == pa && y == pb) || (x == pb && y == pa)) a.pins = std::make_pair(x, y);
      }
      if (!a.pins) {
        throw Error(ErrorCode::UnknownChipPair, "pins " + std::to_string(pa) + "-" +
                                                    std::to_string(pb) + " are not adjacent on '" +
                                                    chip + "'");
      }
    }
  }
  a.question = *pending_;
  answers_.push_back(std::move(a));
  pending_.reset();
  phase_ = Phase::Running;
}

void Session::action_result(const json& body) {
  if (phase_ != Phase::AwaitingActionResult || !pending_) {
    throw Error(ErrorCode::WrongPhase, std::string("no action result expected while ") + to_string(phase_));
  }
  const bool ok = bool_field(body, "device_ok");
  answers_.push_back({*pending_, ok, std::nullopt});
  pending_.reset();
  phase_ = Phase::Running;
}

ordered_json Session::state() const {
  const auto& kb = *request_.kb;
  ordered_json s;
  s["mode"] = to_string(request_.mode);
  s["phase"] = to_string(phase_);
  if (pending_) {
    ordered_json p{{"kind", to_string(pending_->kind)}};
    if (pending_->kind == QuestionKind::Probe) p["testpoint"] = pending_->subject;
    if (pending_->kind == QuestionKind::Chip) p["chip"] = pending_->subject;
    s["pending"] = std::move(p);
  } else {
    s["pending"] = nullptr;
  }
  s["inputs"] = inputs_;
  s["observations"] = observations_;

  ordered_json rec;
  if (phase_ == Phase::AwaitingProbe && pending_) {
    if (pending_->kind == QuestionKind::Probe) {
      rec["action"] = "probe";
      rec["testpoint"] = pending_->subject;
      const auto& tp = kb.testpoint(pending_->subject);
      rec["net"] = tp.net;
      rec["cost"] = tp.probe_cost;
    } else {
      rec["action"] = "inspect_chip";
      rec["chip"] = pending_->subject;
    }
    for (auto it = transcript_.events().rbegin(); it != transcript_.events().rend(); ++it) {
      if ((*it)["event"] != "ModelBuilt") continue;
      if (it->contains("policy")) rec["policy"] = (*it)["policy"];
      if (it->contains("expected_cost")) rec["expected_cost"] = (*it)["expected_cost"];
      break;
    }
    if (const auto t = treatment_in_progress(transcript_)) rec["treatment"] = *t;
  } else if (phase_ == Phase::AwaitingActionResult) {
    rec["action"] = "apply_treatment";
    rec["treatment"] = last_treatment_.value_or("nothing");
  } else if (phase_ == Phase::Running) {
    rec["action"] = "advance";
  } else {
    rec["action"] = "none";
  }
  s["recommendation"] = rec;

  if (outcome_ != DiagnosisOutcome::Running) {
    s["outcome"] = outcome_ == DiagnosisOutcome::DeviceOk ? "device_ok" : "assumption_violation";
  } else {
    s["outcome"] = nullptr;
  }
  s["ledger"] = ledger_to_json(transcript_.ledger());
  if (sim_ledger_) s["sim_ledger"] = ledger_to_json(*sim_ledger_);

  FunctionalEvidence ev;
  ev.exonerated = exonerated_;
  s["context_tree"] = context_tree(kb, kb.root(), context_, pruned_, &ev);

  ordered_json meta = ordered_json::array();
  for (const auto& m : meta_) {
    auto e = estimate_to_json(m.estimate, kb.cost_model().u, m.choice);
    e["P_FL"] = m.p_fl;
    meta.push_back(std::move(e));
  }
  s["meta_estimates"] = std::move(meta);
  s["transcript"] = transcript_.events();
  return s;
}

}  // namespace hierdx
