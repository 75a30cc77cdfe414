#include "hierdx/transcript.hpp"

#include "hierdx/error.hpp"

namespace hierdx {

const char* to_string(Pathway p) noexcept { return p == Pathway::Functional ? "FL" : "BFL"; }

void Transcript::append(nlohmann::ordered_json event) {
  if (terminated_) throw Error(ErrorCode::InvalidArgument, "transcript already terminated");
  events_.push_back(std::move(event));
}

void Transcript::pathway_chosen(Pathway p, double ev_fl, double ev_bfl, double p_fl) {
  append({{"event", "PathwayChosen"},
          {"pathway", to_string(p)},
          {"EV_FL", ev_fl},
          {"EV_BFL", ev_bfl},
          {"P_FL", p_fl}});
}

void Transcript::model_built(nlohmann::ordered_json summary) {
  nlohmann::ordered_json e{{"event", "ModelBuilt"}};
  for (auto& [k, v] : summary.items()) e[k] = v;
  append(std::move(e));
}

void Transcript::probe(const std::string& testpoint, bool ok, double cost) {
  ledger_.probes += cost;
  append({{"event", "Probe"}, {"testpoint", testpoint}, {"result", ok ? "ok" : "not_ok"},
          {"cost", cost}});
}

void Transcript::treatment(const Treatment& t) {
  ledger_.treatments += t.cost;
  nlohmann::ordered_json e{{"event", "Treatment"}, {"kind", to_string(t.kind)}};
  e["target"] = t.target;
  if (t.kind == TreatmentKind::RemoveBridge) e["pins"] = {t.pin_a, t.pin_b};
  e["cost"] = t.cost;
  append(std::move(e));
}

void Transcript::expanded(const std::string& subsystem, double cost) {
  ledger_.inspections += cost;
  append({{"event", "Expanded"}, {"subsystem", subsystem}, {"cost", cost}});
}

void Transcript::chip_inspected(const std::string& chip, bool found, double cost) {
  ledger_.effort += cost;
  append({{"event", "ChipInspected"}, {"chip", chip}, {"found", found}, {"cost", cost}});
}

void Transcript::component_failed(Pathway p, const std::string& node) {
  append({{"event", "ComponentFailed"}, {"pathway", to_string(p)}, {"node", node}});
}

void Transcript::device_ok() {
  append({{"event", "DeviceOk"}});
  terminated_ = true;
}

void Transcript::assumption_violation(const std::string& reason) {
  append({{"event", "AssumptionViolation"}, {"reason", reason}});
  terminated_ = true;
}

std::size_t Transcript::count(const std::string& event) const {
  std::size_t n = 0;
  for (const auto& e : events_) n += e["event"] == event;
  return n;
}

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += e.dump();
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json ledger_to_json(const CostLedger& ledger) {
  return {{"probes", ledger.probes},
          {"treatments", ledger.treatments},
          {"inspections", ledger.inspections},
          {"effort", ledger.effort},
          {"total", ledger.total()}};
}

}  // namespace hierdx
