#include "hierdx/oracle.hpp"

#include "hierdx/error.hpp"

namespace hierdx {

bool SimulatorOracle::probe_ok(const Testpoint& testpoint) {
  const bool ok = sim_->probe(testpoint.id).ok;
  answers_.push_back({"probe", testpoint.id, ok});
  return ok;
}

void SimulatorOracle::expand(const HierarchyNode& subsystem) {
  sim_->charge_inspection(subsystem.inspection_cost);
}

void SimulatorOracle::apply(const Treatment& treatment) { sim_->apply_treatment(treatment); }

bool SimulatorOracle::device_ok() {
  const bool ok = sim_->device_ok();
  answers_.push_back({"device_ok", "", ok});
  return ok;
}

ChipInspection SimulatorOracle::inspect_chip(const Chip& chip, double effort) {
  const auto r = sim_->inspect_chip(chip.id, effort);
  answers_.push_back({"chip", chip.id, r.found});
  return r;
}

const char* to_string(QuestionKind kind) noexcept {
  switch (kind) {
    case QuestionKind::Probe: return "probe";
    case QuestionKind::Chip: return "chip";
    case QuestionKind::DeviceOk: return "device_ok";
  }
  return "?";
}

const Answer& ScriptedOracle::next(const Question& q) {
  if (next_ >= answers_.size()) throw NeedAnswer(q);
  const auto& a = answers_[next_];
  if (!(a.question == q)) {
    throw Error(ErrorCode::WrongPhase, std::string("scripted answer is for ") +
                                           to_string(a.question.kind) + " '" + a.question.subject +
                                           "', engine asked " + to_string(q.kind) + " '" +
                                           q.subject + "'");
  }
  ++next_;
  return a;
}

bool ScriptedOracle::probe_ok(const Testpoint& testpoint) {
  return next({QuestionKind::Probe, testpoint.id}).value;
}

bool ScriptedOracle::device_ok() { return next({QuestionKind::DeviceOk, ""}).value; }

ChipInspection ScriptedOracle::inspect_chip(const Chip& chip, double) {
  const auto& a = next({QuestionKind::Chip, chip.id});
  ChipInspection r;
  r.found = a.value;
  if (a.value && a.pins) {
    r.pin_a = a.pins->first;
    r.pin_b = a.pins->second;
  }
  return r;
}

}  // namespace hierdx
