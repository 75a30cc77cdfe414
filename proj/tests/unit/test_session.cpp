#include <doctest.h>

#include "fixtures.hpp"
#include "hierdx/error.hpp"
#include "hierdx/session.hpp"

using namespace hierdx;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::NotFound;
}

json request(json extra) {
  json r{{"kb", testing::fixture_path("paper_y1.json")}};
  r.update(extra);
  return r;
}

Session interactive() {
  return Session(parse_session_request(request({{"mode", "interactive"},
                                                {"inputs", "0,1,1,1,1"},
                                                {"observations", {{"Y1", 1}, {"Y2", 1}}}})));
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("request validation") {
    CHECK(code_of([] { parse_session_request(json::array()); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_session_request(json::object()); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_session_request(request({{"mode", "batch"}})); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] {
            parse_session_request(request({{"mode", "simulated"},
                                           {"fault", "functional:G1:sa1"},
                                           {"observations", {{"Y1", 1}, {"Y2", 1}}}}));
          }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_session_request(request({{"mode", "interactive"}})); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] {
            parse_session_request(
                request({{"mode", "interactive"}, {"observations", {{"Y1", 1}, {"Y2", 1}}}}));
          }) == ErrorCode::MissingInput);
    CHECK(code_of([] {
            parse_session_request(request({{"mode", "interactive"},
                                           {"inputs", "0,1,1,1,1"},
                                           {"observations", {{"Q", 1}, {"Y2", 1}}}}));
          }) == ErrorCode::UnknownReference);
    CHECK(code_of([] { parse_session_request(request({{"fault", "functional:G7:sa0"}})); }) ==
          ErrorCode::UnknownElement);
    CHECK(code_of([] { parse_session_request(request({{"alternation_cap", 0}})); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_session_request({{"kb", "/nowhere.json"}}); }) ==
          ErrorCode::FileNotFound);
  }

  TEST_CASE("input and observation forms") {
    const auto& kb = testing::paper_kb();
    const auto a = parse_inputs(kb, "0,1,1,1,1");
    CHECK(parse_inputs(kb, json::array({0, 1, 1, 1, 1})) == a);
    CHECK(parse_inputs(kb, {{"X1", 0}, {"X2", 1}, {"X3", 1}, {"X4", 1}, {"X5", 1}}) == a);
    CHECK(parse_observations(kb, "1,1") == NetValues{{"Y1", 1}, {"Y2", 1}});
    CHECK(code_of([&] { parse_observations(kb, "1,1,0"); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([&] { parse_inputs(kb, 7); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("simulated session runs on the first advance") {
    Session s(parse_session_request(
        request({{"mode", "simulated"}, {"fault", "functional:G1:sa1"}, {"inputs", "0,1,1,1,1"}})));
    CHECK(s.phase() == Phase::Running);
    s.advance();
    CHECK(s.phase() == Phase::Done);
    CHECK(s.outcome() == DiagnosisOutcome::DeviceOk);
    const auto st = s.state();
    CHECK(st["phase"] == "done");
    CHECK(st["outcome"] == "device_ok");
    CHECK(st["ledger"]["total"] == 9.0);
    CHECK(st["sim_ledger"] == st["ledger"]);
    CHECK(st["recommendation"]["action"] == "none");
    CHECK(code_of([&] { s.advance(); }) == ErrorCode::WrongPhase);
  }

  TEST_CASE("interactive walk-through") {
    auto s = interactive();
    CHECK(code_of([&] { s.probe_result({{"testpoint", "P1"}, {"ok", false}}); }) ==
          ErrorCode::WrongPhase);
    s.advance();
    REQUIRE(s.phase() == Phase::AwaitingProbe);
    CHECK(s.pending()->subject == "P1");
    auto st = s.state();
    CHECK(st["pending"]["testpoint"] == "P1");
    CHECK(st["recommendation"]["action"] == "probe");
    CHECK(code_of([&] { s.advance(); }) == ErrorCode::WrongPhase);
    CHECK(code_of([&] { s.probe_result({{"testpoint", "P2"}, {"ok", false}}); }) ==
          ErrorCode::WrongPhase);
    CHECK(code_of([&] { s.probe_result({{"testpoint", "P1"}}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { s.action_result({{"device_ok", true}}); }) == ErrorCode::WrongPhase);

    s.probe_result({{"testpoint", "P1"}, {"ok", false}});
    CHECK(s.phase() == Phase::Running);
    s.advance();
    REQUIRE(s.phase() == Phase::AwaitingProbe);
    st = s.state();
    CHECK(st["recommendation"]["treatment"] == "repair:P1-sub");
    CHECK(st["pending"]["testpoint"] == "TN1");

    s.probe_result({{"testpoint", "TN1"}, {"ok", false}});
    s.advance();
    REQUIRE(s.phase() == Phase::AwaitingActionResult);
    st = s.state();
    CHECK(st["recommendation"]["action"] == "apply_treatment");
    CHECK(st["recommendation"]["treatment"] == "replace:G1");
    CHECK(code_of([&] { s.action_result({{"device_ok", "yes"}}); }) == ErrorCode::InvalidArgument);
    s.action_result({{"device_ok", true}});
    s.advance();
    CHECK(s.phase() == Phase::Done);
    CHECK(s.state()["outcome"] == "device_ok");
    CHECK(s.state()["ledger"]["total"] == 9.0);
  }

  TEST_CASE("state reads do not change the session") {
    auto s = interactive();
    s.advance();
    const auto a = s.state();
    const auto b = s.state();
    CHECK(a == b);
    CHECK(s.phase() == Phase::AwaitingProbe);
  }

  TEST_CASE("interactive answers from the simulator reproduce the simulated transcript") {
    const auto& kb = testing::paper_kb();
    for (const char* fault : {"functional:G1:sa1", "functional:OR1:sa1", "bridge:CHIP1:2-3:and"}) {
      CAPTURE(fault);
      Session sim(parse_session_request(request({{"mode", "simulated"}, {"fault", fault}})));
      sim.advance();
      Session live(parse_session_request(request({{"mode", "interactive"}, {"fault", fault}})));
      DeviceSim dev(kb, parse_fault_spec(fault));
      dev.set_inputs(live.inputs());
      CHECK(live.inputs() == sim.inputs());
      for (int guard = 0; guard < 100 && live.phase() != Phase::Done; ++guard) {
        switch (live.phase()) {
          case Phase::Running: live.advance(); break;
          case Phase::AwaitingProbe: {
            const auto q = *live.pending();
            if (q.kind == QuestionKind::Probe) {
              live.probe_result({{"testpoint", q.subject}, {"ok", dev.probe(q.subject).ok}});
            } else {
              const auto found = dev.inspect_chip(q.subject, 0);
              json body{{"chip", q.subject}, {"found", found.found}};
              if (found.found) body["pins"] = {found.pin_a, found.pin_b};
              live.probe_result(body);
            }
            break;
          }
          case Phase::AwaitingActionResult: {
            const auto label = live.state()["recommendation"]["treatment"].get<std::string>();
            Treatment t;  // "nothing" unless the label says otherwise
            if (label.rfind("replace:", 0) == 0) {
              const auto target = label.substr(8);
              t = {TreatmentKind::Replace, target, 0, 0, kb.element(target).replacement_cost};
            } else if (label.rfind("remove_bridge:", 0) == 0) {
              const auto rest = label.substr(14);
              const auto colon = rest.find(':');
              const auto dash = rest.find('-', colon);
              t = {TreatmentKind::RemoveBridge, rest.substr(0, colon),
                   std::stoi(rest.substr(colon + 1, dash - colon - 1)), std::stoi(rest.substr(dash + 1)),
                   kb.cost_model().bridge_repair_cost};
            }
            dev.apply_treatment(t);
            live.action_result({{"device_ok", dev.device_ok()}});
            break;
          }
          case Phase::Done: break;
        }
      }
      CHECK(live.phase() == Phase::Done);
      CHECK(live.transcript().to_jsonl() == sim.transcript().to_jsonl());
    }
  }
}
