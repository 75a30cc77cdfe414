#include <doctest.h>

#include <string>

#include <json.hpp>

#include "hierdx/hierdx.h"

using nlohmann::json;

namespace {

const std::string kFixture = std::string(HIERDX_FIXTURES) + "/paper_y1.json";

std::string take(char* s) {
  std::string out = s ? s : "";
  hierdx_string_free(s);
  return out;
}

struct Kb {
  hierdx_kb* kb = nullptr;
  Kb() { REQUIRE(hierdx_kb_load_file(kFixture.c_str(), &kb) == HIERDX_OK); }
  ~Kb() { hierdx_kb_free(kb); }
};

}  // namespace

TEST_SUITE("c_api") {
  TEST_CASE("version and status names") {
    CHECK(std::string(hierdx_version()) == "1.0.0");
    CHECK(std::string(hierdx_status_name(HIERDX_OK)) == "Ok");
    CHECK(std::string(hierdx_status_name(HIERDX_E_FILE_NOT_FOUND)) == "FileNotFound");
    CHECK(std::string(hierdx_status_name(HIERDX_E_WRONG_PHASE)) == "WrongPhase");
  }

  TEST_CASE("knowledge base handles") {
    Kb k;
    char* out = nullptr;
    REQUIRE(hierdx_kb_validate(k.kb, &out) == HIERDX_OK);
    CHECK(json::parse(take(out)) == json::array());
    REQUIRE(hierdx_kb_to_json(k.kb, &out) == HIERDX_OK);
    const auto doc = take(out);
    hierdx_kb* again = nullptr;
    REQUIRE(hierdx_kb_load_json(doc.c_str(), &again) == HIERDX_OK);
    hierdx_kb_free(again);

    hierdx_kb* missing = nullptr;
    CHECK(hierdx_kb_load_file("/nowhere/kb.json", &missing) == HIERDX_E_FILE_NOT_FOUND);
    CHECK(missing == nullptr);
    CHECK(std::string(hierdx_last_error()).find("/nowhere/kb.json") != std::string::npos);
    CHECK(hierdx_kb_load_json("{", &missing) == HIERDX_E_SYNTAX);
    CHECK(hierdx_kb_load_json(nullptr, &missing) == HIERDX_E_INVALID_ARGUMENT);
    hierdx_kb_free(nullptr);
  }

  TEST_CASE("simulate") {
    Kb k;
    char* out = nullptr;
    REQUIRE(hierdx_simulate(k.kb, R"({"fault":"functional:G1:sa1","inputs":"0,1,1,1,1"})", &out) ==
            HIERDX_OK);
    const auto r = json::parse(take(out));
    CHECK(r["outcome"] == "device_ok");
    CHECK(r["ledger"]["total"] == 9.0);
    CHECK(r["ledger"] == r["sim_ledger"]);
    CHECK(r["transcript"].back()["event"] == "DeviceOk");
    CHECK(hierdx_simulate(k.kb, R"({"fault":"functional:G9:sa1"})", &out) == HIERDX_E_UNKNOWN_ELEMENT);
    CHECK(hierdx_simulate(k.kb, R"({"fault":"functional:G1"})", &out) == HIERDX_E_INVALID_ARGUMENT);
  }

  TEST_CASE("estimate") {
    Kb k;
    char* out = nullptr;
    REQUIRE(hierdx_estimate(k.kb, R"({"inputs":"0,1,1,1,1","observations":{"Y1":1,"Y2":1}})", &out) ==
            HIERDX_OK);
    const auto e = json::parse(take(out));
    CHECK(e["X2"].get<double>() == doctest::Approx(152.0 / 9.0));
    CHECK(e["chosen"] == "FL");
    REQUIRE(hierdx_estimate(k.kb, R"({"horizon":["P1-sub","P2-sub"]})", &out) == HIERDX_OK);
    CHECK(json::parse(take(out)).contains("EV_BFL"));
    CHECK(hierdx_estimate(k.kb, R"({"inputs":"0,1,1,1,1","observations":{"Y1":0,"Y2":1}})", &out) ==
          HIERDX_E_NO_FAULT_OBSERVED);
  }

  TEST_CASE("diagram evaluation") {
    char* out = nullptr;
    const auto path = std::string(HIERDX_FIXTURES) + "/two_test_diagram.json";
    REQUIRE(hierdx_diagram_eval_file(path.c_str(), &out) == HIERDX_OK);
    CHECK(json::parse(take(out))["expected_cost"].get<double>() == doctest::Approx(4.5));
    CHECK(hierdx_diagram_eval_file("missing.json", &out) == HIERDX_E_FILE_NOT_FOUND);
    CHECK(hierdx_diagram_eval_json(R"({"nodes":[]})", &out) != HIERDX_OK);
  }

  TEST_CASE("session lifecycle") {
    const json req{{"kb", kFixture},
                   {"mode", "interactive"},
                   {"inputs", "0,1,1,1,1"},
                   {"observations", {{"Y1", 1}, {"Y2", 1}}}};
    hierdx_session* s = nullptr;
    REQUIRE(hierdx_session_create(req.dump().c_str(), &s) == HIERDX_OK);
    CHECK(hierdx_session_probe_result(s, R"({"testpoint":"P1","ok":false})") == HIERDX_E_WRONG_PHASE);
    REQUIRE(hierdx_session_advance(s) == HIERDX_OK);
    char* out = nullptr;
    REQUIRE(hierdx_session_state(s, &out) == HIERDX_OK);
    CHECK(json::parse(take(out))["pending"]["testpoint"] == "P1");
    CHECK(hierdx_session_probe_result(s, "not json") == HIERDX_E_SYNTAX);
    REQUIRE(hierdx_session_probe_result(s, R"({"testpoint":"P1","ok":false})") == HIERDX_OK);
    REQUIRE(hierdx_session_advance(s) == HIERDX_OK);
    REQUIRE(hierdx_session_transcript(s, &out) == HIERDX_OK);
    const auto jsonl = take(out);
    CHECK(jsonl.find("\"Probe\"") != std::string::npos);
    hierdx_session_free(s);

    CHECK(hierdx_session_create(R"({"kb":"/nowhere.json"})", &s) == HIERDX_E_FILE_NOT_FOUND);
    CHECK(hierdx_session_advance(nullptr) == HIERDX_E_INVALID_ARGUMENT);
  }
}
