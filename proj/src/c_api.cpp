#include "hierdx/hierdx.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hierdx/error.hpp"
#include "hierdx/influence_diagram.hpp"
#include "hierdx/knowledge_base.hpp"
#include "hierdx/orchestrator.hpp"
#include "hierdx/session.hpp"

struct hierdx_kb {
  std::shared_ptr<const hierdx::KnowledgeBase> kb;
};

struct hierdx_session {
  std::unique_ptr<hierdx::Session> session;
};

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

thread_local std::string g_last_error;

hierdx_status status_of(hierdx::ErrorCode code) {
  return static_cast<hierdx_status>(static_cast<int>(code) + 1);
}

template <typename F>
hierdx_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return HIERDX_OK;
  } catch (const hierdx::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const json::parse_error& e) {
    g_last_error = std::string("SyntaxError: ") + e.what();
    return HIERDX_E_SYNTAX;
  } catch (const json::exception& e) {
    g_last_error = std::string("SchemaViolation: ") + e.what();
    return HIERDX_E_SCHEMA;
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
    return HIERDX_E_INTERNAL;
  } catch (...) {
    g_last_error = "Internal: unknown exception";
    return HIERDX_E_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw hierdx::Error(hierdx::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_json(const char* text) {
  require(text, "json text");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw hierdx::Error(hierdx::ErrorCode::SyntaxError, e.what());
  }
}

json parse_request(const char* text) {
  if (!text || !*text) return json::object();
  auto j = parse_json(text);
  if (!j.is_object()) throw hierdx::Error(hierdx::ErrorCode::InvalidArgument, "request must be an object");
  return j;
}

std::string read_file(const char* path) {
  require(path, "path");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hierdx::Error(hierdx::ErrorCode::FileNotFound, std::string("cannot open '") + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* outcome_name(hierdx::DiagnosisOutcome o) {
  switch (o) {
    case hierdx::DiagnosisOutcome::Running: return "running";
    case hierdx::DiagnosisOutcome::DeviceOk: return "device_ok";
    case hierdx::DiagnosisOutcome::AssumptionViolation: return "assumption_violation";
  }
  return "?";
}

ordered_json eval_diagram(const std::string& text) {
  const auto d = hierdx::parse_diagram(text);
  const auto sol = hierdx::evaluate(d);
  ordered_json r;
  r["expected_cost"] = sol.expected_cost;
  r["policy"] = hierdx::policy_to_json(d, sol.policy);
  r["estimated_ops"] = hierdx::estimate_eval_ops(d);
  return r;
}

}  // namespace

extern "C" {

const char* hierdx_version(void) { return "1.0.0"; }

const char* hierdx_last_error(void) { return g_last_error.c_str(); }

const char* hierdx_status_name(hierdx_status status) {
  if (status == HIERDX_OK) return "Ok";
  if (status == HIERDX_E_INTERNAL) return "Internal";
  const int i = static_cast<int>(status) - 1;
  if (i < 0 || i > static_cast<int>(hierdx::ErrorCode::NotFound)) return "Unknown";
  return hierdx::to_string(static_cast<hierdx::ErrorCode>(i));
}

void hierdx_string_free(char* s) { std::free(s); }

hierdx_status hierdx_kb_load_file(const char* path, hierdx_kb** out) {
  return guarded([&] {
    require(out, "out");
    require(path, "path");
    auto kb = std::make_shared<hierdx::KnowledgeBase>(hierdx::load_kb_file(path));
    *out = new hierdx_kb{std::move(kb)};
  });
}

hierdx_status hierdx_kb_load_json(const char* text, hierdx_kb** out) {
  return guarded([&] {
    require(out, "out");
    require(text, "json text");
    auto kb = std::make_shared<hierdx::KnowledgeBase>(hierdx::parse_kb(text));
    *out = new hierdx_kb{std::move(kb)};
  });
}

void hierdx_kb_free(hierdx_kb* kb) { delete kb; }

hierdx_status hierdx_kb_validate(const hierdx_kb* kb, char** diagnostics_json) {
  return guarded([&] {
    require(kb, "kb");
    require(diagnostics_json, "out");
    ordered_json arr = ordered_json::array();
    for (const auto& d : hierdx::validate_kb(*kb->kb)) {
      arr.push_back({{"kind", d.kind}, {"node", d.node}, {"message", d.message}});
    }
    *diagnostics_json = dup_string(arr.dump());
  });
}

hierdx_status hierdx_kb_to_json(const hierdx_kb* kb, char** out_json) {
  return guarded([&] {
    require(kb, "kb");
    require(out_json, "out");
    *out_json = dup_string(hierdx::serialize_kb(*kb->kb));
  });
}

hierdx_status hierdx_estimate(const hierdx_kb* handle, const char* request_json, char** result_json) {
  return guarded([&] {
    require(handle, "kb");
    require(result_json, "out");
    const auto& kb = *handle->kb;
    const auto req = parse_request(request_json);
    hierdx::MetaRecord rec;
    ordered_json context;
    if (req.contains("horizon")) {
      const auto& h = req["horizon"];
      std::vector<std::string> nodes;
      if (h.is_string()) {
        nodes.push_back(h.get<std::string>());
      } else if (h.is_array()) {
        for (const auto& n : h) {
          if (!n.is_string()) throw hierdx::Error(hierdx::ErrorCode::InvalidArgument, "horizon ids must be strings");
          nodes.push_back(n.get<std::string>());
        }
      } else {
        throw hierdx::Error(hierdx::ErrorCode::InvalidArgument, "horizon must be an id or a list of ids");
      }
      rec = hierdx::horizon_meta_record(kb, nodes);
      context["horizon"] = nodes;
    } else {
      hierdx::SessionRequest sreq;
      sreq.kb = handle->kb;
      sreq.mode = req.contains("observations") ? hierdx::SessionMode::Interactive
                                               : hierdx::SessionMode::Simulated;
      if (req.contains("fault")) sreq.fault = hierdx::parse_fault_spec(req["fault"].get<std::string>());
      if (req.contains("inputs")) sreq.inputs = hierdx::parse_inputs(kb, req["inputs"]);
      if (!sreq.fault && !req.contains("observations")) {
        throw hierdx::Error(hierdx::ErrorCode::InvalidArgument,
                            "estimate needs a fault, observations or an explicit horizon");
      }
      if (req.contains("observations")) {
        if (!sreq.inputs) throw hierdx::Error(hierdx::ErrorCode::MissingInput, "observations need inputs");
        sreq.observations = hierdx::parse_observations(kb, req["observations"]);
      }
      hierdx::Session probe_session(std::move(sreq));
      rec = hierdx::first_meta_record(kb, probe_session.inputs(), probe_session.observations());
      context["inputs"] = probe_session.inputs();
      context["observations"] = probe_session.observations();
    }
    auto out = hierdx::estimate_to_json(rec.estimate, kb.cost_model().u, rec.choice);
    out["P_FL"] = rec.p_fl;
    for (auto& [k, v] : context.items()) out[k] = v;
    *result_json = dup_string(out.dump());
  });
}

hierdx_status hierdx_simulate(const hierdx_kb* handle, const char* request_json, char** result_json) {
  return guarded([&] {
    require(handle, "kb");
    require(result_json, "out");
    const auto& kb = *handle->kb;
    const auto req = parse_request(request_json);
    std::optional<hierdx::FaultSpec> fault;
    if (req.contains("fault") && !req["fault"].is_null()) {
      if (!req["fault"].is_string()) throw hierdx::Error(hierdx::ErrorCode::InvalidArgument, "fault must be a string");
      fault = hierdx::parse_fault_spec(req["fault"].get<std::string>());
    }
    std::optional<hierdx::NetValues> inputs;
    if (req.contains("inputs") && !req["inputs"].is_null()) inputs = hierdx::parse_inputs(kb, req["inputs"]);
    hierdx::DiagnosisConfig config;
    if (req.contains("repair_cost")) config.repair = hierdx::parse_repair_cost(req["repair_cost"].get<std::string>());
    if (req.contains("functional_info_filter")) config.functional_info_filter = req["functional_info_filter"].get<bool>();
    if (req.contains("alternation_cap")) config.alternation_cap = req["alternation_cap"].get<std::size_t>();
    const std::uint64_t seed = req.value("seed", hierdx::kDefaultSimSeed);

    const auto run = hierdx::simulate_diagnosis(kb, fault, inputs, config, seed);
    ordered_json out;
    out["outcome"] = outcome_name(run.outcome);
    out["inputs"] = run.inputs;
    out["ledger"] = hierdx::ledger_to_json(run.transcript.ledger());
    out["sim_ledger"] = hierdx::ledger_to_json(run.sim_ledger);
    out["component_steps"] = run.component_steps;
    out["meta_iterations"] = run.meta_iterations;
    out["step_bound"] = hierdx::step_bound(kb);
    out["transcript"] = run.transcript.events();
    *result_json = dup_string(out.dump());
  });
}

hierdx_status hierdx_diagram_eval_file(const char* path, char** result_json) {
  return guarded([&] {
    require(result_json, "out");
    *result_json = dup_string(eval_diagram(read_file(path)).dump());
  });
}

hierdx_status hierdx_diagram_eval_json(const char* text, char** result_json) {
  return guarded([&] {
    require(text, "json text");
    require(result_json, "out");
    *result_json = dup_string(eval_diagram(text).dump());
  });
}

hierdx_status hierdx_session_create(const char* request_json, hierdx_session** out) {
  return guarded([&] {
    require(out, "out");
    const auto body = parse_json(request_json);
    auto s = std::make_unique<hierdx::Session>(hierdx::parse_session_request(body));
    *out = new hierdx_session{std::move(s)};
  });
}

hierdx_status hierdx_session_advance(hierdx_session* session) {
  return guarded([&] {
    require(session, "session");
    session->session->advance();
  });
}

hierdx_status hierdx_session_probe_result(hierdx_session* session, const char* body_json) {
  return guarded([&] {
    require(session, "session");
    session->session->probe_result(parse_json(body_json));
  });
}

hierdx_status hierdx_session_action_result(hierdx_session* session, const char* body_json) {
  return guarded([&] {
    require(session, "session");
    session->session->action_result(parse_json(body_json));
  });
}

hierdx_status hierdx_session_state(const hierdx_session* session, char** state_json) {
  return guarded([&] {
    require(session, "session");
    require(state_json, "out");
    *state_json = dup_string(session->session->state().dump());
  });
}

hierdx_status hierdx_session_transcript(const hierdx_session* session, char** jsonl) {
  return guarded([&] {
    require(session, "session");
    require(jsonl, "out");
    *jsonl = dup_string(session->session->transcript().to_jsonl());
  });
}

void hierdx_session_free(hierdx_session* session) { delete session; }

}  // extern "C"
