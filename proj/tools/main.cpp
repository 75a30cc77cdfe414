// hierdx command line: validate, simulate, diagnose, estimate, eval-id, serve.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hierdx/hierdx.h"
#include "session_service.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kDomainError = 1;

struct DomainError {
  std::string message;
};

void check(hierdx_status st) {
  if (st != HIERDX_OK) throw DomainError{hierdx_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  hierdx_string_free(s);
  return out;
}

struct Kb {
  hierdx_kb* handle = nullptr;
  explicit Kb(const std::string& path) { check(hierdx_kb_load_file(path.c_str(), &handle)); }
  ~Kb() { hierdx_kb_free(handle); }
  Kb(const Kb&) = delete;
  Kb& operator=(const Kb&) = delete;
};

struct SessionHandle {
  hierdx_session* handle = nullptr;
  explicit SessionHandle(const std::string& request) {
    check(hierdx_session_create(request.c_str(), &handle));
  }
  ~SessionHandle() { hierdx_session_free(handle); }
  SessionHandle(const SessionHandle&) = delete;
  SessionHandle& operator=(const SessionHandle&) = delete;

  json state() const {
    char* raw = nullptr;
    check(hierdx_session_state(handle, &raw));
    return json::parse(take(raw));
  }
};

struct Options {
  std::string kb;
  std::string fault;
  std::string inputs;
  std::string observations;
  std::string repair_cost = "complete";
  std::vector<std::string> horizon;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_filter = false;
  bool as_json = false;
  bool interactive = false;
  std::string diagram;
  std::string host = "127.0.0.1";
  int port = 8080;
};

void print_summary(const json& result) {
  std::cout << ordered_json{{"outcome", result["outcome"]}, {"ledger", result["ledger"]}}.dump() << "\n";
}

int run_validate(const Options& o) {
  Kb kb(o.kb);
  char* raw = nullptr;
  check(hierdx_kb_validate(kb.handle, &raw));
  const auto diags = json::parse(take(raw));
  for (const auto& d : diags) {
    std::cout << d["kind"].get<std::string>() << " " << d["node"].get<std::string>() << ": "
              << d["message"].get<std::string>() << "\n";
  }
  if (diags.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  return kDomainError;
}

json base_request(const Options& o) {
  json req = json::object();
  if (!o.fault.empty()) req["fault"] = o.fault;
  if (!o.inputs.empty()) req["inputs"] = o.inputs;
  if (!o.observations.empty()) req["observations"] = o.observations;
  if (o.seed_set) req["seed"] = o.seed;
  req["repair_cost"] = o.repair_cost;
  req["functional_info_filter"] = !o.no_filter;
  return req;
}

int run_simulate(const Options& o) {
  Kb kb(o.kb);
  char* raw = nullptr;
  check(hierdx_simulate(kb.handle, base_request(o).dump().c_str(), &raw));
  const auto result = json::parse(take(raw));
  if (o.as_json) {
    std::cout << result.dump(2) << "\n";
  } else {
    for (const auto& e : result["transcript"]) std::cout << e.dump() << "\n";
    print_summary(result);
  }
  return result["outcome"] == "device_ok" ? 0 : kDomainError;
}

int run_estimate(const Options& o) {
  Kb kb(o.kb);
  auto req = base_request(o);
  if (!o.horizon.empty()) req["horizon"] = o.horizon;
  char* raw = nullptr;
  check(hierdx_estimate(kb.handle, req.dump().c_str(), &raw));
  const auto result = json::parse(take(raw));
  if (o.as_json) {
    std::cout << result.dump(2) << "\n";
  } else {
    ordered_json brief;
    for (const char* k : {"X1", "X2", "Y1", "Y2", "u", "EV_FL", "EV_BFL", "chosen"}) brief[k] = result[k];
    std::cout << brief.dump() << "\n";
  }
  return 0;
}

int run_eval_id(const Options& o) {
  char* raw = nullptr;
  check(hierdx_diagram_eval_file(o.diagram.c_str(), &raw));
  std::cout << json::parse(take(raw)).dump(2) << "\n";
  return 0;
}

// Reads one answer line; EOF aborts the session.
std::string ask(const std::string& prompt) {
  std::cerr << prompt << std::flush;
  std::string line;
  if (!std::getline(std::cin, line)) throw DomainError{"OracleUnavailable: input closed"};
  const auto b = line.find_first_not_of(" \t\r");
  const auto e = line.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : line.substr(b, e - b + 1);
}

bool yes_no(const std::string& prompt, const char* yes, const char* no) {
  for (;;) {
    const auto a = ask(prompt);
    if (a == yes || a == "y" || a == "yes") return true;
    if (a == no || a == "n" || a == "no") return false;
    std::cerr << "answer '" << yes << "' or '" << no << "'\n";
  }
}

int run_diagnose(const Options& o) {
  json req = base_request(o);
  req["kb"] = o.kb;
  req["mode"] = o.interactive ? "interactive" : "simulated";
  SessionHandle s(req.dump());
  std::size_t printed = 0;
  auto flush_events = [&](const json& state) {
    const auto& events = state["transcript"];
    for (; printed < events.size(); ++printed) std::cout << events[printed].dump() << "\n";
    std::cout << std::flush;
  };
  for (;;) {
    check(hierdx_session_advance(s.handle));
    const auto state = s.state();
    flush_events(state);
    const std::string phase = state["phase"];
    const auto& rec = state["recommendation"];
    if (phase == "done") {
      std::cout << ordered_json{{"outcome", state["outcome"]}, {"ledger", state["ledger"]}}.dump() << "\n";
      return state["outcome"] == "device_ok" ? 0 : kDomainError;
    }
    if (phase == "awaiting_probe" && rec["action"] == "probe") {
      const std::string tp = rec["testpoint"];
      const bool ok = yes_no("probe " + tp + " (net " + rec["net"].get<std::string>() + ", cost " +
                                 rec["cost"].dump() + "): ok / not_ok? ",
                             "ok", "not_ok");
      check(hierdx_session_probe_result(s.handle, json{{"testpoint", tp}, {"ok", ok}}.dump().c_str()));
    } else if (phase == "awaiting_probe") {
      const std::string chip = rec["chip"];
      json body{{"chip", chip}, {"found", false}};
      for (;;) {
        const auto a = ask("inspect " + chip + ": 'clear', 'found' or 'found <a>-<b>'? ");
        if (a == "clear") break;
        if (a.rfind("found", 0) == 0) {
          body["found"] = true;
          int pa = 0;
          int pb = 0;
          if (std::sscanf(a.c_str(), "found %d-%d", &pa, &pb) == 2) body["pins"] = {pa, pb};
          break;
        }
      }
      check(hierdx_session_probe_result(s.handle, body.dump().c_str()));
    } else {
      const bool ok = yes_no("apply " + rec["treatment"].get<std::string>() +
                                 ", then check the device: ok / faulty? ",
                             "ok", "faulty");
      check(hierdx_session_action_result(s.handle, json{{"device_ok", ok}}.dump().c_str()));
    }
  }
}

int run_serve(const Options& o) {
  hierdx::service::SessionService service;
  std::cerr << "serving on http://" << o.host << ":" << o.port << "\n";
  if (!hierdx::service::serve(service, o.host, o.port)) {
    throw DomainError{"cannot listen on " + o.host + ":" + std::to_string(o.port)};
  }
  return 0;
}

void add_run_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--inputs", o.inputs, "Input vector, e.g. 0,1,1,1,1");
  cmd->add_option("--seed", o.seed, "Simulator seed")->each([&](const std::string&) { o.seed_set = true; });
  cmd->add_option("--repair-cost", o.repair_cost, "complete or heuristic:<h>");
  cmd->add_flag("--no-filter", o.no_filter, "Do not filter bridge candidates by functional evidence");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical decision-theoretic troubleshooting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hierdx_version());
  Options o;

  auto* validate = app.add_subcommand("validate", "Check a knowledge base");
  validate->add_option("file", o.diagram, "Knowledge base file");
  validate->add_option("--kb", o.kb, "Knowledge base file");

  auto* simulate = app.add_subcommand("simulate", "Diagnose an injected fault against the simulator");
  simulate->add_option("--kb", o.kb, "Knowledge base file")->required();
  simulate->add_option("--fault", o.fault, "functional:<el>:<sa0|sa1> or bridge:<chip>:<a>-<b>:<and|or>")
      ->required();
  add_run_options(simulate, o);
  simulate->add_flag("--json", o.as_json, "Print one JSON document");

  auto* diagnose = app.add_subcommand("diagnose", "Run a diagnosis session");
  diagnose->add_option("--kb", o.kb, "Knowledge base file")->required();
  diagnose->add_flag("--interactive", o.interactive, "Ask for probe results and repair outcomes");
  diagnose->add_option("--fault", o.fault, "Injected fault (simulated sessions)");
  diagnose->add_option("--observations", o.observations, "Observed outputs, e.g. 1,1");
  add_run_options(diagnose, o);

  auto* estimate = app.add_subcommand("estimate", "Print the first meta-level estimate");
  estimate->add_option("--kb", o.kb, "Knowledge base file")->required();
  estimate->add_option("--fault", o.fault, "Injected fault used to derive observations");
  estimate->add_option("--observations", o.observations, "Observed outputs");
  estimate->add_option("--horizon", o.horizon, "Explicit horizon node ids");
  estimate->add_option("--inputs", o.inputs, "Input vector");
  estimate->add_flag("--json", o.as_json, "Print the full estimate");

  auto* eval_id = app.add_subcommand("eval-id", "Evaluate a standalone influence diagram");
  eval_id->add_option("diagram", o.diagram, "Diagram file")->required();

  auto* serve = app.add_subcommand("serve", "Start the HTTP session service");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) {
      if (o.kb.empty()) o.kb = o.diagram;
      if (o.kb.empty()) {
        std::cerr << "validate: a knowledge base file is required\n";
        return 2;
      }
      return run_validate(o);
    }
    if (simulate->parsed()) return run_simulate(o);
    if (diagnose->parsed()) {
      if (!o.interactive && o.fault.empty()) {
        std::cerr << "diagnose: --fault is required without --interactive\n";
        return 2;
      }
      return run_diagnose(o);
    }
    if (estimate->parsed()) return run_estimate(o);
    if (eval_id->parsed()) return run_eval_id(o);
    if (serve->parsed()) return run_serve(o);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  }
  return 2;
}
