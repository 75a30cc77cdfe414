#include <doctest.h>

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "session_service.hpp"

using nlohmann::json;
using hierdx::service::SessionService;

namespace {

const std::string kFixture = std::string(HIERDX_FIXTURES) + "/paper_y1.json";

std::string create_body(json extra) {
  json r{{"kb", kFixture}};
  r.update(extra);
  return r.dump();
}

std::string interactive_body() {
  return create_body(
      {{"mode", "interactive"}, {"inputs", "0,1,1,1,1"}, {"observations", {{"Y1", 1}, {"Y2", 1}}}});
}

std::string error_code(const hierdx::service::Response& r) {
  return json::parse(r.body)["error"]["code"].get<std::string>();
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("create a simulated session") {
    SessionService svc;
    const auto r = svc.handle("POST", "/api/sessions",
                              create_body({{"mode", "simulated"}, {"fault", "functional:G1:sa1"}}));
    CHECK(r.status == 201);
    const auto j = json::parse(r.body);
    CHECK(j["session_id"] == "s1");
    CHECK(j["phase"] == "running");
    CHECK(svc.size() == 1);
    const auto adv = svc.handle("POST", "/api/sessions/s1/advance", "");
    CHECK(adv.status == 200);
    CHECK(json::parse(adv.body)["phase"] == "done");
    CHECK(json::parse(adv.body)["outcome"] == "device_ok");
  }

  TEST_CASE("error statuses") {
    SessionService svc;
    CHECK(svc.handle("GET", "/api/sessions/s9", "").status == 404);
    CHECK(svc.handle("POST", "/api/sessions/s9/advance", "").status == 404);
    const auto bad = svc.handle("POST", "/api/sessions", "{");
    CHECK(bad.status == 422);
    CHECK(error_code(bad) == "SyntaxError");
    CHECK(svc.handle("POST", "/api/sessions", create_body({{"mode", "batch"}})).status == 422);
    CHECK(svc.handle("POST", "/api/sessions", R"({"kb":"/nowhere.json"})").status == 422);
    CHECK(svc.handle("GET", "/api/sessions", "").status == 405);

    REQUIRE(svc.handle("POST", "/api/sessions", interactive_body()).status == 201);
    const auto early = svc.handle("POST", "/api/sessions/s1/probe-result", R"({"testpoint":"P1","ok":false})");
    CHECK(early.status == 409);
    CHECK(error_code(early) == "WrongPhase");
    CHECK(svc.handle("POST", "/api/sessions/s1/launch", "").status == 404);
    CHECK(svc.handle("PUT", "/api/sessions/s1/advance", "").status == 405);
    REQUIRE(svc.handle("POST", "/api/sessions/s1/advance", "").status == 200);
    CHECK(svc.handle("POST", "/api/sessions/s1/probe-result", R"({"testpoint":"P1"})").status == 422);
    CHECK(svc.handle("POST", "/api/sessions/s1/advance", "").status == 409);
    CHECK(svc.handle("DELETE", "/api/sessions/s1", "").status == 204);
    CHECK(svc.handle("GET", "/api/sessions/s1", "").status == 404);
    CHECK(svc.size() == 0);
  }

  TEST_CASE("interactive flow and read-only GET") {
    SessionService svc;
    REQUIRE(svc.handle("POST", "/api/sessions", interactive_body()).status == 201);
    auto r = svc.handle("POST", "/api/sessions/s1/advance", "");
    auto j = json::parse(r.body);
    CHECK(j["phase"] == "awaiting_probe");
    CHECK(j["pending"]["testpoint"] == "P1");
    const auto g1 = svc.handle("GET", "/api/sessions/s1", "");
    const auto g2 = svc.handle("GET", "/api/sessions/s1", "");
    CHECK(g1.status == 200);
    CHECK(g1.body == g2.body);
    r = svc.handle("POST", "/api/sessions/s1/probe-result", R"({"testpoint":"P1","ok":false})");
    CHECK(json::parse(r.body)["phase"] == "running");
    r = svc.handle("POST", "/api/sessions/s1/advance", "");
    j = json::parse(r.body);
    CHECK(j["recommendation"]["treatment"] == "repair:P1-sub");
    for (const char* key : {"phase", "context_tree", "recommendation", "ledger", "transcript",
                            "meta_estimates"}) {
      CHECK(j.contains(key));
    }
  }

  TEST_CASE("sessions run in parallel") {
    SessionService svc;
    std::vector<std::thread> workers;
    std::atomic<int> ok{0};
    for (int i = 0; i < 8; ++i) {
      workers.emplace_back([&] {
        const auto c = svc.handle("POST", "/api/sessions",
                                  create_body({{"mode", "simulated"}, {"fault", "functional:G3:sa1"}}));
        const auto id = json::parse(c.body)["session_id"].get<std::string>();
        const auto r = svc.handle("POST", "/api/sessions/" + id + "/advance", "");
        if (r.status == 200 && json::parse(r.body)["outcome"] == "device_ok") ++ok;
      });
    }
    for (auto& w : workers) w.join();
    CHECK(ok == 8);
    CHECK(svc.size() == 8);
  }

  TEST_CASE("http round trip") {
    SessionService svc;
    httplib::Server server;
    svc.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto res = client.Post("/api/sessions", interactive_body(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    CHECK(res->get_header_value("Content-Type").find("application/json") == 0);
    res = client.Post("/api/sessions/s1/advance", "", "application/json");
    REQUIRE(res);
    CHECK(json::parse(res->body)["pending"]["testpoint"] == "P1");
    res = client.Get("/api/sessions/s2");
    REQUIRE(res);
    CHECK(res->status == 404);
    res = client.Delete("/api/sessions/s1");
    REQUIRE(res);
    CHECK(res->status == 204);

    server.stop();
    t.join();
  }
}
