#include "session_service.hpp"

#include <httplib.h>
#include <json.hpp>

namespace hierdx::service {

namespace {

using nlohmann::ordered_json;

std::string take(char* s) {
  std::string out = s ? s : "";
  hierdx_string_free(s);
  return out;
}

Response error_response(hierdx_status status) {
  ordered_json e{{"error", {{"code", hierdx_status_name(status)}, {"message", hierdx_last_error()}}}};
  return {http_status(status), e.dump()};
}

Response error_response(int http, const std::string& code, const std::string& message) {
  ordered_json e{{"error", {{"code", code}, {"message", message}}}};
  return {http, e.dump()};
}

// Session state with the id first.
Response state_response(const std::string& id, hierdx_session* session, int http) {
  char* raw = nullptr;
  const auto st = hierdx_session_state(session, &raw);
  if (st != HIERDX_OK) return error_response(st);
  auto state = ordered_json::parse(take(raw));
  ordered_json out{{"session_id", id}};
  for (auto& [k, v] : state.items()) out[k] = v;
  return {http, out.dump()};
}

}  // namespace

int http_status(hierdx_status status) {
  switch (status) {
    case HIERDX_OK: return 200;
    case HIERDX_E_NOT_FOUND: return 404;
    case HIERDX_E_WRONG_PHASE: return 409;
    case HIERDX_E_INTERNAL: return 500;
    default: return 422;
  }
}

std::size_t SessionService::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Response SessionService::create(const std::string& body) {
  hierdx_session* session = nullptr;
  const auto st = hierdx_session_create(body.c_str(), &session);
  if (st != HIERDX_OK) return error_response(st);
  auto entry = std::make_shared<Entry>();
  entry->session = session;
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_id_++);
    sessions_.emplace(id, entry);
  }
  std::lock_guard lock(entry->mutex);
  return state_response(id, entry->session, 201);
}

Response SessionService::with_session(const std::string& id, const std::string& action,
                                      const std::string& method, const std::string& body) {
  auto entry = find(id);
  if (!entry) return error_response(404, "NotFound", "no session '" + id + "'");

  if (action.empty()) {
    if (method == "GET") {
      std::lock_guard lock(entry->mutex);
      return state_response(id, entry->session, 200);
    }
    if (method == "DELETE") {
      std::lock_guard lock(mutex_);
      sessions_.erase(id);
      return {204, ""};
    }
    return error_response(405, "MethodNotAllowed", method + " not allowed here");
  }
  if (method != "POST") return error_response(405, "MethodNotAllowed", method + " not allowed here");

  std::lock_guard lock(entry->mutex);
  hierdx_status st;
  if (action == "advance") {
    st = hierdx_session_advance(entry->session);
  } else if (action == "probe-result") {
    st = hierdx_session_probe_result(entry->session, body.c_str());
  } else if (action == "action-result") {
    st = hierdx_session_action_result(entry->session, body.c_str());
  } else {
    return error_response(404, "NotFound", "unknown action '" + action + "'");
  }
  if (st != HIERDX_OK) return error_response(st);
  return state_response(id, entry->session, 200);
}

Response SessionService::handle(const std::string& method, const std::string& path,
                                const std::string& body) {
  static const std::string prefix = "/api/sessions";
  if (path.compare(0, prefix.size(), prefix) != 0) {
    return error_response(404, "NotFound", "no route for '" + path + "'");
  }
  std::string rest = path.substr(prefix.size());
  if (rest.empty() || rest == "/") {
    if (method != "POST") return error_response(405, "MethodNotAllowed", method + " not allowed here");
    return create(body);
  }
  if (rest[0] != '/') return error_response(404, "NotFound", "no route for '" + path + "'");
  rest.erase(0, 1);
  const auto slash = rest.find('/');
  const std::string id = rest.substr(0, slash);
  const std::string action = slash == std::string::npos ? "" : rest.substr(slash + 1);
  if (id.empty() || action.find('/') != std::string::npos) {
    return error_response(404, "NotFound", "no route for '" + path + "'");
  }
  return with_session(id, action, method, body);
}

void SessionService::mount(httplib::Server& server) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    if (!r.body.empty()) res.set_content(r.body, "application/json; charset=utf-8");
  };
  server.Post(R"(/api/sessions/?)", route);
  server.Get(R"(/api/sessions/[^/]+)", route);
  server.Delete(R"(/api/sessions/[^/]+)", route);
  server.Post(R"(/api/sessions/[^/]+/[^/]+)", route);
}

bool serve(SessionService& service, const std::string& host, int port) {
  httplib::Server server;
  service.mount(server);
  return server.listen(host, port);
}

}  // namespace hierdx::service
