#pragma once

// HTTP session API over the C library. handle() is transport independent so
// it can be tested without sockets; serve() binds it to httplib.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "hierdx/hierdx.h"

namespace httplib {
class Server;
}

namespace hierdx::service {

struct Response {
  int status = 200;
  std::string body;  // JSON, empty for 204
};

class SessionService {
 public:
  SessionService() = default;
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  Response handle(const std::string& method, const std::string& path, const std::string& body);

  // Registers the /api routes on `server`.
  void mount(httplib::Server& server);

  std::size_t size() const;

 private:
  struct Entry {
    std::mutex mutex;
    hierdx_session* session = nullptr;
    ~Entry() { hierdx_session_free(session); }
  };

  Response create(const std::string& body);
  Response with_session(const std::string& id, const std::string& action, const std::string& method,
                        const std::string& body);
  std::shared_ptr<Entry> find(const std::string& id) const;

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

// HTTP status for a library status code.
int http_status(hierdx_status status);

// Blocks serving on host:port. Returns false if the socket cannot be bound.
bool serve(SessionService& service, const std::string& host, int port);

}  // namespace hierdx::service
