#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "plotsmith/io.hpp"

namespace plotsmith {

/// Result of one API call, independent of the transport.
struct Response {
  int status = 200;
  std::string body; // JSON, newline-terminated
  std::map<std::string, std::string> headers;
};

/// In-memory sessions behind the /v1/ API. Each method takes the request
/// body as text and returns the JSON response. Calls on one session are
/// serialized; different sessions proceed concurrently.
class SessionStore {
public:
  explicit SessionStore(std::string snapshot_dir = ".");
  ~SessionStore();

  Response create(const std::string& body);
  Response append_observations(const std::string& id, const std::string& body);
  Response beliefs(const std::string& id);
  Response whatif(const std::string& id, const std::string& body);
  Response score(const std::string& id, const std::string& body);
  Response snapshot(const std::string& id);
  Response remove(const std::string& id);
  Response health() const;

  std::size_t size() const;

private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;

  std::string snapshot_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// Error envelope {code, message, path} with an optional list of details.
Response error_response(int status, const std::string& code, const std::string& message,
                        const std::string& path = "", const std::vector<Issue>& details = {});

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string bearer_token; // empty: no authentication
  std::string cors_origin = "*";
  std::string snapshot_dir = ".";
};

/// HTTP front end over a SessionStore, running on a background thread.
class HttpService {
public:
  HttpService(SessionStore& store, ServeOptions options);
  ~HttpService();

  /// Binds (port 0 picks a free port) and starts serving. False if binding fails.
  bool start();
  int port() const { return port_; }
  void stop();
  /// Blocks until the server stops.
  void wait();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// Serves in the foreground until the process is stopped. False if binding fails.
bool serve(SessionStore& store, const ServeOptions& options);

} // namespace plotsmith
