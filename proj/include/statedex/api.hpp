#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "statedex/store.hpp"
#include "statedex/winprob.hpp"

namespace statedex {

struct ApiResponse {
  int status = 200;
  std::string body;
};

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// Parses "host:port" (or ":port", or a bare port). Throws Error.
ListenAddress parse_listen(std::string_view text);

inline constexpr int kDefaultPageSize = 20;
inline constexpr int kMaxPageSize = 1000;

/// Request handling for the /v1/ JSON service, independent of any socket
/// layer. All handlers are read-only; the store and model are replaced
/// together by `swap`, and in-flight requests keep the pair they started
/// with.
class ApiService {
 public:
  ApiService(std::shared_ptr<const StateStore> store, std::shared_ptr<const WinProbModel> model);
  ~ApiService();

  void swap(std::shared_ptr<const StateStore> store, std::shared_ptr<const WinProbModel> model);
  std::shared_ptr<const StateStore> store() const;

  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

 private:
  struct Engine;
  std::shared_ptr<const Engine> engine() const;

  mutable std::mutex mu_;
  std::shared_ptr<const Engine> engine_;
};

/// HTTP front end for an ApiService. Bodies pass through unchanged; every
/// response is JSON with a permissive CORS header for browser clients.
class HttpServer {
 public:
  explicit HttpServer(const ApiService& service);
  ~HttpServer();

  /// Binds the address; port 0 picks a free port. Returns the bound port.
  /// Throws Error if the address cannot be bound.
  int bind(const ListenAddress& address);
  /// Blocks until stop() is called from another thread.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds and blocks serving `service` until the process is stopped.
void serve_http(const ApiService& service, const ListenAddress& address);

}  // namespace statedex
