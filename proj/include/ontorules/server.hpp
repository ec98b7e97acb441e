#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "ontorules/dataset.hpp"
#include "ontorules/ontology.hpp"
#include "ontorules/rules.hpp"
#include "ontorules/session.hpp"

namespace ontorules {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string content_type;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// In-memory state behind the HTTP API: uploaded datasets and ontologies,
// content-addressed rule sets, and sessions. Thread-safe; mutations of one
// session are serialized and a conflicting concurrent mutation gets 409.
class Workbench {
 public:
  Workbench();
  ~Workbench();

  ApiResponse handle(const ApiRequest& request);

  // Registers a dataset as if uploaded; returns its id.
  std::string preload_dataset(const std::string& path);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
  std::string assets_dir;  // static UI files, optional
};

// HTTP/1.1 front end for a Workbench.
class HttpServer {
 public:
  HttpServer(Workbench& workbench, ServeOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns false if the address cannot be bound.
  bool bind();
  int port() const;
  // Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ontorules
