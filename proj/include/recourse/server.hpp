// Copyright 2026 The Recourse Bandit Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HTTP JSON + WebSocket front end for SessionManager.
//
//   POST /sessions                    -> {"id"}
//   POST /sessions/{id}/advance       -> step or query event
//   POST /sessions/{id}/human         {action, recourse} -> step event
//   GET  /sessions/{id}               -> snapshot
//   GET  /sessions/{id}/log           -> run log CSV
//   GET  /sessions/{id}/stream        WebSocket, one JSON event per message

#ifndef RECOURSE_SERVER_HPP
#define RECOURSE_SERVER_HPP

#include <memory>
#include <string>

#include "recourse/service.hpp"

namespace recourse {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Routing without any socket; used by the server and by tests.
HttpResponse handle_request(SessionManager& sessions, const std::string& method,
                            const std::string& target, const std::string& body);

class HttpServer {
 public:
  // Port 0 picks a free port; see port().
  HttpServer(SessionManager& sessions, const std::string& address, unsigned short port);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  unsigned short port() const;
  void start();  // accept loop on a background thread
  void wait();   // blocks until stop()
  void stop();   // closes the listener and every open connection

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace recourse

#endif  // RECOURSE_SERVER_HPP
