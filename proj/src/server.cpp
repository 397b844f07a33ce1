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

#include "recourse/server.hpp"

#include <sys/socket.h>

#include <atomic>
#include <deque>
#include <list>
#include <set>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace recourse {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

std::vector<std::string> split_path(const std::string& target) {
  std::string path = target.substr(0, target.find('?'));
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t slash = path.find('/', start);
    const std::size_t end = slash == std::string::npos ? path.size() : slash;
    if (end > start) parts.push_back(path.substr(start, end - start));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return parts;
}

HttpResponse json_response(int status, const json& body) {
  return HttpResponse{status, "application/json", body.dump()};
}

json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ServiceError(400, std::string("request body is not valid JSON: ") + e.what());
  }
}

}  // namespace

HttpResponse handle_request(SessionManager& sessions, const std::string& method,
                            const std::string& target, const std::string& body) {
  try {
    if (method == "OPTIONS") return HttpResponse{204, "text/plain", ""};
    const auto parts = split_path(target);
    if (parts.empty() || parts[0] != "sessions") throw ServiceError(404, "no route for " + target);

    if (parts.size() == 1) {
      if (method != "POST") throw ServiceError(405, "use POST /sessions");
      return json_response(201, json{{"id", sessions.create(parse_body(body))}});
    }
    const auto session = sessions.get(parts[1]);
    if (parts.size() == 2) {
      if (method != "GET") throw ServiceError(405, "use GET /sessions/{id}");
      return json_response(200, session->snapshot());
    }
    if (parts.size() == 3) {
      const std::string& verb = parts[2];
      if (verb == "advance") {
        if (method != "POST") throw ServiceError(405, "use POST .../advance");
        return json_response(200, session->advance().to_json());
      }
      if (verb == "human") {
        if (method != "POST") throw ServiceError(405, "use POST .../human");
        return json_response(200, session->submit_human(parse_body(body)).to_json());
      }
      if (verb == "log") {
        if (method != "GET") throw ServiceError(405, "use GET .../log");
        return HttpResponse{200, "text/csv", session->log_csv()};
      }
      if (verb == "stream") throw ServiceError(426, "the stream endpoint needs a WebSocket upgrade");
    }
    throw ServiceError(404, "no route for " + target);
  } catch (const ServiceError& e) {
    return json_response(e.status(), e.body());
  } catch (const std::exception& e) {
    return json_response(500, json{{"error", e.what()}});
  }
}

struct HttpServer::Impl {
  SessionManager& sessions;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread accept_thread;
  std::atomic<bool> stopping{false};

  std::mutex mu;
  std::set<std::shared_ptr<tcp::socket>> sockets;
  std::list<std::thread> workers;
  std::condition_variable stopped_cv;
  bool stopped = false;

  explicit Impl(SessionManager& s) : sessions(s) {}

  void accept_loop() {
    while (!stopping) {
      auto sock = std::make_shared<tcp::socket>(ioc);
      beast::error_code ec;
      acceptor.accept(*sock, ec);
      if (ec) {
        if (stopping) break;
        continue;
      }
      std::lock_guard lock(mu);
      if (stopping) break;
      sockets.insert(sock);
      workers.emplace_back([this, sock] {
        serve(sock);
        std::lock_guard l(mu);
        sockets.erase(sock);
      });
    }
  }

  void serve(const std::shared_ptr<tcp::socket>& sock) {
    beast::flat_buffer buffer;
    beast::error_code ec;
    while (!stopping) {
      http::request<http::string_body> req;
      http::read(*sock, buffer, req, ec);
      if (ec) break;
      if (websocket::is_upgrade(req)) {
        stream(*sock, std::move(req));
        break;
      }
      const HttpResponse r = handle_request(sessions, std::string(req.method_string()),
                                            std::string(req.target()), req.body());
      http::response<http::string_body> res{static_cast<http::status>(r.status), req.version()};
      res.set(http::field::server, "recourse");
      res.set(http::field::content_type, r.content_type);
      res.set(http::field::access_control_allow_origin, "*");
      res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      res.keep_alive(req.keep_alive());
      res.body() = r.body;
      res.prepare_payload();
      http::write(*sock, res, ec);
      if (ec || !res.keep_alive()) break;
    }
    sock->shutdown(tcp::socket::shutdown_both, ec);
    sock->close(ec);
  }

  void stream(tcp::socket& sock, http::request<http::string_body> req) {
    beast::error_code ec;
    const auto parts = split_path(std::string(req.target()));
    std::shared_ptr<Session> session;
    try {
      if (parts.size() != 3 || parts[0] != "sessions" || parts[2] != "stream")
        throw ServiceError(404, "no stream at " + std::string(req.target()));
      session = sessions.get(parts[1]);
    } catch (const ServiceError& e) {
      http::response<http::string_body> res{static_cast<http::status>(e.status()), req.version()};
      res.set(http::field::content_type, "application/json");
      res.body() = e.body().dump();
      res.prepare_payload();
      http::write(sock, res, ec);
      return;
    }

    websocket::stream<tcp::socket&> ws(sock);
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);

    struct Queue {
      std::mutex mu;
      std::condition_variable cv;
      std::deque<std::pair<std::string, bool>> items;  // message, is final
    };
    auto queue = std::make_shared<Queue>();
    const std::size_t handle = session->subscribe([queue](const Event& e) {
      {
        std::lock_guard lock(queue->mu);
        queue->items.emplace_back(e.to_json().dump(), e.type == "finished");
      }
      queue->cv.notify_one();
    });
    bool done = false;
    while (!done && !stopping) {
      std::unique_lock lock(queue->mu);
      queue->cv.wait_for(lock, std::chrono::milliseconds(100), [&] { return !queue->items.empty(); });
      if (queue->items.empty()) continue;
      auto [message, final_event] = std::move(queue->items.front());
      queue->items.pop_front();
      lock.unlock();
      ws.write(net::buffer(message), ec);
      if (ec) break;
      done = final_event;
    }
    session->unsubscribe(handle);
    if (!ec) ws.close(websocket::close_code::normal, ec);
  }
};

HttpServer::HttpServer(SessionManager& sessions, const std::string& address, unsigned short port)
    : impl_(std::make_unique<Impl>(sessions)) {
  const tcp::endpoint endpoint(net::ip::make_address(address), port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen();
}

HttpServer::~HttpServer() { stop(); }

unsigned short HttpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void HttpServer::start() {
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

void HttpServer::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void HttpServer::stop() {
  if (impl_->stopping.exchange(true)) return;
  // shutdown(2) wakes threads blocked in accept/read on these descriptors.
  ::shutdown(impl_->acceptor.native_handle(), SHUT_RDWR);
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(impl_->mu);
    for (const auto& s : impl_->sockets) ::shutdown(s->native_handle(), SHUT_RDWR);
    workers.swap(impl_->workers);
  }
  for (auto& w : workers) w.join();
  beast::error_code ec;
  impl_->acceptor.close(ec);
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopped = true;
  }
  impl_->stopped_cv.notify_all();
}

}  // namespace recourse
