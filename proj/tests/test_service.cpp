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

#include <chrono>
#include <filesystem>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "recourse/human_oracle.hpp"
#include "recourse/server.hpp"
#include "recourse/service.hpp"

namespace recourse {
namespace {

using nlohmann::json;
using namespace std::chrono_literals;

json session_body(std::size_t horizon, double timeout_s = 60.0) {
  return json{{"T", horizon}, {"seeds", {3}}, {"expert", {{"kind", "live"}, {"timeout_s", timeout_s}}}};
}

int status_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 0;
}

TEST(SessionManager, CreateValidatesBody) {
  SessionManager mgr;
  const std::string id = mgr.create(json::object());
  EXPECT_EQ(id, "s1");
  EXPECT_EQ(mgr.create(json::object()), "s2");
  EXPECT_EQ(mgr.size(), 2u);
  EXPECT_EQ(status_of([&] { mgr.get("nope"); }), 404);
  EXPECT_EQ(status_of([&] { mgr.create(json{{"policies", {"rlinucb"}}}); }), 400);
  EXPECT_EQ(status_of([&] { mgr.create(json{{"seeds", {1, 2}}}); }), 400);
  EXPECT_EQ(status_of([&] { mgr.create(json{{"expert", {{"kind", "simulated"}}}}); }), 400);
  EXPECT_EQ(status_of([&] { mgr.create(json{{"T", -3}}); }), 400);
  EXPECT_EQ(status_of([&] { mgr.create(json::array()); }), 400);
  EXPECT_EQ(status_of([&] {
              mgr.create(json{{"environment", {{"kind", "ihdp"}, {"data", "/nonexistent.csv"}}}});
            }),
            400);
  EXPECT_EQ(mgr.get(id)->phase(), Phase::AwaitingStep);
}

TEST(Session, PhaseMachineAndValidation) {
  SessionManager mgr;
  auto s = mgr.get(mgr.create(session_body(3)));
  EXPECT_EQ(status_of([&] { s->submit_human(json{{"action", 0}, {"recourse", {0, 0, 0, 0, 0}}}); }),
            409);

  const Event q = s->advance();
  ASSERT_EQ(q.type, "query");  // nothing learned yet, so the interval is wide
  EXPECT_EQ(q.t, 1u);
  EXPECT_EQ(s->phase(), Phase::AwaitingHuman);
  EXPECT_EQ(q.payload.at("distance").at("kind"), "TwoNorm");
  EXPECT_EQ(q.payload.at("context").size(), 5u);
  EXPECT_EQ(q.payload.at("timeout_ms"), 60000);
  const double two_ci = q.payload.at("ucb").get<double>() - q.payload.at("lcb").get<double>();
  EXPECT_GT(two_ci, 1.0);

  try {
    s->advance();
    FAIL() << "advance while awaiting the expert";
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 409);
    EXPECT_EQ(e.body().at("phase"), "AwaitingHuman");
  }

  const std::vector<double> x = q.payload.at("context").get<std::vector<double>>();
  EXPECT_EQ(status_of([&] { s->submit_human(json{{"action", 5}, {"recourse", x}}); }), 422);
  EXPECT_EQ(status_of([&] { s->submit_human(json{{"action", 0}, {"recourse", {1.0, 2.0}}}); }), 422);
  EXPECT_EQ(status_of([&] { s->submit_human(json{{"recourse", x}}); }), 400);

  std::vector<double> far = x;
  far[0] += 3.0;
  far[1] += 4.0;
  try {
    s->submit_human(json{{"action", 1}, {"recourse", far}});
    FAIL() << "infeasible proposal accepted";
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 422);
    EXPECT_EQ(e.body().at("constraint"), "TwoNorm");
    EXPECT_NEAR(e.body().at("distance").get<double>(), 5.0, 1e-12);
    EXPECT_DOUBLE_EQ(e.body().at("limit").get<double>(), 1.0);
    EXPECT_NEAR(e.body().at("excess").get<double>(), 4.0, 1e-12);
  }
  EXPECT_EQ(s->phase(), Phase::AwaitingHuman);

  std::vector<double> near = x;
  near[2] += 0.5;
  const Event step = s->submit_human(json{{"action", 1}, {"recourse", near}});
  EXPECT_EQ(step.type, "step");
  EXPECT_EQ(step.t, 1u);
  EXPECT_TRUE(step.payload.at("queried").get<bool>());
  EXPECT_FALSE(step.payload.at("timed_out").get<bool>());
  ASSERT_FALSE(step.payload.at("human").is_null());
  EXPECT_EQ(step.payload.at("human").at("action"), 1);
  EXPECT_EQ(s->phase(), Phase::AwaitingStep);

  const json snap = s->snapshot();
  EXPECT_EQ(snap.at("t"), 1);
  EXPECT_EQ(snap.at("queries"), 1);
  EXPECT_TRUE(snap.at("pending").is_null());
}

TEST(Session, TimeoutResolvesToAiAndLateAnswerIsStale) {
  SessionManager mgr({}, 5ms);
  auto s = mgr.get(mgr.create(session_body(2, 0.05)));
  const Event q = s->advance();
  ASSERT_EQ(q.type, "query");
  std::vector<Event> seen;
  std::mutex mu;
  s->subscribe([&](const Event& e) {
    std::lock_guard lock(mu);
    seen.push_back(e);
  });
  const auto give_up = std::chrono::steady_clock::now() + 5s;
  while (s->phase() == Phase::AwaitingHuman && std::chrono::steady_clock::now() < give_up)
    std::this_thread::sleep_for(5ms);
  ASSERT_EQ(s->phase(), Phase::AwaitingStep);

  const auto x = q.payload.at("context").get<std::vector<double>>();
  try {
    s->submit_human(json{{"action", 0}, {"recourse", x}});
    FAIL() << "late answer accepted";
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 409);
    EXPECT_NE(std::string(e.what()).find("stale"), std::string::npos);
  }

  const RunLog log = s->log();
  ASSERT_EQ(log.steps.size(), 1u);
  EXPECT_TRUE(log.steps[0].queried);
  EXPECT_TRUE(log.steps[0].oracle_failed);
  EXPECT_EQ(log.steps[0].source, DecisionSource::AI);
  EXPECT_EQ(log.steps[0].action, q.payload.at("action").get<std::size_t>());

  std::lock_guard lock(mu);
  ASSERT_EQ(seen.size(), 2u);  // backlog query, then the expired step
  EXPECT_EQ(seen[0].type, "query");
  EXPECT_EQ(seen[1].type, "step");
  EXPECT_TRUE(seen[1].payload.at("timed_out").get<bool>());
}

TEST(Session, MatchesBatchRunWithSameExpert) {
  constexpr std::size_t kHorizon = 40;
  constexpr std::uint64_t kSeed = 3;
  const std::string log_dir = ::testing::TempDir() + "/recourse_sessions";
  std::filesystem::remove_all(log_dir);
  SessionManager mgr(log_dir);
  const std::string id = mgr.create(session_body(kHorizon));
  auto s = mgr.get(id);

  ExperimentConfig batch;
  batch.horizon = kHorizon;
  batch.seeds = {kSeed};
  const Environment env = make_environment(batch.environment, kSeed);
  SimulatedExpert expert(batch.expert.quality, env.model, env.budget, kSeed);

  std::size_t queries = 0;
  while (s->phase() != Phase::Finished) {
    const Event e = s->advance();
    if (e.type != "query") continue;
    ++queries;
    const auto raw = e.payload.at("context").get<std::vector<double>>();
    const Vector x = Eigen::Map<const Vector>(raw.data(), static_cast<Eigen::Index>(raw.size()));
    const auto draw = expert.draw(Context(Vector(0), x));
    s->submit_human(json{{"action", draw.proposal.action},
                         {"recourse", to_std(draw.proposal.recourse.actionable)}});
  }
  EXPECT_GT(queries, 0u);

  const RunLog reference = run_single(batch, PolicyKind::HRBandit, kSeed);
  EXPECT_EQ(s->log_csv(), reference.csv());
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(log_dir) / (id + ".csv")));
  EXPECT_EQ(status_of([&] { s->advance(); }), 409);
}

TEST(Routes, StatusCodes) {
  SessionManager mgr;
  EXPECT_EQ(handle_request(mgr, "GET", "/nothing", "").status, 404);
  EXPECT_EQ(handle_request(mgr, "OPTIONS", "/sessions", "").status, 204);
  EXPECT_EQ(handle_request(mgr, "GET", "/sessions", "").status, 405);
  EXPECT_EQ(handle_request(mgr, "POST", "/sessions", "{not json").status, 400);
  const HttpResponse created = handle_request(mgr, "POST", "/sessions", session_body(2).dump());
  ASSERT_EQ(created.status, 201);
  const std::string id = json::parse(created.body).at("id");
  EXPECT_EQ(handle_request(mgr, "GET", "/sessions/" + id, "").status, 200);
  EXPECT_EQ(handle_request(mgr, "GET", "/sessions/zzz", "").status, 404);
  EXPECT_EQ(handle_request(mgr, "GET", "/sessions/" + id + "/stream", "").status, 426);
  EXPECT_EQ(handle_request(mgr, "GET", "/sessions/" + id + "/advance", "").status, 405);
  const HttpResponse human = handle_request(mgr, "POST", "/sessions/" + id + "/human", "{}");
  EXPECT_EQ(human.status, 409);
  EXPECT_EQ(json::parse(human.body).at("phase"), "AwaitingStep");
  const HttpResponse adv = handle_request(mgr, "POST", "/sessions/" + id + "/advance", "");
  EXPECT_EQ(adv.status, 200);
  EXPECT_EQ(json::parse(adv.body).at("type"), "query");
  const HttpResponse log = handle_request(mgr, "GET", "/sessions/" + id + "/log?x=1", "");
  EXPECT_EQ(log.status, 200);
  EXPECT_EQ(log.content_type, "text/csv");
  EXPECT_EQ(log.body.substr(0, 5), "t,x0,");
}

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct Client {
  net::io_context ioc;
  tcp::socket sock{ioc};

  explicit Client(unsigned short port) {
    sock.connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
  }

  std::pair<int, json> request(http::verb verb, const std::string& target, const json& body = {}) {
    http::request<http::string_body> req{verb, target, 11};
    req.set(http::field::host, "127.0.0.1");
    req.set(http::field::content_type, "application/json");
    if (!body.is_null()) req.body() = body.dump();
    req.prepare_payload();
    http::write(sock, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(sock, buf, res);
    return {static_cast<int>(res.result_int()), json::parse(res.body())};
  }
};

TEST(HttpServer, RestAndWebSocketStream) {
  SessionManager mgr;
  HttpServer server(mgr, "127.0.0.1", 0);
  server.start();
  const unsigned short port = server.port();
  ASSERT_NE(port, 0);

  Client api(port);
  auto [created, body] = api.request(http::verb::post, "/sessions", session_body(4));
  ASSERT_EQ(created, 201);
  const std::string id = body.at("id");

  net::io_context ws_ioc;
  websocket::stream<tcp::socket> ws(ws_ioc);
  ws.next_layer().connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
  ws.handshake("127.0.0.1", "/sessions/" + id + "/stream");

  std::vector<json> returned;
  for (int guard = 0; guard < 20; ++guard) {
    auto [st, ev] = api.request(http::verb::post, "/sessions/" + id + "/advance");
    if (st == 409) break;
    ASSERT_EQ(st, 200);
    returned.push_back(ev);
    if (ev.at("type") == "query") {
      const auto echo = ev.at("payload").at("ai");
      auto [hs, step] = api.request(http::verb::post, "/sessions/" + id + "/human",
                                    json{{"action", echo.at("action")}, {"recourse", echo.at("recourse")}});
      ASSERT_EQ(hs, 200);
      returned.push_back(step);
    }
  }

  std::vector<json> streamed;
  for (;;) {
    beast::flat_buffer buf;
    beast::error_code ec;
    ws.read(buf, ec);
    if (ec) break;
    streamed.push_back(json::parse(beast::buffers_to_string(buf.data())));
  }
  ASSERT_EQ(streamed.size(), returned.size() + 1);
  for (std::size_t i = 0; i < returned.size(); ++i) EXPECT_EQ(streamed[i], returned[i]);
  EXPECT_EQ(streamed.back().at("type"), "finished");
  EXPECT_EQ(streamed.back().at("payload").at("T"), 4);

  auto [snap_status, snap] = api.request(http::verb::get, "/sessions/" + id);
  EXPECT_EQ(snap_status, 200);
  EXPECT_EQ(snap.at("phase"), "Finished");
  server.stop();
}

TEST(HttpServer, StopClosesIdleConnections) {
  SessionManager mgr;
  auto server = std::make_unique<HttpServer>(mgr, "127.0.0.1", 0);
  server->start();
  Client idle(server->port());
  std::thread waiter([&] { server->wait(); });
  server->stop();
  waiter.join();
  char byte;
  beast::error_code ec;
  idle.sock.read_some(net::buffer(&byte, 1), ec);
  EXPECT_TRUE(ec);
}

}  // namespace
}  // namespace recourse
