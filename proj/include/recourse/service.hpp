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

// Live HR-Bandit sessions driven step by step by an external expert console.
// Transport independent; see server.hpp for the HTTP/WebSocket front end.

#ifndef RECOURSE_SERVICE_HPP
#define RECOURSE_SERVICE_HPP

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "recourse/harness.hpp"

namespace recourse {

enum class Phase { AwaitingStep, AwaitingHuman, Finished };
std::string to_string(Phase phase);

// Error with an HTTP-style status: 400 bad request, 404 unknown session,
// 409 conflict (wrong phase, busy, stale), 422 infeasible submission.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message, nlohmann::json extra = nlohmann::json::object());
  int status() const { return status_; }
  // {"error": message, ...extra}
  const nlohmann::json& body() const { return body_; }

 private:
  int status_;
  nlohmann::json body_;
};

// Stream event {type: step|query|finished, t, payload}.
struct Event {
  std::string type;
  std::size_t t = 0;
  nlohmann::json payload;

  nlohmann::json to_json() const;
};

using EventSink = std::function<void(const Event&)>;

class Session {
 public:
  Session(std::string id, ExperimentConfig config, std::shared_ptr<const Environment> env,
          std::string log_dir);

  const std::string& id() const { return id_; }

  Event advance();
  Event submit_human(const nlohmann::json& body);
  // Resolves an expired query with the AI decision. Returns the step event,
  // or nullopt when nothing was due.
  std::optional<Event> expire(std::chrono::steady_clock::time_point now);

  nlohmann::json snapshot() const;
  std::string log_csv() const;
  RunLog log() const;
  Phase phase() const;

  // Replays every past event, then forwards new ones. Returns a handle.
  std::size_t subscribe(EventSink sink);
  void unsubscribe(std::size_t handle);

 private:
  Event complete_step(const Decision& decision, bool timed_out);
  void emit(const Event& e);
  void finish_if_done();
  std::unique_lock<std::mutex> try_acquire();

  const std::string id_;
  const ExperimentConfig config_;
  const std::string log_dir_;

  mutable std::mutex op_mu_;  // one request at a time
  Simulation sim_;
  Phase phase_ = Phase::AwaitingStep;
  std::optional<PendingHrStep> pending_;
  std::chrono::steady_clock::time_point deadline_;

  mutable std::mutex event_mu_;
  std::vector<Event> events_;
  std::map<std::size_t, EventSink> sinks_;
  std::size_t next_sink_ = 1;
};

/**
 * Owns the sessions and a watchdog thread that applies the expert timeout.
 */
class SessionManager {
 public:
  explicit SessionManager(std::string log_dir = {},
                          std::chrono::milliseconds poll = std::chrono::milliseconds(20));
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  // Body is an experiment config; the policy must be "hr", the expert live
  // (the default here) and exactly one seed. Throws ServiceError(400).
  std::string create(const nlohmann::json& body);
  std::shared_ptr<Session> get(const std::string& id) const;  // throws ServiceError(404)

  std::size_t size() const;
  void shutdown();

 private:
  void watchdog();

  const std::string log_dir_;
  const std::chrono::milliseconds poll_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_id_ = 1;

  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  bool stopping_ = false;
  std::thread watchdog_;
};

// JSON view of one completed step (the `payload` of a step event).
nlohmann::json step_payload(const StepRecord& r, const Decision& d);
nlohmann::json query_payload(const PendingHrStep& p, const DistanceSpec& budget,
                             std::chrono::milliseconds timeout);
nlohmann::json distance_json(const DistanceSpec& spec);
std::vector<double> to_std(const Vector& v);

}  // namespace recourse

#endif  // RECOURSE_SERVICE_HPP
