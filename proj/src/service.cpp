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

#include "recourse/service.hpp"

#include <filesystem>
#include <fstream>

namespace recourse {

using nlohmann::json;

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::AwaitingStep: return "AwaitingStep";
    case Phase::AwaitingHuman: return "AwaitingHuman";
    case Phase::Finished: return "Finished";
  }
  return "unknown";
}

ServiceError::ServiceError(int status, const std::string& message, json extra)
    : std::runtime_error(message), status_(status), body_(std::move(extra)) {
  if (!body_.is_object()) body_ = json::object();
  body_["error"] = message;
}

json Event::to_json() const { return json{{"type", type}, {"t", t}, {"payload", payload}}; }

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json distance_json(const DistanceSpec& spec) {
  if (const auto* ball = std::get_if<TwoNormBudget>(&spec))
    return json{{"kind", "TwoNorm"}, {"gamma", ball->gamma}};
  return json{{"kind", "Box"}, {"radii", to_std(std::get<BoxBudget>(spec).radii)}};
}

namespace {

json bounds_json(const Bounds& b) { return json{{"ucb", b.ucb}, {"lcb", b.lcb}, {"ci", b.ci}}; }

json candidate_json(const Proposal& p, const Bounds& b) {
  json j = bounds_json(b);
  j["action"] = p.action;
  j["recourse"] = to_std(p.recourse.full());
  return j;
}

}  // namespace

json step_payload(const StepRecord& r, const Decision& d) {
  const Bounds& chosen = d.adopted() ? *d.human_bounds : d.ai_bounds;
  json j{{"t", r.t},
         {"context", to_std(r.context.full())},
         {"action", r.action},
         {"recourse", to_std(r.recourse.full())},
         {"ucb", chosen.ucb},
         {"lcb", chosen.lcb},
         {"ci", chosen.ci},
         {"source", to_string(r.source)},
         {"reward", r.reward},
         {"expected_reward", r.expected_reward},
         {"regret_step", r.regret_step},
         {"regret_cum", r.regret_cum},
         {"queried", r.queried},
         {"adopted", r.adopted},
         {"oracle_failed", r.oracle_failed},
         {"human_projected", d.human_projected},
         {"ai", candidate_json(d.ai_candidate, d.ai_bounds)},
         {"human", nullptr},
         {"optimum", {{"action", r.opt_action},
                      {"recourse", to_std(r.opt_recourse.full())},
                      {"value", r.opt_value}}}};
  if (d.human_candidate) j["human"] = candidate_json(*d.human_candidate, *d.human_bounds);
  return j;
}

json query_payload(const PendingHrStep& p, const DistanceSpec& budget,
                   std::chrono::milliseconds timeout) {
  json ai = candidate_json(p.ai_candidate, p.ai_bounds);
  return json{{"t", p.t},
              {"context", to_std(p.context.full())},
              {"immutable_dim", p.context.immutable_dim()},
              {"action", p.ai_candidate.action},
              {"recourse", to_std(p.ai_candidate.recourse.full())},
              {"ucb", p.ai_bounds.ucb},
              {"lcb", p.ai_bounds.lcb},
              {"ci", p.ai_bounds.ci},
              {"ai", ai},
              {"distance", distance_json(budget)},
              {"timeout_ms", timeout.count()}};
}

Session::Session(std::string id, ExperimentConfig config, std::shared_ptr<const Environment> env,
                 std::string log_dir)
    : id_(std::move(id)),
      config_(std::move(config)),
      log_dir_(std::move(log_dir)),
      sim_(env, make_policy_config(config_, PolicyKind::HRBandit, *env), config_.seeds.front()) {}

std::unique_lock<std::mutex> Session::try_acquire() {
  std::unique_lock lock(op_mu_, std::try_to_lock);
  if (!lock.owns_lock()) throw ServiceError(409, "another request on this session is in progress");
  return lock;
}

namespace {

std::chrono::milliseconds timeout_of(const ExperimentConfig& c) {
  return std::chrono::milliseconds(static_cast<long long>(c.expert.timeout_s * 1000.0));
}

}  // namespace

Event Session::advance() {
  auto lock = try_acquire();
  if (phase_ != Phase::AwaitingStep) {
    throw ServiceError(409, "advance is not allowed in phase " + to_string(phase_),
                       json{{"phase", to_string(phase_)}});
  }
  PendingHrStep pending = sim_.policy().begin_hr_step(sim_.next_context());
  if (!pending.consult) return complete_step(sim_.policy().finish_hr_step(pending, std::nullopt), false);

  const auto timeout = timeout_of(config_);
  Event e{"query", pending.t, query_payload(pending, sim_.environment().budget, timeout)};
  pending_ = std::move(pending);
  deadline_ = std::chrono::steady_clock::now() + timeout;
  phase_ = Phase::AwaitingHuman;
  emit(e);
  return e;
}

Event Session::submit_human(const json& body) {
  auto lock = try_acquire();
  if (phase_ != Phase::AwaitingHuman) {
    throw ServiceError(409, "no query is pending (phase " + to_string(phase_) +
                                "); a late answer is stale",
                       json{{"phase", to_string(phase_)}});
  }
  Proposal proposal;
  try {
    const auto action = body.at("action").get<long long>();
    if (action < 0 || static_cast<std::size_t>(action) >= sim_.environment().num_actions())
      throw ServiceError(422, "action out of range", json{{"constraint", "action"}});
    const auto values = body.at("recourse").get<std::vector<double>>();
    const Vector v = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    proposal = proposal_from_vector(pending_->context, static_cast<ActionIndex>(action), v);
  } catch (const json::exception& e) {
    throw ServiceError(400, std::string("expected {action, recourse}: ") + e.what());
  } catch (const InvalidInput& e) {
    throw ServiceError(422, e.what(), json{{"constraint", "shape"}});
  }
  const HumanQuery query = pending_->query(sim_.environment().budget);
  std::optional<BudgetViolation> violation;
  try {
    violation = check_proposal(query, proposal, sim_.environment().num_actions());
  } catch (const InvalidInput& e) {
    throw ServiceError(422, e.what(), json{{"constraint", "shape"}});
  }
  if (violation) {
    throw ServiceError(422, ProposalRejected(*violation).what(),
                       json{{"constraint", violation->constraint},
                            {"distance", violation->distance},
                            {"limit", violation->limit},
                            {"excess", violation->excess}});
  }
  const PendingHrStep pending = std::move(*pending_);
  pending_.reset();
  return complete_step(sim_.policy().finish_hr_step(pending, std::move(proposal)), false);
}

std::optional<Event> Session::expire(std::chrono::steady_clock::time_point now) {
  std::unique_lock lock(op_mu_);
  if (phase_ != Phase::AwaitingHuman || now < deadline_) return std::nullopt;
  const PendingHrStep pending = std::move(*pending_);
  pending_.reset();
  return complete_step(sim_.policy().finish_hr_step(pending, std::nullopt), true);
}

Event Session::complete_step(const Decision& decision, bool timed_out) {
  const StepRecord& r = sim_.commit(decision);
  Event e{"step", r.t, step_payload(r, decision)};
  e.payload["timed_out"] = timed_out;
  phase_ = Phase::AwaitingStep;
  emit(e);
  finish_if_done();
  return e;
}

void Session::finish_if_done() {
  if (sim_.steps_done() < config_.horizon) return;
  phase_ = Phase::Finished;
  const RunSummary s = sim_.log().summary();
  if (!log_dir_.empty()) {
    std::filesystem::create_directories(log_dir_);
    std::ofstream out(std::filesystem::path(log_dir_) / (id_ + ".csv"));
    sim_.log().write_csv(out);
  }
  emit(Event{"finished", s.horizon, s.to_json()});
}

void Session::emit(const Event& e) {
  std::lock_guard lock(event_mu_);
  events_.push_back(e);
  for (auto& [handle, sink] : sinks_) sink(e);
}

std::size_t Session::subscribe(EventSink sink) {
  std::lock_guard lock(event_mu_);
  for (const auto& e : events_) sink(e);
  const std::size_t handle = next_sink_++;
  sinks_.emplace(handle, std::move(sink));
  return handle;
}

void Session::unsubscribe(std::size_t handle) {
  std::lock_guard lock(event_mu_);
  sinks_.erase(handle);
}

Phase Session::phase() const {
  std::lock_guard lock(op_mu_);
  return phase_;
}

json Session::snapshot() const {
  std::lock_guard lock(op_mu_);
  const RunSummary s = sim_.log().summary();
  json j{{"id", id_},
         {"phase", to_string(phase_)},
         {"t", sim_.steps_done()},
         {"T", config_.horizon},
         {"queries", s.queries},
         {"adoptions", s.adoptions},
         {"regret_cum", s.regret},
         {"distance", distance_json(sim_.environment().budget)},
         {"pending", nullptr},
         {"config", config_.to_json()}};
  if (pending_) j["pending"] = query_payload(*pending_, sim_.environment().budget, timeout_of(config_));
  return j;
}

RunLog Session::log() const {
  std::lock_guard lock(op_mu_);
  return sim_.log();
}

std::string Session::log_csv() const { return log().csv(); }

SessionManager::SessionManager(std::string log_dir, std::chrono::milliseconds poll)
    : log_dir_(std::move(log_dir)), poll_(poll) {
  watchdog_ = std::thread([this] { watchdog(); });
}

SessionManager::~SessionManager() { shutdown(); }

void SessionManager::shutdown() {
  {
    std::lock_guard lock(stop_mu_);
    stopping_ = true;
  }
  stop_cv_.notify_all();
  if (watchdog_.joinable()) watchdog_.join();
}

std::string SessionManager::create(const json& body) {
  if (!body.is_object()) throw ServiceError(400, "session config must be a JSON object");
  json cfg = body;
  if (cfg.contains("policy") && !cfg.contains("policies")) cfg["policies"] = json::array({cfg["policy"]});
  cfg.erase("policy");
  if (!cfg.contains("policies")) cfg["policies"] = json::array({"hr"});
  if (!cfg.contains("seeds")) cfg["seeds"] = json::array({0});
  if (!cfg.contains("expert")) cfg["expert"] = json::object();
  if (!cfg["expert"].contains("kind")) cfg["expert"]["kind"] = "live";

  ExperimentConfig config;
  std::shared_ptr<const Environment> env;
  try {
    config = ExperimentConfig::from_json(cfg);
    if (config.policies.size() != 1 || config.policies.front() != PolicyKind::HRBandit)
      throw ServiceError(400, "a live session needs policy \"hr\"");
    if (config.expert.kind != ExpertKind::Live)
      throw ServiceError(400, "a live session needs expert kind \"live\"");
    if (config.seeds.size() != 1) throw ServiceError(400, "a live session runs exactly one seed");
    env = std::make_shared<const Environment>(make_environment(config.environment, config.seeds.front()));
  } catch (const ConfigError& e) {
    throw ServiceError(400, e.what());
  } catch (const DataError& e) {
    throw ServiceError(400, e.what());
  } catch (const InvalidInput& e) {
    throw ServiceError(400, e.what());
  }

  std::lock_guard lock(mu_);
  const std::string id = "s" + std::to_string(next_id_++);
  sessions_.emplace(id, std::make_shared<Session>(id, std::move(config), std::move(env), log_dir_));
  return id;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "no session '" + id + "'");
  return it->second;
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

void SessionManager::watchdog() {
  std::unique_lock stop_lock(stop_mu_);
  while (!stop_cv_.wait_for(stop_lock, poll_, [this] { return stopping_; })) {
    std::vector<std::shared_ptr<Session>> all;
    {
      std::lock_guard lock(mu_);
      for (const auto& [id, s] : sessions_) all.push_back(s);
    }
    const auto now = std::chrono::steady_clock::now();
    for (const auto& s : all) s->expire(now);
  }
}

}  // namespace recourse
