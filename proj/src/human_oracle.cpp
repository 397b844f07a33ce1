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

#include "recourse/human_oracle.hpp"

#include <cmath>
#include <fstream>

namespace recourse {

Proposal proposal_from_vector(const Context& context, ActionIndex action, const Vector& recourse) {
  const auto d = static_cast<Eigen::Index>(context.dim());
  const auto d_m = static_cast<Eigen::Index>(context.actionable_dim());
  if (recourse.size() == d && d != d_m) {
    Context full = Context::from_full(recourse, context.immutable_dim());
    if (!(full.immutable == context.immutable))
      throw InvalidInput("recourse changes immutable features");
    return Proposal{action, std::move(full)};
  }
  if (recourse.size() == d_m) return Proposal{action, context.with_actionable(recourse)};
  throw InvalidInput("recourse must have " + std::to_string(d) + " (full) or " +
                     std::to_string(d_m) + " (actionable) entries");
}

std::optional<BudgetViolation> check_proposal(const HumanQuery& query, const Proposal& proposal,
                                              std::size_t num_actions, double slack) {
  if (proposal.action >= num_actions) throw InvalidInput("action out of range");
  const Vector& origin = query.context.actionable;
  const Vector& moved = proposal.recourse.actionable;
  if (moved.size() != origin.size()) throw InvalidInput("recourse dimension mismatch");
  if (!moved.allFinite()) throw InvalidInput("recourse must be finite");
  const double excess = budget_violation(query.budget, origin, moved);
  if (excess <= slack) return std::nullopt;
  return BudgetViolation{budget_name(query.budget), budget_distance(query.budget, origin, moved),
                         budget_limit(query.budget), excess};
}

SimulatedExpert::SimulatedExpert(double quality, RewardModel model, DistanceSpec budget,
                                 std::uint64_t seed)
    : quality_(quality), model_(std::move(model)), budget_(std::move(budget)),
      rng_(make_rng(seed, 0xe7u)) {
  if (!(quality_ >= 0.0 && quality_ <= 1.0)) throw InvalidInput("expert quality must be in [0, 1]");
  validate(budget_, model_.actionable_dim());
}

SimulatedExpert::Draw SimulatedExpert::draw(const Context& x) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // One uniform per call keeps the stream aligned whatever the branch.
  if (unit(rng_) < quality_) {
    CopSolution best = solve_cop(model_, x, budget_);
    return Draw{Proposal{best.action, std::move(best.recourse)}, true};
  }
  std::uniform_int_distribution<std::size_t> pick(0, model_.num_actions() - 1);
  const ActionIndex action = pick(rng_);
  Vector moved;
  if (const auto* ball = std::get_if<TwoNormBudget>(&budget_)) {
    moved = x.actionable + ball->gamma * uniform_unit_vector(x.actionable_dim(), rng_);
  } else {
    const auto& box = std::get<BoxBudget>(budget_);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    moved = x.actionable;
    for (Eigen::Index j = 0; j < moved.size(); ++j) moved(j) += box.radii(j) * sym(rng_);
  }
  return Draw{Proposal{action, x.with_actionable(std::move(moved))}, false};
}

std::optional<Proposal> SimulatedExpert::propose(const HumanQuery& query) {
  return draw(query.context).proposal;
}

std::optional<Proposal> EchoOracle::propose(const HumanQuery& query) {
  return query.ai_candidate;
}

ReplayScript::ReplayScript(std::vector<ScriptEntry> entries) {
  for (auto& e : entries) {
    if (e.t == 0) throw InvalidInput("script steps are 1-based");
    const std::size_t t = e.t;
    if (!entries_.emplace(t, std::move(e)).second)
      throw InvalidInput("duplicate script entry for step " + std::to_string(t));
  }
}

ReplayScript ReplayScript::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidInput("replay script must be a JSON array");
  std::vector<ScriptEntry> entries;
  for (const auto& item : j) {
    ScriptEntry e;
    e.t = item.at("t").get<std::size_t>();
    e.action = item.at("action").get<std::size_t>();
    const auto values = item.at("recourse").get<std::vector<double>>();
    e.recourse = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    entries.push_back(std::move(e));
  }
  return ReplayScript(std::move(entries));
}

ReplayScript ReplayScript::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open replay script " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed replay script " + path + ": " + e.what());
  }
}

nlohmann::json ReplayScript::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [t, e] : entries_) {
    out.push_back({{"t", t},
                   {"action", e.action},
                   {"recourse", std::vector<double>(e.recourse.data(),
                                                    e.recourse.data() + e.recourse.size())}});
  }
  return out;
}

const ScriptEntry& ReplayScript::at(std::size_t t) const {
  const auto it = entries_.find(t);
  if (it == entries_.end()) throw InvalidInput("replay script has no entry for step " + std::to_string(t));
  return it->second;
}

Proposal propose_replay(const ReplayScript& script, const HumanQuery& query) {
  const ScriptEntry& e = script.at(query.t);
  return proposal_from_vector(query.context, e.action, e.recourse);
}

std::optional<Proposal> ReplayOracle::propose(const HumanQuery& query) {
  return propose_replay(script_, query);
}

ProposalRejected::ProposalRejected(BudgetViolation v)
    : InvalidInput(v.constraint + " budget exceeded: distance " + std::to_string(v.distance) +
                   " > limit " + std::to_string(v.limit) + " (excess " +
                   std::to_string(v.excess) + ")"),
      violation_(std::move(v)) {}

std::optional<Proposal> LiveExpertChannel::ask(const HumanQuery& query,
                                               std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  if (closed_) throw ChannelClosed("expert channel is closed");
  pending_ = query;
  answer_.reset();
  const bool answered =
      cv_.wait_for(lock, timeout, [this] { return answer_.has_value() || closed_; });
  pending_.reset();
  if (closed_ && !answer_) throw ChannelClosed("expert channel closed while waiting");
  if (!answered) return std::nullopt;
  std::optional<Proposal> out = std::move(answer_);
  answer_.reset();
  return out;
}

void LiveExpertChannel::submit(Proposal proposal) {
  std::lock_guard lock(mu_);
  if (closed_) throw ChannelClosed("expert channel is closed");
  if (!pending_) throw std::logic_error("no query is waiting for an answer");
  if (auto violation = check_proposal(*pending_, proposal, num_actions_))
    throw ProposalRejected(std::move(*violation));
  answer_ = std::move(proposal);
  cv_.notify_all();
}

std::optional<HumanQuery> LiveExpertChannel::pending() const {
  std::lock_guard lock(mu_);
  return pending_;
}

void LiveExpertChannel::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

std::optional<Proposal> propose_live(LiveExpertChannel& channel, const HumanQuery& query,
                                     std::chrono::milliseconds timeout) {
  return channel.ask(query, timeout);
}

std::optional<Proposal> LiveOracle::propose(const HumanQuery& query) {
  return channel_.ask(query, timeout_);
}

}  // namespace recourse
