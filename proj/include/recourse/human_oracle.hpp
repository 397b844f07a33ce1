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

// Expert implementations: a simulated expert of quality q, a scripted replay
// expert, an echo expert, and a blocking channel to a live console.

#ifndef RECOURSE_HUMAN_ORACLE_HPP
#define RECOURSE_HUMAN_ORACLE_HPP

#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "recourse/model.hpp"
#include "recourse/policies.hpp"

namespace recourse {

// Builds a proposal from a raw recourse vector. `recourse` is either the full
// context (d entries, immutable part must match) or only the actionable part.
Proposal proposal_from_vector(const Context& context, ActionIndex action, const Vector& recourse);

struct BudgetViolation {
  std::string constraint;  // "TwoNorm" or "Box"
  double distance = 0.0;
  double limit = 0.0;
  double excess = 0.0;
};

// Reports why `proposal` is not admissible for `query`, or nullopt when it is.
std::optional<BudgetViolation> check_proposal(const HumanQuery& query, const Proposal& proposal,
                                              std::size_t num_actions, double slack = 1e-9);

/**
 * With probability q proposes the true optimum of the counterfactual problem;
 * otherwise a uniformly random action and a random feasible recourse (uniform
 * on the budget sphere for a two-norm budget, uniform in the box otherwise).
 */
class SimulatedExpert : public HumanOracle {
 public:
  SimulatedExpert(double quality, RewardModel model, DistanceSpec budget, std::uint64_t seed);

  struct Draw {
    Proposal proposal;
    bool informed = false;  // came from the true model
  };

  Draw draw(const Context& x);
  std::optional<Proposal> propose(const HumanQuery& query) override;

  double quality() const { return quality_; }

 private:
  double quality_;
  RewardModel model_;
  DistanceSpec budget_;
  Rng rng_;
};

// Always proposes the AI's own candidate.
class EchoOracle : public HumanOracle {
 public:
  std::optional<Proposal> propose(const HumanQuery& query) override;
};

struct ScriptEntry {
  std::size_t t = 0;
  ActionIndex action = 0;
  Vector recourse;
};

class ReplayScript {
 public:
  ReplayScript() = default;
  explicit ReplayScript(std::vector<ScriptEntry> entries);

  // JSON array of {t, action, recourse: [floats]}.
  static ReplayScript from_json(const nlohmann::json& j);
  static ReplayScript load(const std::string& path);
  nlohmann::json to_json() const;

  bool contains(std::size_t t) const { return entries_.count(t) != 0; }
  const ScriptEntry& at(std::size_t t) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::size_t, ScriptEntry> entries_;
};

// Scripted proposal for step t; throws InvalidInput when the script has none.
Proposal propose_replay(const ReplayScript& script, const HumanQuery& query);

class ReplayOracle : public HumanOracle {
 public:
  explicit ReplayOracle(ReplayScript script) : script_(std::move(script)) {}
  std::optional<Proposal> propose(const HumanQuery& query) override;

 private:
  ReplayScript script_;
};

class ChannelClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProposalRejected : public InvalidInput {
 public:
  explicit ProposalRejected(BudgetViolation v);
  const BudgetViolation& violation() const { return violation_; }

 private:
  BudgetViolation violation_;
};

/**
 * Rendezvous between a bandit loop waiting for an expert and a console
 * answering. ask() blocks the bandit side; submit() is called from the
 * console side and validates the answer before it is handed over.
 */
class LiveExpertChannel {
 public:
  explicit LiveExpertChannel(std::size_t num_actions) : num_actions_(num_actions) {}

  // nullopt on timeout. Throws ChannelClosed once close() was called.
  std::optional<Proposal> ask(const HumanQuery& query, std::chrono::milliseconds timeout);

  // Throws ProposalRejected for an infeasible answer, std::logic_error when no
  // query is waiting, ChannelClosed after close().
  void submit(Proposal proposal);

  std::optional<HumanQuery> pending() const;
  void close();

 private:
  std::size_t num_actions_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::optional<HumanQuery> pending_;
  std::optional<Proposal> answer_;
  bool closed_ = false;
};

std::optional<Proposal> propose_live(LiveExpertChannel& channel, const HumanQuery& query,
                                     std::chrono::milliseconds timeout);

class LiveOracle : public HumanOracle {
 public:
  LiveOracle(LiveExpertChannel& channel, std::chrono::milliseconds timeout)
      : channel_(channel), timeout_(timeout) {}
  std::optional<Proposal> propose(const HumanQuery& query) override;

 private:
  LiveExpertChannel& channel_;
  std::chrono::milliseconds timeout_;
};

}  // namespace recourse

#endif  // RECOURSE_HUMAN_ORACLE_HPP
