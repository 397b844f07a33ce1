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

#ifndef RECOURSE_POLICIES_HPP
#define RECOURSE_POLICIES_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "recourse/estimator.hpp"
#include "recourse/model.hpp"
#include "recourse/ocop.hpp"

namespace recourse {

enum class PolicyKind { LinUCB, RLinUCB, HRBandit };
enum class DecisionSource { AI, Human };

std::string to_string(PolicyKind kind);      // "linucb", "rlinucb", "hr"
std::string to_string(DecisionSource source);  // "AI", "Human"
PolicyKind parse_policy_kind(const std::string& name);

// Parameters of the human-AI selection rule.
struct HrParams {
  // Delta: consult the expert when UCB - LCB of the AI candidate exceeds it.
  // Infinity disables consultation.
  double consult_threshold = 1.0;
  // zeta: the expert's proposal needs CI_AI < zeta * CI_human.
  double variance_control = 3.0;

  void validate() const;
};

inline constexpr double kNeverConsult = std::numeric_limits<double>::infinity();

struct Proposal {
  ActionIndex action = 0;
  Context recourse;
};

// What the expert sees when consulted.
struct HumanQuery {
  std::size_t t = 0;  // 1-based step index
  Context context;
  Proposal ai_candidate;
  Bounds ai_bounds;
  DistanceSpec budget;
};

// Black-box expert. Returning nullopt (or throwing) means no answer; the
// policy then falls back to the AI decision.
class HumanOracle {
 public:
  virtual ~HumanOracle() = default;
  virtual std::optional<Proposal> propose(const HumanQuery& query) = 0;
};

struct Decision {
  ActionIndex action = 0;
  Context recourse;
  DecisionSource source = DecisionSource::AI;

  Proposal ai_candidate;
  Bounds ai_bounds;
  std::optional<Proposal> human_candidate;
  std::optional<Bounds> human_bounds;

  bool queried = false;
  bool oracle_failed = false;       // consulted but no usable answer
  bool human_projected = false;     // proposal was pulled back into the budget
  OcopDiagnostics solver;

  bool adopted() const { return source == DecisionSource::Human; }
};

// The AI half of an HR-Bandit step, before the expert is (maybe) consulted.
struct PendingHrStep {
  std::size_t t = 0;
  Context context;
  Proposal ai_candidate;
  Bounds ai_bounds;
  OcopDiagnostics solver;
  bool consult = false;

  HumanQuery query(const DistanceSpec& budget) const;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::RLinUCB;
  ConfidenceParams confidence;
  DistanceSpec budget = TwoNormBudget{1.0};
  HrParams hr;
  AdmmParams admm;
  OcopMethod ocop_method = OcopMethod::Admm;
};

/**
 * Per-session bandit state: one ridge estimate per action plus the settings
 * of the chosen policy. A step produces a Decision; observe() feeds the
 * reward back. Steps and observations must alternate.
 */
class PolicyState {
 public:
  PolicyState(PolicyConfig config, std::size_t immutable_dim, std::size_t actionable_dim);

  const PolicyConfig& config() const { return config_; }
  PolicyKind kind() const { return config_.kind; }
  std::size_t num_actions() const { return arms_.size(); }
  std::size_t dim() const { return immutable_dim_ + actionable_dim_; }
  const std::vector<ArmEstimate>& arms() const { return arms_; }
  std::size_t query_count() const { return queries_; }
  std::size_t steps_taken() const { return steps_; }

  double radius(ActionIndex a) const;
  std::vector<double> radii() const;
  Bounds bounds(ActionIndex a, const Context& x) const;

  // Action-only UCB at the unmodified context.
  Decision linucb_step(const Context& x) const;
  // Joint action/recourse choice from the optimistic problem.
  Decision rlinucb_step(const Context& x) const;

  PendingHrStep begin_hr_step(const Context& x) const;
  // Completes a pending step. When pending.consult is set the step counts as
  // a query even if `proposal` is empty (expert timed out or failed).
  Decision finish_hr_step(const PendingHrStep& pending, std::optional<Proposal> proposal);
  Decision hr_bandit_step(const Context& x, HumanOracle& oracle);

  // Dispatches on the configured kind. `oracle` is required for HR-Bandit.
  Decision step(const Context& x, HumanOracle* oracle);

  void observe(const Decision& decision, double reward);

 private:
  void check_context(const Context& x) const;
  Proposal sanitize(const Context& x, Proposal proposal, bool& projected) const;

  PolicyConfig config_;
  std::size_t immutable_dim_;
  std::size_t actionable_dim_;
  std::vector<ArmEstimate> arms_;
  std::size_t queries_ = 0;
  std::size_t steps_ = 0;
};

}  // namespace recourse

#endif  // RECOURSE_POLICIES_HPP
