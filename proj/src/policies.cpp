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

#include "recourse/policies.hpp"

#include <cmath>

namespace recourse {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::LinUCB: return "linucb";
    case PolicyKind::RLinUCB: return "rlinucb";
    case PolicyKind::HRBandit: return "hr";
  }
  return "unknown";
}

std::string to_string(DecisionSource source) {
  return source == DecisionSource::Human ? "Human" : "AI";
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "linucb") return PolicyKind::LinUCB;
  if (name == "rlinucb") return PolicyKind::RLinUCB;
  if (name == "hr" || name == "hr-bandit" || name == "hr_bandit") return PolicyKind::HRBandit;
  throw ConfigError("unknown policy '" + name + "' (expected linucb, rlinucb or hr)");
}

void HrParams::validate() const {
  if (!(consult_threshold >= 0.0)) throw InvalidInput("consult threshold must be nonnegative");
  if (!(variance_control > 0.0) || !std::isfinite(variance_control))
    throw InvalidInput("variance control must be finite and positive");
}

HumanQuery PendingHrStep::query(const DistanceSpec& budget) const {
  return HumanQuery{t, context, ai_candidate, ai_bounds, budget};
}

PolicyState::PolicyState(PolicyConfig config, std::size_t immutable_dim,
                         std::size_t actionable_dim)
    : config_(std::move(config)), immutable_dim_(immutable_dim), actionable_dim_(actionable_dim) {
  if (actionable_dim_ == 0) throw InvalidInput("at least one actionable feature is required");
  config_.confidence.validate();
  config_.hr.validate();
  config_.admm.validate();
  validate(config_.budget, actionable_dim_);
  arms_.assign(config_.confidence.num_actions, ArmEstimate(dim()));
}

void PolicyState::check_context(const Context& x) const {
  if (x.immutable_dim() != immutable_dim_ || x.actionable_dim() != actionable_dim_)
    throw InvalidInput("context split does not match the policy");
  if (!x.immutable.allFinite() || !x.actionable.allFinite())
    throw InvalidInput("context must be finite");
}

double PolicyState::radius(ActionIndex a) const {
  return confidence_radius(arms_.at(a), config_.confidence);
}

std::vector<double> PolicyState::radii() const {
  std::vector<double> out;
  out.reserve(arms_.size());
  for (const auto& arm : arms_) out.push_back(confidence_radius(arm, config_.confidence));
  return out;
}

Bounds PolicyState::bounds(ActionIndex a, const Context& x) const {
  return confidence_bounds(arms_.at(a), x.full(), radius(a));
}

Decision PolicyState::linucb_step(const Context& x) const {
  check_context(x);
  const Vector full = x.full();
  Decision d;
  for (ActionIndex a = 0; a < arms_.size(); ++a) {
    const Bounds b = confidence_bounds(arms_[a], full, radius(a));
    if (a == 0 || b.ucb > d.ai_bounds.ucb) {
      d.action = a;
      d.ai_bounds = b;
    }
  }
  d.recourse = x;
  d.ai_candidate = Proposal{d.action, x};
  return d;
}

Decision PolicyState::rlinucb_step(const Context& x) const {
  check_context(x);
  const std::vector<double> rho = radii();
  OcopSolution sol =
      select_ucb_recourse(arms_, rho, x, config_.budget, config_.admm, config_.ocop_method);
  Decision d;
  d.action = sol.action;
  d.recourse = sol.recourse;
  d.ai_candidate = Proposal{sol.action, sol.recourse};
  d.ai_bounds = bounds(sol.action, sol.recourse);
  d.solver = std::move(sol.diagnostics);
  return d;
}

PendingHrStep PolicyState::begin_hr_step(const Context& x) const {
  Decision ai = rlinucb_step(x);
  PendingHrStep p;
  p.t = steps_ + 1;
  p.context = x;
  p.ai_candidate = ai.ai_candidate;
  p.ai_bounds = ai.ai_bounds;
  p.solver = std::move(ai.solver);
  // UCB - LCB = 2 CI.
  p.consult = 2.0 * p.ai_bounds.ci > config_.hr.consult_threshold;
  return p;
}

Proposal PolicyState::sanitize(const Context& x, Proposal proposal, bool& projected) const {
  projected = false;
  if (proposal.action >= arms_.size()) throw InvalidInput("proposed action out of range");
  if (proposal.recourse.actionable_dim() != actionable_dim_)
    throw InvalidInput("proposed recourse has the wrong number of actionable features");
  if (!proposal.recourse.actionable.allFinite())
    throw InvalidInput("proposed recourse must be finite");
  if (!(proposal.recourse.immutable_dim() == immutable_dim_ &&
        proposal.recourse.immutable == x.immutable)) {
    proposal.recourse.immutable = x.immutable;
    projected = true;
  }
  if (!is_feasible(config_.budget, x.actionable, proposal.recourse.actionable)) {
    proposal.recourse.actionable =
        project_to_budget(config_.budget, x.actionable, proposal.recourse.actionable);
    projected = true;
  }
  return proposal;
}

Decision PolicyState::finish_hr_step(const PendingHrStep& pending,
                                     std::optional<Proposal> proposal) {
  Decision d;
  d.action = pending.ai_candidate.action;
  d.recourse = pending.ai_candidate.recourse;
  d.ai_candidate = pending.ai_candidate;
  d.ai_bounds = pending.ai_bounds;
  d.solver = pending.solver;
  if (!pending.consult) return d;

  d.queried = true;
  ++queries_;
  if (!proposal) {
    d.oracle_failed = true;
    return d;
  }
  try {
    bool projected = false;
    Proposal clean = sanitize(pending.context, std::move(*proposal), projected);
    d.human_projected = projected;
    d.human_bounds = bounds(clean.action, clean.recourse);
    d.human_candidate = std::move(clean);
  } catch (const InvalidInput&) {
    d.oracle_failed = true;
    return d;
  }

  const Bounds& ai = d.ai_bounds;
  const Bounds& human = *d.human_bounds;
  const bool variance_ok = ai.ci < config_.hr.variance_control * human.ci;
  const bool overlap_ok = human.ucb > ai.lcb;
  if (variance_ok && overlap_ok) {
    d.source = DecisionSource::Human;
    d.action = d.human_candidate->action;
    d.recourse = d.human_candidate->recourse;
  }
  return d;
}

Decision PolicyState::hr_bandit_step(const Context& x, HumanOracle& oracle) {
  const PendingHrStep pending = begin_hr_step(x);
  std::optional<Proposal> proposal;
  if (pending.consult) {
    try {
      proposal = oracle.propose(pending.query(config_.budget));
    } catch (const std::exception&) {
      proposal.reset();
    }
  }
  return finish_hr_step(pending, std::move(proposal));
}

Decision PolicyState::step(const Context& x, HumanOracle* oracle) {
  switch (config_.kind) {
    case PolicyKind::LinUCB: return linucb_step(x);
    case PolicyKind::RLinUCB: return rlinucb_step(x);
    case PolicyKind::HRBandit:
      if (oracle == nullptr) throw InvalidInput("HR-Bandit needs a human oracle");
      return hr_bandit_step(x, *oracle);
  }
  throw InvalidInput("unknown policy kind");
}

void PolicyState::observe(const Decision& decision, double reward) {
  if (!std::isfinite(reward)) throw InvalidInput("reward must be finite");
  if (decision.action >= arms_.size()) throw InvalidInput("decision action out of range");
  check_context(decision.recourse);
  arms_[decision.action].update(decision.recourse.full(), reward);
  ++steps_;
}

}  // namespace recourse
