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

#include "recourse/model.hpp"

#include <algorithm>
#include <cmath>

namespace recourse {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_same_length(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidInput(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                       " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

void validate(const DistanceSpec& spec, std::size_t actionable_dim) {
  std::visit(Overloaded{
                 [](const TwoNormBudget& b) {
                   if (!(b.gamma >= 0.0) || !std::isfinite(b.gamma))
                     throw InvalidInput("two-norm budget must be a finite nonnegative radius");
                 },
                 [actionable_dim](const BoxBudget& b) {
                   if (static_cast<std::size_t>(b.radii.size()) != actionable_dim)
                     throw InvalidInput("box budget needs one radius per actionable feature");
                   if (!b.radii.allFinite() || (b.radii.array() < 0.0).any())
                     throw InvalidInput("box radii must be finite and nonnegative");
                 }},
             spec);
}

std::string budget_name(const DistanceSpec& spec) {
  return std::holds_alternative<TwoNormBudget>(spec) ? "TwoNorm" : "Box";
}

double budget_distance(const DistanceSpec& spec, const Vector& origin, const Vector& moved) {
  check_same_length(origin, moved, "budget_distance");
  if (std::holds_alternative<TwoNormBudget>(spec)) return (moved - origin).norm();
  if (origin.size() == 0) return 0.0;
  return (moved - origin).cwiseAbs().maxCoeff();
}

double budget_limit(const DistanceSpec& spec) {
  return std::visit(Overloaded{[](const TwoNormBudget& b) { return b.gamma; },
                               [](const BoxBudget& b) {
                                 return b.radii.size() == 0 ? 0.0 : b.radii.maxCoeff();
                               }},
                    spec);
}

double budget_violation(const DistanceSpec& spec, const Vector& origin, const Vector& moved) {
  check_same_length(origin, moved, "budget_violation");
  return std::visit(
      Overloaded{[&](const TwoNormBudget& b) {
                   return std::max((moved - origin).norm() - b.gamma, 0.0);
                 },
                 [&](const BoxBudget& b) {
                   check_same_length(origin, b.radii, "box budget");
                   double worst = 0.0;
                   for (Eigen::Index j = 0; j < origin.size(); ++j)
                     worst = std::max(worst, std::abs(moved(j) - origin(j)) - b.radii(j));
                   return worst;
                 }},
      spec);
}

bool is_feasible(const DistanceSpec& spec, const Vector& origin, const Vector& moved,
                 double slack) {
  return budget_violation(spec, origin, moved) <= slack;
}

Vector project_to_budget(const DistanceSpec& spec, const Vector& origin, const Vector& moved) {
  check_same_length(origin, moved, "project_to_budget");
  return std::visit(Overloaded{[&](const TwoNormBudget& b) -> Vector {
                                 const Vector step = moved - origin;
                                 const double norm = step.norm();
                                 if (norm <= b.gamma) return moved;
                                 return origin + step * (b.gamma / norm);
                               },
                               [&](const BoxBudget& b) -> Vector {
                                 check_same_length(origin, b.radii, "box budget");
                                 return moved.cwiseMax(origin - b.radii).cwiseMin(origin + b.radii);
                               }},
                    spec);
}

RewardModel::RewardModel(std::vector<Vector> theta, std::size_t immutable_dim, double noise_sd)
    : theta_(std::move(theta)), immutable_dim_(immutable_dim), noise_sd_(noise_sd) {
  if (theta_.empty()) throw InvalidInput("reward model needs at least one action");
  dim_ = static_cast<std::size_t>(theta_.front().size());
  if (dim_ <= immutable_dim_) throw InvalidInput("reward model needs at least one actionable feature");
  for (const auto& t : theta_) {
    if (static_cast<std::size_t>(t.size()) != dim_)
      throw InvalidInput("all action parameters must share one dimension");
    if (!t.allFinite()) throw InvalidInput("action parameters must be finite");
  }
  if (!(noise_sd_ >= 0.0) || !std::isfinite(noise_sd_))
    throw InvalidInput("noise standard deviation must be finite and nonnegative");
}

const Vector& RewardModel::theta(ActionIndex a) const {
  if (a >= theta_.size()) throw InvalidInput("action index out of range");
  return theta_[a];
}

Vector RewardModel::theta_immutable(ActionIndex a) const {
  return theta(a).head(static_cast<Eigen::Index>(immutable_dim_));
}

Vector RewardModel::theta_actionable(ActionIndex a) const {
  return theta(a).tail(static_cast<Eigen::Index>(actionable_dim()));
}

double RewardModel::max_theta_norm() const {
  double best = 0.0;
  for (const auto& t : theta_) best = std::max(best, t.norm());
  return best;
}

void RewardModel::check_context(const Context& x) const {
  if (x.immutable_dim() != immutable_dim_ || x.actionable_dim() != actionable_dim()) {
    throw InvalidInput("context split (" + std::to_string(x.immutable_dim()) + ", " +
                       std::to_string(x.actionable_dim()) + ") does not match model (" +
                       std::to_string(immutable_dim_) + ", " +
                       std::to_string(actionable_dim()) + ")");
  }
}

double expected_reward(const RewardModel& model, ActionIndex a, const Context& x) {
  model.check_context(x);
  const Vector& t = model.theta(a);
  const auto d_i = static_cast<Eigen::Index>(model.immutable_dim());
  return x.immutable.dot(t.head(d_i)) + x.actionable.dot(t.tail(t.size() - d_i));
}

double sample_reward(const RewardModel& model, ActionIndex a, const Context& x, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  const double mean = expected_reward(model, a, x);
  // Always consume one draw so the stream does not depend on sigma.
  const double z = noise(rng);
  return mean + model.noise_sd() * z;
}

CopRecourse solve_cop_two_norm(const Vector& theta_actionable, const Vector& x_actionable,
                               double gamma) {
  check_same_length(theta_actionable, x_actionable, "solve_cop_two_norm");
  if (!(gamma >= 0.0)) throw InvalidInput("gamma must be nonnegative");
  const double norm = theta_actionable.norm();
  if (gamma == 0.0) return {x_actionable, false};
  if (norm == 0.0) return {x_actionable, true};
  return {x_actionable + theta_actionable * (gamma / norm), false};
}

Vector solve_cop_box(const Vector& theta_actionable, const Vector& x_actionable,
                     const Vector& radii) {
  check_same_length(theta_actionable, x_actionable, "solve_cop_box");
  check_same_length(radii, x_actionable, "solve_cop_box radii");
  if ((radii.array() < 0.0).any()) throw InvalidInput("box radii must be nonnegative");
  Vector out = x_actionable;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (theta_actionable(j) > 0.0) out(j) += radii(j);
    else if (theta_actionable(j) < 0.0) out(j) -= radii(j);
  }
  return out;
}

CopRecourse solve_cop_for_action(const Vector& theta_actionable, const Vector& x_actionable,
                                 const DistanceSpec& spec) {
  return std::visit(
      Overloaded{[&](const TwoNormBudget& b) {
                   return solve_cop_two_norm(theta_actionable, x_actionable, b.gamma);
                 },
                 [&](const BoxBudget& b) {
                   return CopRecourse{solve_cop_box(theta_actionable, x_actionable, b.radii),
                                      false};
                 }},
      spec);
}

CopSolution solve_cop(const RewardModel& model, const Context& x, const DistanceSpec& spec) {
  model.check_context(x);
  validate(spec, model.actionable_dim());
  CopSolution best;
  bool have = false;
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    const CopRecourse r = solve_cop_for_action(model.theta_actionable(a), x.actionable, spec);
    Context candidate = x.with_actionable(r.actionable);
    const double value = expected_reward(model, a, candidate);
    if (!have || value > best.value) {
      best = CopSolution{a, std::move(candidate), value};
      have = true;
    }
  }
  return best;
}

}  // namespace recourse
