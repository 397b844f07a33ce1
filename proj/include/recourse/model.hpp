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

// Ground-truth linear reward model and the counterfactual optimization
// problem: choose the action and the recourse (a move of the actionable
// features inside a distance budget) that maximize the expected reward.

#ifndef RECOURSE_MODEL_HPP
#define RECOURSE_MODEL_HPP

#include <string>
#include <variant>
#include <vector>

#include "recourse/common.hpp"

namespace recourse {

// Euclidean ball of radius `gamma` around the current actionable features.
struct TwoNormBudget {
  double gamma = 1.0;
};

// Per-coordinate budget |x'_j - x_j| <= radii(j).
struct BoxBudget {
  Vector radii;
};

using DistanceSpec = std::variant<TwoNormBudget, BoxBudget>;

void validate(const DistanceSpec& spec, std::size_t actionable_dim);

std::string budget_name(const DistanceSpec& spec);  // "TwoNorm" or "Box"

// Amount by which `moved` exceeds the budget around `origin` (0 when feasible).
// For a box budget this is the largest per-coordinate excess.
double budget_violation(const DistanceSpec& spec, const Vector& origin, const Vector& moved);

// Two-norm distance for TwoNormBudget, max-norm distance for BoxBudget.
double budget_distance(const DistanceSpec& spec, const Vector& origin, const Vector& moved);

// Budget size: gamma for a two-norm budget, max radius for a box.
double budget_limit(const DistanceSpec& spec);

bool is_feasible(const DistanceSpec& spec, const Vector& origin, const Vector& moved,
                 double slack = 1e-9);

// Nearest feasible point (radial projection onto the ball, clamping for a box).
Vector project_to_budget(const DistanceSpec& spec, const Vector& origin, const Vector& moved);

class RewardModel {
 public:
  RewardModel() = default;
  // `theta[a]` is the full parameter (theta_I, theta_M) of action a.
  RewardModel(std::vector<Vector> theta, std::size_t immutable_dim, double noise_sd);

  std::size_t num_actions() const { return theta_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t immutable_dim() const { return immutable_dim_; }
  std::size_t actionable_dim() const { return dim_ - immutable_dim_; }
  double noise_sd() const { return noise_sd_; }

  const Vector& theta(ActionIndex a) const;
  Vector theta_immutable(ActionIndex a) const;
  Vector theta_actionable(ActionIndex a) const;
  const std::vector<Vector>& thetas() const { return theta_; }

  // Largest ||theta_a||, a valid beta_Theta for this model.
  double max_theta_norm() const;

  void check_context(const Context& x) const;

 private:
  std::vector<Vector> theta_;
  std::size_t dim_ = 0;
  std::size_t immutable_dim_ = 0;
  double noise_sd_ = 1.0;
};

double expected_reward(const RewardModel& model, ActionIndex a, const Context& x);

// Expected reward plus N(0, sigma^2) noise.
double sample_reward(const RewardModel& model, ActionIndex a, const Context& x, Rng& rng);

struct CopRecourse {
  Vector actionable;
  // Set when theta_M = 0 and gamma > 0: every feasible point is optimal and
  // the input is returned unchanged.
  bool degenerate_direction = false;
};

// x_M + gamma * theta_M / ||theta_M||.
CopRecourse solve_cop_two_norm(const Vector& theta_actionable, const Vector& x_actionable,
                               double gamma);

// x_M(j) + sign(theta_M(j)) * gamma_j, with sign(0) = 0.
Vector solve_cop_box(const Vector& theta_actionable, const Vector& x_actionable,
                     const Vector& radii);

// Optimal recourse for one action under either budget.
CopRecourse solve_cop_for_action(const Vector& theta_actionable, const Vector& x_actionable,
                                 const DistanceSpec& spec);

struct CopSolution {
  ActionIndex action = 0;
  Context recourse;
  double value = 0.0;
};

// max over actions and feasible recourses of the true expected reward; ties
// go to the lowest action index.
CopSolution solve_cop(const RewardModel& model, const Context& x, const DistanceSpec& spec);

}  // namespace recourse

#endif  // RECOURSE_MODEL_HPP
