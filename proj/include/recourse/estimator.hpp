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

#ifndef RECOURSE_ESTIMATOR_HPP
#define RECOURSE_ESTIMATOR_HPP

#include "recourse/common.hpp"

namespace recourse {

/**
 * Ridge estimate of one arm's parameter.
 *
 * Keeps V = I + sum x x^T, b = sum y x and a Cholesky factor of V that is
 * rank-one updated on every observation and rebuilt from V every
 * kRefreshInterval updates.
 */
class ArmEstimate {
 public:
  static constexpr std::size_t kRefreshInterval = 64;

  explicit ArmEstimate(std::size_t dim);

  void update(const Vector& x, double y);

  std::size_t dim() const { return static_cast<std::size_t>(b_.size()); }
  std::size_t pulls() const { return pulls_; }
  const Matrix& design() const { return design_; }
  const Vector& response() const { return b_; }
  const Vector& theta_hat() const { return theta_; }

  // ||x||_{V^{-1}}
  double inverse_norm(const Vector& x) const;
  // V^{-1} x
  Vector solve(const Vector& x) const;
  // ||v||_V
  double design_norm(const Vector& v) const;

 private:
  void refresh();

  Matrix design_;
  Vector b_;
  Vector theta_;
  Eigen::LLT<Matrix> factor_;
  std::size_t pulls_ = 0;
  std::size_t since_refresh_ = 0;
};

struct ConfidenceParams {
  double theta_bound = 1.0;          // beta_Theta
  double context_bound = 1.0;        // beta_X
  double context_lower_bound = 0.0;  // recorded only; no formula uses it
  double delta = 0.05;
  std::size_t num_actions = 1;

  void validate() const;
};

// rho = beta_Theta + sqrt(2 log(K / delta) + d log(1 + n beta_X / d)).
double confidence_radius(const ArmEstimate& est, const ConfidenceParams& params);

struct Bounds {
  double ucb = 0.0;
  double lcb = 0.0;
  double ci = 0.0;
};

Bounds confidence_bounds(const ArmEstimate& est, const Vector& x, double radius);
double ucb(const ArmEstimate& est, const Vector& x, double radius);
double lcb(const ArmEstimate& est, const Vector& x, double radius);
double ci(const ArmEstimate& est, const Vector& x, double radius);

}  // namespace recourse

#endif  // RECOURSE_ESTIMATOR_HPP
