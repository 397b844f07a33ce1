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

#include "recourse/estimator.hpp"

#include <cmath>

namespace recourse {

ArmEstimate::ArmEstimate(std::size_t dim) {
  if (dim == 0) throw InvalidInput("arm dimension must be at least 1");
  const auto d = static_cast<Eigen::Index>(dim);
  design_ = Matrix::Identity(d, d);
  b_ = Vector::Zero(d);
  theta_ = Vector::Zero(d);
  factor_.compute(design_);
}

void ArmEstimate::update(const Vector& x, double y) {
  if (x.size() != b_.size()) throw InvalidInput("update: context dimension mismatch");
  if (!x.allFinite() || !std::isfinite(y)) throw InvalidInput("update: non-finite observation");
  design_.noalias() += x * x.transpose();
  b_ += y * x;
  ++pulls_;
  if (++since_refresh_ >= kRefreshInterval) {
    refresh();
  } else {
    factor_.rankUpdate(x, 1.0);
    if (factor_.info() != Eigen::Success) refresh();
  }
  theta_ = factor_.solve(b_);
}

void ArmEstimate::refresh() {
  factor_.compute(design_);
  since_refresh_ = 0;
}

double ArmEstimate::inverse_norm(const Vector& x) const {
  if (x.size() != b_.size()) throw InvalidInput("inverse_norm: dimension mismatch");
  const Vector z = factor_.matrixL().solve(x);
  return z.norm();
}

Vector ArmEstimate::solve(const Vector& x) const {
  if (x.size() != b_.size()) throw InvalidInput("solve: dimension mismatch");
  return factor_.solve(x);
}

double ArmEstimate::design_norm(const Vector& v) const {
  if (v.size() != b_.size()) throw InvalidInput("design_norm: dimension mismatch");
  return std::sqrt(std::max(v.dot(design_ * v), 0.0));
}

void ConfidenceParams::validate() const {
  if (!(theta_bound > 0.0) || !(context_bound > 0.0))
    throw InvalidInput("norm bounds beta_Theta and beta_X must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0, 1)");
  if (num_actions == 0) throw InvalidInput("number of actions must be at least 1");
}

double confidence_radius(const ArmEstimate& est, const ConfidenceParams& params) {
  const double d = static_cast<double>(est.dim());
  const double n = static_cast<double>(est.pulls());
  const double k = static_cast<double>(params.num_actions);
  return params.theta_bound +
         std::sqrt(2.0 * std::log(k / params.delta) +
                   d * std::log1p(n * params.context_bound / d));
}

Bounds confidence_bounds(const ArmEstimate& est, const Vector& x, double radius) {
  const double mean = x.dot(est.theta_hat());
  const double width = radius * est.inverse_norm(x);
  return Bounds{mean + width, mean - width, width};
}

double ucb(const ArmEstimate& est, const Vector& x, double radius) {
  return confidence_bounds(est, x, radius).ucb;
}

double lcb(const ArmEstimate& est, const Vector& x, double radius) {
  return confidence_bounds(est, x, radius).lcb;
}

double ci(const ArmEstimate& est, const Vector& x, double radius) {
  return confidence_bounds(est, x, radius).ci;
}

}  // namespace recourse
