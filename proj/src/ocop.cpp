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

#include "recourse/ocop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace recourse {

namespace {

constexpr double kFeasibilitySlack = 1e-6;

Vector full_context(const Vector& immutable, const Vector& actionable) {
  Vector x(immutable.size() + actionable.size());
  x << immutable, actionable;
  return x;
}

void check_arm(const ArmEstimate& est, double radius, const Context& x) {
  if (x.dim() != est.dim()) throw InvalidInput("context dimension does not match the arm");
  if (x.actionable_dim() == 0) throw InvalidInput("context has no actionable features");
  if (!(radius >= 0.0) || !std::isfinite(radius))
    throw InvalidInput("confidence radius must be finite and nonnegative");
}

// Maximizer of the penalized radial problem
//   max_{v >= 0}  slope * v - |lambda| v^2 - (beta / 2) v^4,
// i.e. the root of 2 beta v^3 + 2 |lambda| v = slope.
double penalized_step(double slope, double lambda_abs, double beta, int max_iters) {
  if (slope <= 0.0) return 0.0;
  double v = std::cbrt(slope / (2.0 * beta));
  if (lambda_abs > 0.0) v = std::min(v, slope / (2.0 * lambda_abs));
  // Newton from the right on an increasing convex cubic converges monotonically.
  for (int i = 0; i < max_iters; ++i) {
    const double p = 2.0 * beta * v * v * v + 2.0 * lambda_abs * v - slope;
    const double dp = 6.0 * beta * v * v + 2.0 * lambda_abs;
    if (dp <= 0.0) break;
    const double step = p / dp;
    v -= step;
    if (v < 0.0) v = 0.0;
    if (std::abs(step) <= 1e-15 * std::max(v, 1e-300)) break;
  }
  return v;
}

// Gradient of the UCB objective with respect to the actionable block.
Vector ucb_gradient(const ArmEstimate& est, double radius, const Vector& x_full,
                    Eigen::Index d_i) {
  const Eigen::Index d_m = x_full.size() - d_i;
  Vector grad = est.theta_hat().tail(d_m);
  const double norm = est.inverse_norm(x_full);
  if (radius > 0.0 && norm > 0.0) grad += radius * est.solve(x_full).tail(d_m) / norm;
  return grad;
}

// Fixed-point ascent x_M <- x0 + gamma * grad / ||grad|| from `start`. Each
// step maximizes the linearization of a convex function over the ball, so
// the objective never decreases.
Vector boundary_ascent(const ArmEstimate& est, double radius, const Context& x, double gamma,
                       Vector start) {
  const auto d_i = static_cast<Eigen::Index>(x.immutable_dim());
  Vector current = std::move(start);
  for (int it = 0; it < 5000; ++it) {
    Vector grad = ucb_gradient(est, radius, full_context(x.immutable, current), d_i);
    const double gnorm = grad.norm();
    if (gnorm == 0.0) break;
    Vector next = x.actionable + grad * (gamma / gnorm);
    const double change = (next - current).lpNorm<Eigen::Infinity>();
    current = std::move(next);
    if (change <= 1e-13 * (1.0 + gamma)) break;
  }
  return current;
}

OcopSolution make_solution(const ArmEstimate& est, double radius, const Context& x,
                           Vector actionable, SolverPath path) {
  OcopSolution sol;
  sol.recourse = x.with_actionable(std::move(actionable));
  sol.value = ucb_objective(est, radius, sol.recourse);
  sol.diagnostics.path = path;
  return sol;
}

}  // namespace

void AdmmParams::validate() const {
  if (!(distance_penalty > 0.0) || !(ellipsoid_penalty > 0.0))
    throw InvalidInput("ADMM penalties must be positive");
  if (max_outer_iters < 1 || inner_iters < 1)
    throw InvalidInput("ADMM iteration counts must be at least 1");
  if (!(tolerance > 0.0)) throw InvalidInput("ADMM tolerance must be positive");
}

std::string to_string(SolverPath path) {
  switch (path) {
    case SolverPath::Admm: return "admm";
    case SolverPath::BoundarySearch: return "boundary_search";
    case SolverPath::BoxEnumeration: return "box_enumeration";
    case SolverPath::BoxCoordinateAscent: return "box_coordinate_ascent";
  }
  return "unknown";
}

double ucb_objective(const ArmEstimate& est, double radius, const Context& x) {
  if (x.dim() != est.dim()) throw InvalidInput("context dimension does not match the arm");
  return ucb(est, x.full(), radius);
}

OcopSolution admm_solve(const ArmEstimate& est, double radius, const Context& x,
                        const TwoNormBudget& budget, const AdmmParams& params) {
  check_arm(est, radius, x);
  params.validate();
  validate(DistanceSpec{budget}, x.actionable_dim());
  const DistanceSpec spec{budget};
  const double gamma = budget.gamma;
  const Vector& theta_hat = est.theta_hat();
  const auto d_m = static_cast<Eigen::Index>(x.actionable_dim());

  Vector recourse = x.actionable;  // x_M^(0)
  Vector theta = theta_hat;        // theta^(0)
  double lambda_distance = 0.0;
  double lambda_ellipsoid = 0.0;

  OcopSolution best = make_solution(est, radius, x, x.actionable, SolverPath::Admm);
  OcopDiagnostics diag;
  diag.path = SolverPath::Admm;
  diag.converged = false;
  diag.distance_violation_history.reserve(static_cast<std::size_t>(params.max_outer_iters));

  for (int k = 0; k < params.max_outer_iters; ++k) {
    // Recourse block at theta^(k): direction theta_M, length from the penalty.
    const Vector theta_m = theta.tail(d_m);
    const double slope = theta_m.norm();
    Vector next_recourse;
    if (slope > 0.0) {
      const double excess = penalized_step(slope, std::abs(lambda_distance),
                                           params.distance_penalty, params.inner_iters);
      next_recourse = x.actionable + theta_m * ((gamma + excess) / slope);
    } else {
      next_recourse = project_to_budget(spec, x.actionable, recourse);
    }

    // Parameter block at x^(k): move from theta_hat along V^{-1} x.
    const Vector x_full = full_context(x.immutable, recourse);
    const double width = est.inverse_norm(x_full);
    Vector next_theta = theta_hat;
    if (width > 0.0) {
      const double excess = penalized_step(width, std::abs(lambda_ellipsoid),
                                           params.ellipsoid_penalty, params.inner_iters);
      next_theta += est.solve(x_full) * ((radius + excess) / width);
    }

    const double distance_excess = std::max((next_recourse - x.actionable).norm() - gamma, 0.0);
    const double ellipsoid_excess = std::max(est.design_norm(next_theta - theta_hat) - radius, 0.0);
    lambda_distance -= params.distance_penalty * distance_excess * distance_excess;
    lambda_ellipsoid -= params.ellipsoid_penalty * ellipsoid_excess * ellipsoid_excess;

    const double change = std::max((next_recourse - recourse).lpNorm<Eigen::Infinity>(),
                                   (next_theta - theta).lpNorm<Eigen::Infinity>());
    recourse = std::move(next_recourse);
    theta = std::move(next_theta);

    diag.iterations = k + 1;
    diag.distance_violation = distance_excess;
    diag.ellipsoid_violation = ellipsoid_excess;
    diag.distance_violation_history.push_back(distance_excess);

    OcopSolution candidate = make_solution(
        est, radius, x, project_to_budget(spec, x.actionable, recourse), SolverPath::Admm);
    if (candidate.value > best.value) best = std::move(candidate);

    if (change < params.tolerance) {
      diag.converged = true;
      break;
    }
  }

  diag.projected = diag.distance_violation > kFeasibilitySlack;
  best.diagnostics = std::move(diag);
  return best;
}

OcopSolution exact_boundary_search(const ArmEstimate& est, double radius, const Context& x,
                                   const TwoNormBudget& budget, std::size_t n_starts,
                                   std::uint64_t seed) {
  check_arm(est, radius, x);
  validate(DistanceSpec{budget}, x.actionable_dim());
  const double gamma = budget.gamma;
  const auto d_i = static_cast<Eigen::Index>(x.immutable_dim());
  const auto d_m = static_cast<Eigen::Index>(x.actionable_dim());
  if (gamma == 0.0) return make_solution(est, radius, x, x.actionable, SolverPath::BoundarySearch);

  std::vector<Vector> directions;
  const auto add_direction = [&](const Vector& v) {
    const double n = v.norm();
    if (n > 0.0) {
      directions.push_back(v / n);
      directions.push_back(-v / n);
    }
  };
  add_direction(est.theta_hat().tail(d_m));
  add_direction(x.actionable);
  add_direction(ucb_gradient(est, radius, x.full(), d_i));
  {
    // Principal axes of the actionable block of V^{-1}.
    const Matrix inv = est.design().inverse();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(inv.bottomRightCorner(d_m, d_m));
    for (Eigen::Index j = 0; j < d_m; ++j) add_direction(eig.eigenvectors().col(j));
  }
  Rng rng = make_rng(seed, 0xb0u);
  for (std::size_t s = 0; s < n_starts; ++s)
    directions.push_back(uniform_unit_vector(static_cast<std::size_t>(d_m), rng));

  OcopSolution best;
  bool have = false;
  for (const Vector& u : directions) {
    Vector endpoint = boundary_ascent(est, radius, x, gamma, x.actionable + gamma * u);
    OcopSolution candidate =
        make_solution(est, radius, x, std::move(endpoint), SolverPath::BoundarySearch);
    if (!have || candidate.value > best.value) {
      best = std::move(candidate);
      have = true;
    }
  }
  return best;
}

OcopSolution solve_box_ocop(const ArmEstimate& est, double radius, const Context& x,
                            const BoxBudget& budget) {
  check_arm(est, radius, x);
  validate(DistanceSpec{budget}, x.actionable_dim());
  const std::size_t d_m = x.actionable_dim();
  const Vector lower = x.actionable - budget.radii;
  const Vector upper = x.actionable + budget.radii;

  if (d_m <= kMaxEnumeratedDims) {
    OcopSolution best;
    bool have = false;
    const std::uint64_t count = std::uint64_t{1} << d_m;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      bool duplicate = false;
      Vector vertex(static_cast<Eigen::Index>(d_m));
      for (std::size_t j = 0; j < d_m; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const bool up = (mask >> j) & 1u;
        if (up && budget.radii(jj) == 0.0) duplicate = true;
        vertex(jj) = up ? upper(jj) : lower(jj);
      }
      if (duplicate) continue;
      OcopSolution candidate =
          make_solution(est, radius, x, std::move(vertex), SolverPath::BoxEnumeration);
      if (!have || candidate.value > best.value) {
        best = std::move(candidate);
        have = true;
      }
    }
    return best;
  }

  // Objective is convex in each coordinate, so each coordinate optimum sits at
  // an endpoint; sweep until no coordinate flips.
  Vector current = solve_cop_box(est.theta_hat().tail(static_cast<Eigen::Index>(d_m)),
                                 x.actionable, budget.radii);
  double value = ucb_objective(est, radius, x.with_actionable(current));
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool improved = false;
    for (std::size_t j = 0; j < d_m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      Vector trial = current;
      trial(jj) = current(jj) == upper(jj) ? lower(jj) : upper(jj);
      const double trial_value = ucb_objective(est, radius, x.with_actionable(trial));
      if (trial_value > value) {
        current = std::move(trial);
        value = trial_value;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return make_solution(est, radius, x, std::move(current), SolverPath::BoxCoordinateAscent);
}

OcopSolution solve_ocop(const ArmEstimate& est, double radius, const Context& x,
                        const DistanceSpec& spec, const AdmmParams& params, OcopMethod method) {
  if (const auto* box = std::get_if<BoxBudget>(&spec)) return solve_box_ocop(est, radius, x, *box);
  const auto& ball = std::get<TwoNormBudget>(spec);
  if (method == OcopMethod::BoundarySearch) return exact_boundary_search(est, radius, x, ball);
  return admm_solve(est, radius, x, ball, params);
}

OcopSolution select_ucb_recourse(std::span<const ArmEstimate> arms,
                                 std::span<const double> radii, const Context& x,
                                 const DistanceSpec& spec, const AdmmParams& params,
                                 OcopMethod method) {
  if (arms.empty()) throw InvalidInput("at least one arm is required");
  if (arms.size() != radii.size()) throw InvalidInput("one radius per arm is required");
  OcopSolution best;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    OcopSolution sol = solve_ocop(arms[a], radii[a], x, spec, params, method);
    sol.action = a;
    if (a == 0 || sol.value > best.value) best = std::move(sol);
  }
  return best;
}

}  // namespace recourse
