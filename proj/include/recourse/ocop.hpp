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

// Optimistic counterfactual optimization: jointly pick a recourse inside the
// distance budget and a parameter inside an arm's confidence ellipsoid so as
// to maximize the predicted reward. For a fixed recourse the inner maximum
// over the ellipsoid is the UCB x^T theta_hat + rho ||x||_{V^{-1}}, which is
// convex in the recourse, so the maximum over the budget lies on its boundary.

#ifndef RECOURSE_OCOP_HPP
#define RECOURSE_OCOP_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "recourse/estimator.hpp"
#include "recourse/model.hpp"

namespace recourse {

/**
 * Augmented-Lagrangian (ADMM) settings.
 *
 * The multipliers follow lambda <- lambda - beta * max(g, 0)^2 for each
 * constraint g <= 0 (recourse distance, ellipsoid membership). Each block
 * maximization is solved exactly: the optimal direction is closed-form and the
 * step length is the root of a monotone cubic, found by Newton's method.
 */
struct AdmmParams {
  double distance_penalty = 1e6;   // beta_gamma
  double ellipsoid_penalty = 1e6;  // beta_rho
  int max_outer_iters = 200;
  int inner_iters = 60;            // Newton iterations per block
  double tolerance = 1e-5;         // on successive iterate change (max-norm)

  void validate() const;
};

enum class SolverPath { Admm, BoundarySearch, BoxEnumeration, BoxCoordinateAscent };

std::string to_string(SolverPath path);

struct OcopDiagnostics {
  SolverPath path = SolverPath::Admm;
  int iterations = 0;
  bool converged = true;
  bool projected = false;  // final iterate was pulled back into the budget
  double distance_violation = 0.0;   // of the raw final iterate
  double ellipsoid_violation = 0.0;  // of the raw final iterate
  std::vector<double> distance_violation_history;
};

struct OcopSolution {
  ActionIndex action = 0;
  Context recourse;
  double value = 0.0;  // ucb_objective at `recourse`
  OcopDiagnostics diagnostics;
};

// max over the ellipsoid {theta: ||theta - theta_hat||_V <= rho} of x^T theta.
double ucb_objective(const ArmEstimate& est, double radius, const Context& x);

// ADMM for a two-norm budget. The returned recourse is always feasible.
OcopSolution admm_solve(const ArmEstimate& est, double radius, const Context& x,
                        const TwoNormBudget& budget, const AdmmParams& params = {});

// Multi-start projected fixed-point ascent on the budget sphere. Used as the
// verification oracle for admm_solve.
OcopSolution exact_boundary_search(const ArmEstimate& est, double radius, const Context& x,
                                   const TwoNormBudget& budget, std::size_t n_starts = 16,
                                   std::uint64_t seed = 0);

// Box budget: vertex enumeration for up to kMaxEnumeratedDims actionable
// features, coordinate-wise ascent above that.
inline constexpr std::size_t kMaxEnumeratedDims = 12;
OcopSolution solve_box_ocop(const ArmEstimate& est, double radius, const Context& x,
                            const BoxBudget& budget);

enum class OcopMethod { Admm, BoundarySearch };

// Per-arm solve, dispatched on the budget kind.
OcopSolution solve_ocop(const ArmEstimate& est, double radius, const Context& x,
                        const DistanceSpec& spec, const AdmmParams& params = {},
                        OcopMethod method = OcopMethod::Admm);

// Solve every arm and keep the highest optimistic value (lowest index on ties).
OcopSolution select_ucb_recourse(std::span<const ArmEstimate> arms,
                                 std::span<const double> radii, const Context& x,
                                 const DistanceSpec& spec, const AdmmParams& params = {},
                                 OcopMethod method = OcopMethod::Admm);

}  // namespace recourse

#endif  // RECOURSE_OCOP_HPP
