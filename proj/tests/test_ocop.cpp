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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "recourse/ocop.hpp"

namespace recourse {
namespace {

Vector gaussian(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(d);
  for (Eigen::Index j = 0; j < d; ++j) v(j) = n(rng);
  return v;
}

ArmEstimate fitted_arm(Eigen::Index d, int pulls, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Vector theta = gaussian(d, rng);
  std::normal_distribution<double> noise(0.0, 1.0);
  ArmEstimate est(static_cast<std::size_t>(d));
  for (int t = 0; t < pulls; ++t) {
    const Vector x = gaussian(d, rng);
    est.update(x, theta.dot(x) + noise(rng));
  }
  return est;
}

Context split(const Vector& x, std::size_t d_i) { return Context::from_full(x, d_i); }

TEST(Admm, ZeroRadiusMatchesClosedForm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ArmEstimate est = fitted_arm(5, 30, seed);
    Rng rng = make_rng(seed, 1);
    const Context x = split(gaussian(5, rng), 2);
    const TwoNormBudget budget{1.0};
    const OcopSolution sol = admm_solve(est, 0.0, x, budget);
    const auto cop = solve_cop_two_norm(est.theta_hat().tail(3), x.actionable, budget.gamma);
    EXPECT_LE((sol.recourse.actionable - cop.actionable).norm(), 1e-6) << "seed " << seed;
    EXPECT_NEAR(sol.value, est.theta_hat().dot(x.with_actionable(cop.actionable).full()), 1e-6);
    EXPECT_EQ(sol.recourse.immutable, x.immutable);
  }
}

TEST(Admm, ZeroBudgetReturnsInput) {
  const ArmEstimate est = fitted_arm(4, 20, 3);
  Rng rng = make_rng(3, 1);
  const Context x = split(gaussian(4, rng), 1);
  const OcopSolution sol = admm_solve(est, 2.0, x, TwoNormBudget{0.0});
  EXPECT_LE((sol.recourse.actionable - x.actionable).norm(), 1e-9);
  const OcopSolution bs = exact_boundary_search(est, 2.0, x, TwoNormBudget{0.0});
  EXPECT_EQ(bs.recourse.actionable, x.actionable);
}

TEST(Admm, FeasibleAndCloseToBoundarySearch) {
  int worse = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const ArmEstimate est = fitted_arm(5, 5 + static_cast<int>(seed) * 3, 100 + seed);
    Rng rng = make_rng(seed, 2);
    const Context x = split(gaussian(5, rng), 2);
    const TwoNormBudget budget{1.0};
    const double radius = 4.0;
    const OcopSolution admm = admm_solve(est, radius, x, budget);
    const OcopSolution bs = exact_boundary_search(est, radius, x, budget);
    EXPECT_TRUE(is_feasible(DistanceSpec{budget}, x.actionable, admm.recourse.actionable, 1e-6));
    EXPECT_TRUE(is_feasible(DistanceSpec{budget}, x.actionable, bs.recourse.actionable, 1e-9));
    EXPECT_NEAR(admm.value, ucb_objective(est, radius, admm.recourse), 1e-12);
    EXPECT_GE(admm.value, ucb_objective(est, radius, x) - 1e-12);
    if (admm.value < bs.value - 1e-3 * (1.0 + std::abs(bs.value))) ++worse;
  }
  // The alternating scheme is a local method on a nonconvex problem.
  EXPECT_LE(worse, 4);
}

TEST(BoundarySearch, MatchesDenseGridInTwoDims) {
  constexpr int kGrid = 20000;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ArmEstimate est = fitted_arm(3, 8, 200 + seed);
    Rng rng = make_rng(seed, 3);
    const Context x = split(gaussian(3, rng), 1);
    const TwoNormBudget budget{1.5};
    const double radius = 3.0;
    const OcopSolution bs = exact_boundary_search(est, radius, x, budget);
    double best = -1e300;
    for (int k = 0; k < kGrid; ++k) {
      const double a = 2.0 * M_PI * k / kGrid;
      Vector m = x.actionable;
      m(0) += budget.gamma * std::cos(a);
      m(1) += budget.gamma * std::sin(a);
      best = std::max(best, ucb_objective(est, radius, x.with_actionable(m)));
    }
    EXPECT_GE(bs.value, best - 1e-9);
    EXPECT_LE(bs.value - best, 1e-4 * (1.0 + std::abs(best)));
  }
}

TEST(BoundarySearch, InteriorNeverBeatsBoundary) {
  const ArmEstimate est = fitted_arm(4, 12, 7);
  Rng rng = make_rng(7, 1);
  const Context x = split(gaussian(4, rng), 1);
  const TwoNormBudget budget{1.0};
  const OcopSolution bs = exact_boundary_search(est, 2.5, x, budget);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Vector dir = uniform_unit_vector(3, rng);
    const Vector m = x.actionable + dir * (budget.gamma * std::cbrt(u(rng)));
    EXPECT_LE(ucb_objective(est, 2.5, x.with_actionable(m)), bs.value + 1e-9);
  }
}

TEST(BoxOcop, EnumerationBeatsRandomPoints) {
  const ArmEstimate est = fitted_arm(5, 15, 9);
  Rng rng = make_rng(9, 1);
  const Context x = split(gaussian(5, rng), 1);
  const BoxBudget box{Vector::Constant(4, 0.5)};
  const OcopSolution sol = solve_box_ocop(est, 3.0, x, box);
  EXPECT_EQ(sol.diagnostics.path, SolverPath::BoxEnumeration);
  EXPECT_TRUE(is_feasible(DistanceSpec{box}, x.actionable, sol.recourse.actionable));
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 2000; ++i) {
    Vector m = x.actionable;
    for (Eigen::Index j = 0; j < 4; ++j) m(j) += u(rng);
    EXPECT_LE(ucb_objective(est, 3.0, x.with_actionable(m)), sol.value + 1e-12);
  }
}

TEST(BoxOcop, ZeroRadiiPinCoordinates) {
  const ArmEstimate est = fitted_arm(3, 10, 11);
  const Context x(Vector(0), Vector::Ones(3));
  Vector radii(3);
  radii << 0.0, 1.0, 0.0;
  const OcopSolution sol = solve_box_ocop(est, 1.0, x, BoxBudget{radii});
  EXPECT_EQ(sol.recourse.actionable(0), 1.0);
  EXPECT_EQ(sol.recourse.actionable(2), 1.0);
  EXPECT_NEAR(std::abs(sol.recourse.actionable(1) - 1.0), 1.0, 1e-15);
}

TEST(BoxOcop, CoordinateAscentInHighDimension) {
  constexpr Eigen::Index kDim = kMaxEnumeratedDims + 2;
  const ArmEstimate est = fitted_arm(kDim, 40, 13);
  Rng rng = make_rng(13, 1);
  const Context x(Vector(0), gaussian(kDim, rng));
  const BoxBudget box{Vector::Constant(kDim, 0.25)};
  const OcopSolution sol = solve_box_ocop(est, 2.0, x, box);
  EXPECT_EQ(sol.diagnostics.path, SolverPath::BoxCoordinateAscent);
  EXPECT_TRUE(is_feasible(DistanceSpec{box}, x.actionable, sol.recourse.actionable));
  // No single coordinate flip improves the returned vertex.
  for (Eigen::Index j = 0; j < kDim; ++j) {
    Vector flip = sol.recourse.actionable;
    flip(j) = 2.0 * x.actionable(j) - flip(j);
    EXPECT_LE(ucb_objective(est, 2.0, x.with_actionable(flip)), sol.value + 1e-12);
  }
}

TEST(SelectUcbRecourse, PicksLargestIndexOnTiesLowest) {
  std::vector<ArmEstimate> arms(3, ArmEstimate(2));
  const std::vector<double> radii{1.0, 1.0, 1.0};
  const Context x(Vector(0), Vector::Zero(2));
  const OcopSolution tied = select_ucb_recourse(arms, radii, x, TwoNormBudget{1.0});
  EXPECT_EQ(tied.action, 0u);

  arms[2].update(Vector::Unit(2, 0), 5.0);
  const OcopSolution sol = select_ucb_recourse(arms, radii, x, TwoNormBudget{1.0});
  double best = -1e300;
  ActionIndex arg = 0;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const double v = exact_boundary_search(arms[a], radii[a], x, TwoNormBudget{1.0}).value;
    if (v > best + 1e-9) {
      best = v;
      arg = a;
    }
  }
  EXPECT_EQ(sol.action, arg);
  EXPECT_NEAR(sol.value, best, 1e-4);
}

TEST(Ocop, RejectsBadInput) {
  const ArmEstimate est(3);
  const Context x(Vector::Ones(1), Vector::Ones(2));
  EXPECT_THROW(admm_solve(est, -1.0, x, TwoNormBudget{1.0}), InvalidInput);
  EXPECT_THROW(admm_solve(est, 1.0, Context(Vector(0), Vector::Ones(2)), TwoNormBudget{1.0}),
               InvalidInput);
  EXPECT_THROW(admm_solve(est, 1.0, Context(Vector::Ones(3), Vector(0)), TwoNormBudget{1.0}),
               InvalidInput);
  EXPECT_THROW(admm_solve(est, 1.0, x, TwoNormBudget{-0.5}), InvalidInput);
  AdmmParams bad;
  bad.distance_penalty = 0.0;
  EXPECT_THROW(admm_solve(est, 1.0, x, TwoNormBudget{1.0}, bad), InvalidInput);
  EXPECT_THROW(solve_box_ocop(est, 1.0, x, BoxBudget{Vector::Ones(3)}), InvalidInput);
  std::vector<ArmEstimate> none;
  std::vector<double> radii;
  EXPECT_THROW(select_ucb_recourse(none, radii, x, TwoNormBudget{1.0}), InvalidInput);
}

TEST(Ocop, DistanceViolationHistoryIsRecorded) {
  const ArmEstimate est = fitted_arm(4, 20, 17);
  Rng rng = make_rng(17, 1);
  const Context x = split(gaussian(4, rng), 1);
  const OcopSolution sol = admm_solve(est, 2.0, x, TwoNormBudget{1.0});
  EXPECT_EQ(sol.diagnostics.distance_violation_history.size(),
            static_cast<std::size_t>(sol.diagnostics.iterations));
  EXPECT_TRUE(sol.diagnostics.converged);
  EXPECT_LT(sol.diagnostics.distance_violation, 1e-2);
}

}  // namespace
}  // namespace recourse
