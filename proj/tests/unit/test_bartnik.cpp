#include <gtest/gtest.h>

#include <cmath>

#include "qlp/bartnik.hpp"
#include "qlp/errors.hpp"
#include "qlp/oracle.hpp"

using namespace qlp;

namespace {

struct Setup {
  ReferenceManifold ref;
  std::shared_ptr<const ConformalProfile> profile;
  std::shared_ptr<const SphereGrid> grid;
};

Setup make(ReferenceManifold ref, std::size_t n = 12) {
  auto p = ConformalProfile::build(ref);
  return {std::move(ref), std::move(p), std::make_shared<const SphereGrid>(n, 2 * n)};
}

Foliation short_run(const StarSurface& s, double ds = 0.01, double s_max = 1.0) {
  FlowConfig cfg;
  cfg.ds = ds;
  cfg.s_max = s_max;
  return run_flow(s, cfg);
}

}  // namespace

TEST(InitialU, RatioOfMeanCurvatures) {
  // Schwarzschild M = 1.2 interior in the m = 1 reference at r = 4
  const double H = 0.5 * std::sqrt(1.0 - 2.4 / 4.0);
  const double H0 = 0.5 * std::sqrt(0.5);
  const Field u = initial_u(Field::Constant(4, H), Field::Constant(4, H0));
  EXPECT_NEAR(u[0], 1.11803398874989485, 1e-14);
  EXPECT_THROW(initial_u(Field::Constant(4, 0.0), Field::Constant(4, H0)), Error);
  EXPECT_THROW(initial_u(Field::Constant(4, H), Field::Constant(4, -H0)), Error);
}

TEST(URate, RoundValues) {
  const auto st = make(make_reference(ReferenceKind::Schwarzschild, 1.0), 8);
  const auto g = surface_geometry(StarSurface::coordinate_sphere(st.profile, st.grid, 4.0), false);
  EXPECT_NEAR(reaction_coefficient(g)[0], 0.0625, 1e-12);
  const Field down = u_rate(*st.grid, g, Field::Constant(Eigen::Index(st.grid->size()), 0.2));
  EXPECT_LT((down + 0.09333809511662427).abs().maxCoeff(), 1e-11);
  const Field up = u_rate(*st.grid, g, Field::Constant(Eigen::Index(st.grid->size()), 2.0 / std::sqrt(5.0) - 1.0));
  EXPECT_LT((up - 0.0316227766).abs().maxCoeff(), 1e-10);
  EXPECT_NEAR(oracle::round_u_rate(st.ref, 4.0, 1.2), -0.09333809511662427, 1e-14);
}

TEST(Solver, FixedPointIsExact) {
  const auto st = make(make_reference(ReferenceKind::Schwarzschild, 1.0), 8);
  const auto fol = short_run(perturbed_sphere(st.profile, st.grid, 3.5, {{2, 0, 0.05}}), 0.05, 1.0);
  const auto u = solve_u(fol, Field::Ones(Eigen::Index(st.grid->size())));
  for (const auto& uk : u.u) EXPECT_EQ((uk - 1.0).abs().maxCoeff(), 0.0);
}

TEST(Solver, MatchesRadialOracle) {
  const auto st = make(make_reference(ReferenceKind::Schwarzschild, 1.0));
  const auto fol = short_run(StarSurface::coordinate_sphere(st.profile, st.grid, 4.0));
  const auto u = solve_u(fol, Field::Constant(Eigen::Index(st.grid->size()), 1.2));
  const auto orc = oracle::round_flow_u(st.ref, 4.0, 1.2, fol.s_values());
  double worst = 0.0;
  for (std::size_t k = 0; k < fol.size(); ++k) worst = std::max(worst, (u.u[k] - orc[k].u).abs().maxCoeff());
  EXPECT_LT(worst, 1e-9);
  EXPECT_TRUE(u.bounds_held);
  EXPECT_LT(u.max_u_minus_1.back(), 0.2);
}

TEST(Solver, ChargedReferenceMatchesRadialOracle) {
  const auto st = make(make_reference(ReferenceKind::ReissnerNordstrom, 1.0, 0.5));
  const auto fol = short_run(StarSurface::coordinate_sphere(st.profile, st.grid, 4.0));
  const auto u = solve_u(fol, Field::Constant(Eigen::Index(st.grid->size()), 0.9));
  const auto orc = oracle::round_flow_u(st.ref, 4.0, 0.9, fol.s_values());
  EXPECT_LT((u.u.back() - orc.back().u).abs().maxCoeff(), 1e-9);
}

TEST(Solver, MaximumPrinciple) {
  const auto st = make(make_reference(ReferenceKind::Schwarzschild, 1.0));
  const auto fol = short_run(StarSurface::coordinate_sphere(st.profile, st.grid, 4.0), 0.02, 2.0);
  Field u0(Eigen::Index(st.grid->size()));
  for (std::size_t i = 0; i < st.grid->n_theta(); ++i)
    for (std::size_t j = 0; j < st.grid->n_phi(); ++j)
      u0[Eigen::Index(st.grid->index(i, j))] = 1.0 + 0.1 * peak_harmonic(2, 2, st.grid->theta(i), st.grid->phi(j));
  const auto u = solve_u(fol, u0);
  EXPECT_NEAR(u.lower_bound, u0.minCoeff(), 1e-15);
  EXPECT_NEAR(u.upper_bound, u0.maxCoeff(), 1e-15);
  for (std::size_t k = 0; k < u.u.size(); ++k) {
    EXPECT_GE(u.min_u[k], u.lower_bound - 1e-9);
    EXPECT_LE(u.max_u[k], u.upper_bound + 1e-9);
  }
  EXPECT_LT(u.max_u_minus_1.back(), u.max_u_minus_1.front());
}

TEST(Solver, RejectsNonconvexSlices) {
  const auto st = make(make_reference(ReferenceKind::Schwarzschild, 1.0), 16);
  // strongly oblate: the reaction coefficient turns negative near the poles
  const auto s = perturbed_sphere(st.profile, st.grid, 3.0, {{2, 0, -0.45}});
  FlowConfig cfg;
  cfg.ds = 0.01;
  cfg.s_max = 0.02;
  try {
    const auto fol = run_flow(s, cfg);
    EXPECT_THROW(solve_u(fol, Field::Constant(Eigen::Index(st.grid->size()), 1.1)), Error);
  } catch (const Error&) {
    SUCCEED();  // the flow itself refused the surface
  }
}

TEST(ScalarResidual, RoundRun) {
  const auto st = make(make_reference(ReferenceKind::Schwarzschild, 1.0));
  const auto fol = short_run(StarSurface::coordinate_sphere(st.profile, st.grid, 4.0));
  const auto u = solve_u(fol, Field::Constant(Eigen::Index(st.grid->size()), 1.2));
  const auto res = scalar_residual(fol, u);
  EXPECT_EQ(res.slices.size(), fol.size() - 2);
  EXPECT_LT(res.max(), 1e-5);
}

TEST(ScalarResidual, TargetNeedsTheTTerm) {
  const auto st = make(make_reference(ReferenceKind::ReissnerNordstrom, 1.0, 0.9), 16);
  const auto fol = short_run(perturbed_sphere(st.profile, st.grid, 2.0, {{2, 0, 0.1}}), 0.005, 0.2);
  const auto u = solve_u(fol, Field::Constant(Eigen::Index(st.grid->size()), 1.5));
  const double with_T = scalar_residual(fol, u, true).max();
  const double without_T = scalar_residual(fol, u, false).max();
  EXPECT_LT(with_T, 1e-5);
  EXPECT_GT(without_T, 10.0 * with_T);
}
