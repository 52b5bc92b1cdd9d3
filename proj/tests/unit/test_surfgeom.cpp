#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "qlp/errors.hpp"
#include "qlp/surfgeom.hpp"

using namespace qlp;

class RoundSchwarzschild : public ::testing::Test {
 protected:
  std::shared_ptr<const ConformalProfile> profile = ConformalProfile::build(make_reference(ReferenceKind::Schwarzschild, 1.0));
  std::shared_ptr<const SphereGrid> grid = std::make_shared<const SphereGrid>(12, 24);
};

TEST_F(RoundSchwarzschild, CurvedRouteMatchesClosedForms) {
  const auto s = StarSurface::coordinate_sphere(profile, grid, 4.0);
  const auto g = surface_geometry(s);
  EXPECT_LT((g.kappa1 - 0.17677669529663688).abs().maxCoeff(), 1e-10);
  EXPECT_LT((g.kappa2 - 0.17677669529663688).abs().maxCoeff(), 1e-10);
  EXPECT_LT((g.H0 - 0.35355339059327376).abs().maxCoeff(), 1e-10);
  EXPECT_LT((g.detA0 - 0.03125).abs().maxCoeff(), 1e-10);
  EXPECT_LT((g.ric_nu + 0.03125).abs().maxCoeff(), 1e-10);
  EXPECT_LT((g.V - std::sqrt(0.5)).abs().maxCoeff(), 1e-10);
  EXPECT_LT((g.dV_dnu - 0.0625).abs().maxCoeff(), 1e-10);
  EXPECT_LT((g.K - 1.0 / 16.0).abs().maxCoeff(), 1e-10);
  EXPECT_LT(g.T.abs().maxCoeff(), 1e-15);
  EXPECT_LT((g.r - 4.0).abs().maxCoeff(), 1e-10);
  EXPECT_NEAR(g.total_area(), 64.0 * std::numbers::pi, 1e-9);
  EXPECT_LT((g.cos_theta - 1.0).abs().maxCoeff(), 1e-14);
  EXPECT_EQ(g.nonconvex_points, 0u);
}

TEST_F(RoundSchwarzschild, FlatRoute) {
  const double rho = profile->rho_of_r(4.0);
  const auto g = flat_geometry(StarSurface::round(profile, grid, rho));
  EXPECT_LT((g.H_flat - 2.0 / rho).abs().maxCoeff(), 1e-12);
  EXPECT_LT((g.kappa1_flat - 1.0 / rho).abs().maxCoeff(), 1e-12);
  EXPECT_LT((g.support - rho).abs().maxCoeff(), 1e-12);
  EXPECT_FALSE(g.has_curved());
}

TEST_F(RoundSchwarzschild, GaussEquationOnPerturbedSurface) {
  const auto s = perturbed_sphere(profile, grid, 3.0, {{2, 0, 0.08}, {3, 2, 0.02}});
  const auto g = surface_geometry(s);
  ASSERT_TRUE(g.has_gauss_curvature());
  EXPECT_LT(g.gauss_residual.abs().maxCoeff(), 1e-10);
  // Gauss-Bonnet.
  EXPECT_NEAR(g.integrate(g.K), 4.0 * std::numbers::pi, 1e-8);
}

TEST_F(RoundSchwarzschild, LaplaceBeltramiOfRoundSphere) {
  const auto s = StarSurface::coordinate_sphere(profile, grid, 4.0);
  const auto g = surface_geometry(s, false);
  const Field y10 = grid->theta_field().cos();
  // Delta Y_1 = -2 / r^2 Y_1
  EXPECT_LT((laplace_beltrami(*grid, g, y10) + 2.0 / 16.0 * y10).abs().maxCoeff(), 1e-12);
}

TEST_F(RoundSchwarzschild, Conditions) {
  const auto s = StarSurface::coordinate_sphere(profile, grid, 4.0);
  const auto rep = condition_report(s, surface_geometry(s));
  EXPECT_TRUE(rep.all_pass());
  EXPECT_TRUE(rep.foliation_conditions());
  EXPECT_NEAR(rep.at("detA0_plus_T_half_minus_ric").min_value, 0.0625, 1e-10);
  EXPECT_NEAR(rep.at("cos_theta_minus_angle_threshold").min_value, 1.0 - 1.0 / std::sqrt(3.0), 1e-6);
  EXPECT_THROW(rep.at("no_such_monitor"), Error);
}

TEST_F(RoundSchwarzschild, StarShapeValidation) {
  EXPECT_THROW(StarSurface::round(profile, grid, 0.4), Error);
  EXPECT_THROW(StarSurface(profile, grid, Field::Ones(3)), Error);
}

TEST(Harmonics, UnitPeak) {
  double peak = 0.0;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j < 40; ++j)
      peak = std::max(peak, std::abs(peak_harmonic(3, 2, std::numbers::pi * i / 400.0, 2.0 * std::numbers::pi * j / 40.0)));
  EXPECT_NEAR(peak, 1.0, 1e-3);
  EXPECT_NEAR(peak_harmonic(2, 0, 0.0, 0.0), 1.0, 1e-15);
}

TEST(AngleThreshold, Maximum) {
  const auto s = ConformalProfile::build(make_reference(ReferenceKind::Schwarzschild, 1.0));
  EXPECT_NEAR(max_angle_threshold(*s, 1.0).value, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_TRUE(std::isnan(max_angle_threshold(*s, 1.0).variant));
  const auto rn = ConformalProfile::build(make_reference(ReferenceKind::ReissnerNordstrom, 1.0, 0.5));
  const auto t = max_angle_threshold(*rn, 2.0);
  EXPECT_GT(t.value, 0.5);
  EXPECT_LT(t.value, 1.0);
  EXPECT_TRUE(std::isfinite(t.variant));
}

TEST(SurfaceCsv, RoundTrip) {
  const auto profile = ConformalProfile::build(make_reference(ReferenceKind::Schwarzschild, 1.0));
  const auto grid = std::make_shared<const SphereGrid>(8, 16);
  const auto s = perturbed_sphere(profile, grid, 3.0, {{2, 1, 0.05}});
  const auto path = std::filesystem::temp_directory_path() / "qlp_surface.csv";
  write_surface_csv(s, path);
  const auto back = read_surface_csv(path, profile);
  EXPECT_EQ(back.grid().n_theta(), 8u);
  EXPECT_EQ(back.grid().n_phi(), 16u);
  EXPECT_LT((back.G() - s.G()).abs().maxCoeff(), 1e-15);
  std::filesystem::remove(path);
}
