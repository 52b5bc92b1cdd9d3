#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qlp/errors.hpp"
#include "qlp/flow.hpp"
#include "qlp/oracle.hpp"

using namespace qlp;

namespace {

std::shared_ptr<const ConformalProfile> schwarzschild() {
  return ConformalProfile::build(make_reference(ReferenceKind::Schwarzschild, 1.0));
}

}  // namespace

TEST(Flow, GraphSpeedOfRoundSphere) {
  const auto p = schwarzschild();
  const auto grid = std::make_shared<const SphereGrid>(8, 16);
  const auto s = StarSurface::coordinate_sphere(p, grid, 4.0);
  // drho/ds = 1/F^2 at r = 4
  EXPECT_NEAR(graph_speed(s)[0], 1.0 / (1.1715728752538099 * 1.1715728752538099), 1e-9);
  // chain rule: dr/ds = sqrt(phi)
  const auto f = p->factor(s.G()[0]);
  const double dr_drho = f.F * f.F + 2.0 * f.rho * f.F * f.dF;
  EXPECT_NEAR(graph_speed(s)[0] * dr_drho, std::sqrt(0.5), 1e-9);
}

TEST(Flow, RoundRunFollowsRadialOde) {
  const auto ref = make_reference(ReferenceKind::Schwarzschild, 1.0);
  const auto grid = std::make_shared<const SphereGrid>(8, 16);
  FlowConfig cfg;
  cfg.ds = 0.05;
  cfg.s_max = 20.0;
  const auto fol = run_flow(StarSurface::coordinate_sphere(ConformalProfile::build(ref), grid, 4.0), cfg);
  ASSERT_EQ(fol.size(), 401u);
  EXPECT_FALSE(fol.halted());
  const auto orc = oracle::round_flow_u(ref, 4.0, 1.0, fol.s_values());
  double worst = 0.0;
  for (std::size_t k = 0; k < fol.size(); ++k) {
    EXPECT_LT(fol.diagnostics(k).roundness, 1e-12);
    worst = std::max(worst, std::abs(fol.geometry(k, false).r[0] - orc[k].r));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Flow, EvolutionLawsOnPerturbedRun) {
  const auto grid = std::make_shared<const SphereGrid>(16, 32);
  FlowConfig cfg;
  cfg.ds = 0.01;
  cfg.s_max = 0.3;
  const auto fol = run_flow(perturbed_sphere(schwarzschild(), grid, 5.0, {{2, 0, 0.05}, {2, 2, 0.03}}), cfg);
  const auto ev = evolution_diagnostics(fol);
  EXPECT_EQ(ev.slices_checked, fol.size() - 2);
  EXPECT_LT(ev.rho_law, 1e-6);
  EXPECT_LT(ev.flat_mean_curvature_law, 1e-5);
  EXPECT_LT(ev.flat_gauss_curvature_law, 1e-5);
  EXPECT_LT(ev.curved_mean_curvature_law, 1e-5);
  EXPECT_LT(ev.scalar_curvature_reconstruction, 1e-4);
  EXPECT_GT(ev.cos_theta_margin, -1e-6);
  EXPECT_GT(ev.kappa_rho2_margin, -1e-6);
}

TEST(Flow, SliceDiagnosticsAndCsv) {
  const auto grid = std::make_shared<const SphereGrid>(8, 16);
  FlowConfig cfg;
  cfg.ds = 0.1;
  cfg.s_max = 0.5;
  cfg.keep_every = 2;
  const auto fol = run_flow(StarSurface::coordinate_sphere(schwarzschild(), grid, 4.0), cfg);
  EXPECT_EQ(fol.size(), 4u);  // s = 0, 0.2, 0.4, 0.5
  EXPECT_NEAR(fol.s(fol.size() - 1), 0.5, 1e-12);
  EXPECT_EQ(fol.diagnostics(1).condition_flags(), "ok");
  const auto path = std::filesystem::temp_directory_path() / "qlp_flow.csv";
  write_flow_csv(fol, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "s,min_cos_theta,min_kappa_rho2,min_rho,condition_flags");
  std::filesystem::remove(path);
}

TEST(Flow, ThreePointWeights) {
  const auto w = three_point_weights(0.0, 1.0, 3.0);
  // exact for quadratics: f = s^2 -> f'(1) = 2
  EXPECT_NEAR(w.c0 * 0.0 + w.c1 * 1.0 + w.c2 * 9.0, 2.0, 1e-14);
  EXPECT_NEAR(w.c0 + w.c1 + w.c2, 0.0, 1e-14);
}

TEST(Constants, Schwarzschild) {
  const auto c = compute_constants(*schwarzschild(), 0.5);
  // sup of m (1/F + 1/(rho^2 F^3)) over [rho_h, infinity) is m, attained at rho_h and at infinity
  EXPECT_NEAR(c.C3, 1.0, 1e-6);
  EXPECT_GE(c.C4, 1.0 - 1e-12);
  EXPECT_GE(c.C5, 2.0);
  EXPECT_NEAR(c.C1, std::sqrt(3.0) * std::max(c.C4, c.C5), 1e-12);
  EXPECT_NEAR(c.max_angle, 1.0 / std::sqrt(3.0), 1e-9);
  EXPECT_GE(c.C2, c.C1);
  EXPECT_THROW(compute_constants(*schwarzschild(), 0.3), Error);
}

TEST(Constants, FlatIsZero) {
  const auto c = compute_constants(*ConformalProfile::build(make_flat_reference()), 0.1);
  EXPECT_LT(c.C3, 1e-9);
  EXPECT_LT(c.C4, 1e-9);
  EXPECT_LT(c.C5, 1e-9);
  EXPECT_LT(c.C1, 1e-9);
  EXPECT_LT(c.C2, 1e-9);
  EXPECT_TRUE(c.tail_stable);
}
