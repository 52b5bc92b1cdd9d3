#include <gtest/gtest.h>

#include <cmath>

#include "qlp/errors.hpp"
#include "qlp/oracle.hpp"
#include "qlp/surfgeom.hpp"

using namespace qlp;

TEST(RoundGeometry, Schwarzschild) {
  const auto g = oracle::round_geometry(make_reference(ReferenceKind::Schwarzschild, 1.0), 4.0);
  EXPECT_NEAR(g.H0, 0.35355339059327376, 1e-15);
  EXPECT_NEAR(g.kappa, 0.17677669529663688, 1e-15);
  EXPECT_NEAR(g.detA0, 0.03125, 1e-15);
  EXPECT_NEAR(g.ric_nu, -0.03125, 1e-15);
  EXPECT_NEAR(g.dV_dnu, 0.0625, 1e-15);
  EXPECT_EQ(g.T, 0.0);
  EXPECT_EQ(g.Rbar, 0.0);
}

TEST(RoundGeometry, ReissnerNordstrom) {
  const auto g = oracle::round_geometry(make_reference(ReferenceKind::ReissnerNordstrom, 1.0, 0.5), 4.0);
  EXPECT_NEAR(g.H0, 0.35903516540862679, 1e-15);
  EXPECT_NEAR(g.V, 0.71807033081725358, 1e-15);
  EXPECT_NEAR(g.detA0, 0.0322265625, 1e-15);
  EXPECT_NEAR(g.Rbar, 2.0 * 0.25 / 256.0, 1e-15);
  EXPECT_EQ(g.T, 0.0);  // the radial direction carries no T
}

TEST(RoundGeometry, NearHorizon) {
  const auto ref = make_reference(ReferenceKind::Schwarzschild, 1.0);
  const auto g = oracle::round_geometry(ref, 2.0001);
  EXPECT_GT(g.H0, 0.0);
  EXPECT_NEAR(g.H0, std::sqrt(1.0 - 2.0 / 2.0001) * 2.0 / 2.0001, 1e-15);
  EXPECT_THROW(oracle::round_geometry(ref, 2.0), Error);
  EXPECT_THROW(oracle::round_geometry(ref, 1.5), Error);
}

TEST(RoundGeometry, AgreesWithGridGeometry) {
  for (const auto& ref : {make_reference(ReferenceKind::Schwarzschild, 1.0),
                          make_reference(ReferenceKind::ReissnerNordstrom, 1.0, 0.7)}) {
    const auto grid = std::make_shared<const SphereGrid>(8, 16);
    const auto g = surface_geometry(StarSurface::coordinate_sphere(ConformalProfile::build(ref), grid, 3.0), false);
    const auto o = oracle::round_geometry(ref, 3.0);
    EXPECT_LT((g.H0 - o.H0).abs().maxCoeff(), 1e-10);
    EXPECT_LT((g.detA0 - o.detA0).abs().maxCoeff(), 1e-10);
    EXPECT_LT((g.ric_nu - o.ric_nu).abs().maxCoeff(), 1e-10);
    EXPECT_LT((g.dV_dnu - o.dV_dnu).abs().maxCoeff(), 1e-10);
    EXPECT_LT((g.Rbar - o.Rbar).abs().maxCoeff(), 1e-10);
  }
}

TEST(RoundFlow, FixedPointAndDecay) {
  const auto ref = make_reference(ReferenceKind::Schwarzschild, 1.0);
  const auto one = oracle::round_flow_u(ref, 4.0, 1.0, 5.0, 0.5);
  ASSERT_EQ(one.size(), 11u);
  for (const auto& st : one) {
    EXPECT_EQ(st.u, 1.0);
    EXPECT_EQ(st.E, 0.0);
  }
  const auto run = oracle::round_flow_u(ref, 4.0, 1.2, 5.0, 0.5);
  EXPECT_NEAR(run.front().E, 1.0 / 3.0, 1e-14);
  for (std::size_t k = 1; k < run.size(); ++k) {
    EXPECT_LT(run[k].u, run[k - 1].u);
    EXPECT_LT(run[k].E, run[k - 1].E);
    EXPECT_GT(run[k].r, run[k - 1].r);
  }
}

TEST(ClosedForm, PenroseScenario) {
  const auto c = oracle::scenario_closed_form(1.2, 1.0, 4.0);
  EXPECT_NEAR(c.lhs, 0.21114561800016824, 1e-15);
  EXPECT_NEAR(c.rhs, 0.2, 1e-15);
  EXPECT_NEAR(oracle::scenario_closed_form(1.2, 1.0, 1000.0).lhs, 0.2000200441, 1e-10);
  EXPECT_NEAR(oracle::scenario_closed_form(1.0, 1.0, 4.0).margin(), 0.0, 1e-15);
  EXPECT_THROW(oracle::scenario_closed_form(0.9, 1.0, 4.0), Error);
  EXPECT_THROW(oracle::scenario_closed_form(2.0, 1.0, 4.0), Error);
}

TEST(ClosedForm, SweepNeverViolates) {
  std::vector<double> Ms, ms, r0s;
  for (int k = 0; k <= 20; ++k) Ms.push_back(0.5 + 0.1 * k);
  for (int k = 0; k <= 10; ++k) ms.push_back(0.1 + 0.15 * k);
  for (int k = 0; k <= 20; ++k) r0s.push_back(2.6 * std::pow(100.0, k / 20.0));
  const auto rows = oracle::closed_form_sweep(Ms, ms, r0s);
  EXPECT_GT(rows.size(), 1000u);
  for (const auto& r : rows) {
    EXPECT_LE(r.m, r.M);
    EXPECT_GT(r.r0, 2.0 * r.M);
    EXPECT_GE(r.margin(), -1e-14) << r.M << " " << r.m << " " << r.r0;
  }
}
