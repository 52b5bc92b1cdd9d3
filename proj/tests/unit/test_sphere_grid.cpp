#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qlp/sphere_grid.hpp"

using namespace qlp;

namespace {

Field sample(const SphereGrid& g, double (*f)(double, double)) {
  Field out(Eigen::Index(g.size()));
  for (std::size_t i = 0; i < g.n_theta(); ++i)
    for (std::size_t j = 0; j < g.n_phi(); ++j) out[Eigen::Index(g.index(i, j))] = f(g.theta(i), g.phi(j));
  return out;
}

double y21(double t, double p) { return std::sin(t) * std::cos(t) * std::cos(p); }

}  // namespace

TEST(SphereGrid, Shape) {
  const SphereGrid g(16, 32);
  EXPECT_EQ(g.size(), 512u);
  EXPECT_EQ(g.max_degree(), 15);
  EXPECT_EQ(g.max_order(), 15);
  EXPECT_EQ(SphereGrid(16, 16).max_order(), 7);
  for (std::size_t i = 1; i < g.n_theta(); ++i) EXPECT_LT(g.theta(i - 1), g.theta(i));
  EXPECT_GT(g.min_spacing(), 0.0);
  EXPECT_THROW(SphereGrid(1, 4), std::exception);
}

TEST(SphereGrid, Quadrature) {
  const SphereGrid g(12, 24);
  const double four_pi = 4.0 * std::numbers::pi;
  EXPECT_NEAR(g.integrate(Field::Ones(Eigen::Index(g.size()))), four_pi, 1e-13);
  EXPECT_NEAR(g.integrate(g.theta_field().cos().square()), four_pi / 3.0, 1e-13);
  EXPECT_NEAR(g.integrate(sample(g, y21)), 0.0, 1e-14);
}

TEST(SphereGrid, SpectralDerivatives) {
  const SphereGrid g(16, 32);
  const Field f = sample(g, y21);
  const Partials d = g.derivatives(f, 3);
  double e1 = 0, e2 = 0, e3 = 0, e4 = 0;
  for (std::size_t i = 0; i < g.n_theta(); ++i)
    for (std::size_t j = 0; j < g.n_phi(); ++j) {
      const auto k = Eigen::Index(g.index(i, j));
      const double t = g.theta(i), p = g.phi(j);
      e1 = std::max(e1, std::abs(d(1, 0)[k] - std::cos(2 * t) * std::cos(p)));
      e2 = std::max(e2, std::abs(d(0, 1)[k] + 0.5 * std::sin(2 * t) * std::sin(p)));
      e3 = std::max(e3, std::abs(d(2, 0)[k] + 2.0 * std::sin(2 * t) * std::cos(p)));
      e4 = std::max(e4, std::abs(d(1, 2)[k] + std::cos(2 * t) * std::cos(p)));
    }
  EXPECT_LT(e1, 1e-12);
  EXPECT_LT(e2, 1e-12);
  EXPECT_LT(e3, 1e-11);
  EXPECT_LT(e4, 1e-11);
}

TEST(SphereGrid, ProjectionKeepsBandlimited) {
  const SphereGrid g(10, 20);
  const Field f = sample(g, y21) + 0.3;
  EXPECT_LT((g.project(f) - f).abs().maxCoeff(), 1e-13);
  EXPECT_LT(g.project(Field::Zero(Eigen::Index(g.size()))).abs().maxCoeff(), 1e-300);
}

TEST(Legendre, Normalization) {
  // int Pbar^2 dx = 1 by Gauss-Legendre with enough nodes.
  const SphereGrid g(20, 8);
  for (int m : {0, 2, 5}) {
    std::vector<double> acc(8, 0.0);
    for (std::size_t i = 0; i < g.n_theta(); ++i) {
      const auto col = normalized_legendre(m + 7, m, g.theta(i));
      for (std::size_t l = 0; l < 8; ++l) acc[l] += g.weight(i) * col.p[l] * col.p[l];
    }
    for (double a : acc) EXPECT_NEAR(a, 1.0, 1e-12);
  }
}
