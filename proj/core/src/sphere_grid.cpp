#include "qlp/sphere_grid.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qlp/errors.hpp"

namespace qlp {

LegendreColumn normalized_legendre(int l_max, int m, double theta) {
  LegendreColumn col;
  if (m > l_max) return col;
  const std::size_t n = std::size_t(l_max - m + 1);
  col.p.assign(n, 0.0);
  col.dp.assign(n, 0.0);
  col.d2p.assign(n, 0.0);
  col.d3p.assign(n, 0.0);

  const double x = std::cos(theta), s = std::sin(theta);
  double pmm = std::sqrt(0.5);
  for (int k = 1; k <= m; ++k) pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;

  // p[l - m] for l = m, m + 1, ...
  col.p[0] = pmm;
  if (n > 1) col.p[1] = std::sqrt(2.0 * m + 3.0) * x * pmm;
  for (int l = m + 2; l <= l_max; ++l) {
    const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
    const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) / (4.0 * (l - 1) * (l - 1) - 1.0));
    col.p[l - m] = a * (x * col.p[l - m - 1] - b * col.p[l - m - 2]);
  }

  const double cot = x / s, m2 = double(m) * m;
  for (int l = m; l <= l_max; ++l) {
    const std::size_t k = std::size_t(l - m);
    const double prev = l > m ? col.p[k - 1] : 0.0;
    const double c = std::sqrt((2.0 * l + 1.0) * (double(l) * l - m2) / (2.0 * l - 1.0));
    const double P = col.p[k];
    const double dP = (l * x * P - c * prev) / s;
    const double q = double(l) * (l + 1) - m2 / (s * s);
    // Legendre equation in theta, and its derivative
    const double d2P = -cot * dP - q * P;
    const double d3P = dP / (s * s) - cot * d2P - (2.0 * m2 * x / (s * s * s)) * P - q * dP;
    col.dp[k] = dP;
    col.d2p[k] = d2P;
    col.d3p[k] = d3P;
  }
  return col;
}

SphereGrid::SphereGrid(std::size_t n_theta, std::size_t n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 2 || n_phi < 3) throw Error(ErrorKind::InvalidArgument, "sphere grid needs n_theta >= 2, n_phi >= 3");
  max_order_ = std::min(int(n_theta) - 1, int((n_phi - 1) / 2));

  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n_theta);
  if (!table) throw Error(ErrorKind::InvalidArgument, "cannot allocate Gauss-Legendre table");
  std::vector<std::pair<double, double>> nodes(n_theta);
  for (std::size_t i = 0; i < n_theta; ++i) gsl_integration_glfixed_point(-1.0, 1.0, i, &nodes[i].first, &nodes[i].second, table);
  gsl_integration_glfixed_table_free(table);
  std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  for (const auto& [x, w] : nodes) {
    x_.push_back(x);
    w_.push_back(w);
    theta_.push_back(std::acos(x));
    sin_.push_back(std::sqrt((1.0 - x) * (1.0 + x)));
  }
  for (std::size_t j = 0; j < n_phi; ++j) phi_.push_back(2.0 * std::numbers::pi * double(j) / double(n_phi));

  const int M = max_order_;
  cos_table_.resize(M + 1, n_phi);
  sin_table_.resize(M + 1, n_phi);
  for (int m = 0; m <= M; ++m)
    for (std::size_t j = 0; j < n_phi; ++j) {
      cos_table_(m, j) = std::cos(m * phi_[j]);
      sin_table_(m, j) = std::sin(m * phi_[j]);
    }
  cos_synth_ = cos_table_;
  sin_synth_ = sin_table_;
  cos_synth_.bottomRows(M).array() *= 2.0;
  sin_synth_.bottomRows(M).array() *= 2.0;

  const int L = max_degree();
  theta_ops_.resize(std::size_t(M + 1));
  for (int m = 0; m <= M; ++m) {
    const std::size_t nl = std::size_t(L - m + 1);
    std::array<Eigen::MatrixXd, 4> basis;
    for (auto& b : basis) b.resize(n_theta, nl);
    for (std::size_t i = 0; i < n_theta; ++i) {
      const auto col = normalized_legendre(L, m, theta_[i]);
      for (std::size_t k = 0; k < nl; ++k) {
        basis[0](i, k) = col.p[k];
        basis[1](i, k) = col.dp[k];
        basis[2](i, k) = col.d2p[k];
        basis[3](i, k) = col.d3p[k];
      }
    }
    Eigen::MatrixXd analysis = basis[0].transpose();
    for (std::size_t i = 0; i < n_theta; ++i) analysis.col(i) *= w_[i];
    for (int a = 0; a < 4; ++a) theta_ops_[m][a] = basis[a] * analysis;
  }
}

Field SphereGrid::theta_field() const {
  Field f(size());
  for (std::size_t i = 0; i < n_theta_; ++i) f.segment(i * n_phi_, n_phi_).setConstant(theta_[i]);
  return f;
}

Field SphereGrid::phi_field() const {
  Field f(size());
  for (std::size_t i = 0; i < n_theta_; ++i)
    for (std::size_t j = 0; j < n_phi_; ++j) f[index(i, j)] = phi_[j];
  return f;
}

double SphereGrid::integrate(const Field& f) const {
  double total = 0.0;
  for (std::size_t i = 0; i < n_theta_; ++i) total += w_[i] * f.segment(i * n_phi_, n_phi_).sum();
  return total * 2.0 * std::numbers::pi / double(n_phi_);
}

double SphereGrid::min_spacing() const {
  double dtheta = theta_[0];
  for (std::size_t i = 1; i < n_theta_; ++i) dtheta = std::min(dtheta, theta_[i] - theta_[i - 1]);
  const double smin = *std::min_element(sin_.begin(), sin_.end());
  return std::min(dtheta, smin * 2.0 * std::numbers::pi / double(n_phi_));
}

SphereGrid::Modes SphereGrid::forward(const Field& f) const {
  if (std::size_t(f.size()) != size()) throw Error(ErrorKind::InvalidArgument, "field size does not match grid");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> values(f.data(), n_theta_,
                                                                                                  n_phi_);
  const double inv = 1.0 / double(n_phi_);
  return {values * cos_table_.transpose() * inv, -(values * sin_table_.transpose()) * inv};
}

Field SphereGrid::inverse(const Eigen::MatrixXd& re, const Eigen::MatrixXd& im) const {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values = re * cos_synth_ - im * sin_synth_;
  return Eigen::Map<const Field>(values.data(), Eigen::Index(size()));
}

Partials SphereGrid::derivatives(const Field& f, int order) const {
  if (order < 0 || order > 3) throw Error(ErrorKind::InvalidArgument, "derivative order must be in [0, 3]");
  const auto modes = forward(f);
  const int M = max_order_;

  std::array<Eigen::MatrixXd, 4> dre, dim;
  for (int a = 0; a <= order; ++a) {
    dre[a].resize(n_theta_, M + 1);
    dim[a].resize(n_theta_, M + 1);
    for (int m = 0; m <= M; ++m) {
      dre[a].col(m).noalias() = theta_ops_[m][a] * modes.re.col(m);
      dim[a].col(m).noalias() = theta_ops_[m][a] * modes.im.col(m);
    }
  }

  Partials out(order);
  for (int n = 0; n <= order; ++n) {
    for (int b = 0; b <= n; ++b) {
      const int a = n - b;
      // multiply mode m by (i m)^b
      Eigen::MatrixXd re(n_theta_, M + 1), im(n_theta_, M + 1);
      for (int m = 0; m <= M; ++m) {
        const double mb = std::pow(double(m), b);
        switch (b % 4) {
          case 0: re.col(m) = mb * dre[a].col(m); im.col(m) = mb * dim[a].col(m); break;
          case 1: re.col(m) = -mb * dim[a].col(m); im.col(m) = mb * dre[a].col(m); break;
          case 2: re.col(m) = -mb * dre[a].col(m); im.col(m) = -mb * dim[a].col(m); break;
          default: re.col(m) = mb * dim[a].col(m); im.col(m) = -mb * dre[a].col(m); break;
        }
      }
      out(a, b) = inverse(re, im);
    }
  }
  return out;
}

Field SphereGrid::project(const Field& f) const { return derivatives(f, 0)(0, 0); }

}  // namespace qlp
