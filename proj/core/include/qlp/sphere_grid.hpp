#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <vector>

namespace qlp {

/// Scalar field sampled on a SphereGrid, stored colatitude-major: index = i * n_phi + j.
using Field = Eigen::ArrayXd;

/// Coordinate partial derivatives d^{a+b} f / dtheta^a dphi^b, a + b <= order.
class Partials {
 public:
  static constexpr std::size_t slot(int a, int b) { return std::size_t((a + b) * (a + b + 1) / 2 + b); }

  explicit Partials(int order = 0) : order_(order) {}

  int order() const noexcept { return order_; }
  Field& operator()(int a, int b) { return d_[slot(a, b)]; }
  const Field& operator()(int a, int b) const { return d_[slot(a, b)]; }

 private:
  int order_;
  std::array<Field, 10> d_;
};

/// Tensor grid of n_theta Gauss-Legendre colatitudes and n_phi uniform
/// longitudes, with pseudospectral (spherical harmonic) differentiation.
/// The grid has no pole points; functions are represented up to degree
/// n_theta - 1 and order min(n_theta - 1, (n_phi - 1) / 2).
class SphereGrid {
 public:
  SphereGrid(std::size_t n_theta, std::size_t n_phi);

  std::size_t n_theta() const noexcept { return n_theta_; }
  std::size_t n_phi() const noexcept { return n_phi_; }
  std::size_t size() const noexcept { return n_theta_ * n_phi_; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * n_phi_ + j; }

  int max_degree() const noexcept { return int(n_theta_) - 1; }
  int max_order() const noexcept { return max_order_; }

  double theta(std::size_t i) const { return theta_[i]; }
  double cos_theta(std::size_t i) const { return x_[i]; }
  double sin_theta(std::size_t i) const { return sin_[i]; }
  double phi(std::size_t j) const { return phi_[j]; }
  /// Gauss-Legendre weight for d(cos theta).
  double weight(std::size_t i) const { return w_[i]; }

  /// Fields holding the colatitude / longitude of every grid point.
  Field theta_field() const;
  Field phi_field() const;

  /// Integral over the unit sphere, int f dOmega.
  double integrate(const Field& f) const;

  /// All coordinate partials of f up to `order` (<= 3), spectrally.
  Partials derivatives(const Field& f, int order) const;

  /// L2 projection onto the represented harmonics (analysis followed by synthesis).
  Field project(const Field& f) const;

  /// Minimum great-circle spacing between neighbouring points on the unit sphere.
  double min_spacing() const;

 private:
  struct Modes {
    Eigen::MatrixXd re, im;  // n_theta x (max_order + 1)
  };
  Modes forward(const Field& f) const;
  Field inverse(const Eigen::MatrixXd& re, const Eigen::MatrixXd& im) const;

  std::size_t n_theta_, n_phi_;
  int max_order_;
  std::vector<double> theta_, x_, sin_, w_, phi_;
  Eigen::MatrixXd cos_table_, sin_table_;    // (M+1) x n_phi, forward
  Eigen::MatrixXd cos_synth_, sin_synth_;    // (M+1) x n_phi, inverse (doubled for m >= 1)
  // theta_ops_[m][a]: values of mode m at the nodes -> a-th theta derivative.
  std::vector<std::array<Eigen::MatrixXd, 4>> theta_ops_;
};

/// Normalized associated Legendre functions  Pbar_l^m(cos theta)  (int_{-1}^{1} Pbar^2 dx = 1)
/// and their first three theta derivatives, for l = m .. l_max at one colatitude.
struct LegendreColumn {
  std::vector<double> p, dp, d2p, d3p;  // indexed by l - m
};
LegendreColumn normalized_legendre(int l_max, int m, double theta);

}  // namespace qlp
