#pragma once

// Star-shaped surfaces rho = G(theta, phi) in the isothermal picture of a
// reference manifold, and their geometry in both the flat metric
// drho^2 + rho^2 dS^2 and the curved metric F^4 (drho^2 + rho^2 dS^2).

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qlp/refgeom.hpp"
#include "qlp/sphere_grid.hpp"

namespace qlp {

/// Symmetric 2-tensor on the grid, components (theta theta, theta phi, phi phi).
using SymField = std::array<Field, 3>;

class StarSurface {
 public:
  StarSurface(std::shared_ptr<const ConformalProfile> profile, std::shared_ptr<const SphereGrid> grid, Field G);

  static StarSurface round(std::shared_ptr<const ConformalProfile> profile, std::shared_ptr<const SphereGrid> grid,
                           double rho0);
  /// Round sphere of area radius r.
  static StarSurface coordinate_sphere(std::shared_ptr<const ConformalProfile> profile,
                                       std::shared_ptr<const SphereGrid> grid, double r);
  static StarSurface from_function(std::shared_ptr<const ConformalProfile> profile,
                                   std::shared_ptr<const SphereGrid> grid,
                                   const std::function<double(double theta, double phi)>& G);

  const ConformalProfile& profile() const noexcept { return *profile_; }
  const std::shared_ptr<const ConformalProfile>& profile_ptr() const noexcept { return profile_; }
  const ReferenceManifold& reference() const noexcept { return profile_->reference(); }
  const SphereGrid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const SphereGrid>& grid_ptr() const noexcept { return grid_; }
  const Field& G() const noexcept { return G_; }

  StarSurface with_G(Field G) const { return StarSurface(profile_, grid_, std::move(G)); }

 private:
  std::shared_ptr<const ConformalProfile> profile_;
  std::shared_ptr<const SphereGrid> grid_;
  Field G_;
};

/// Real harmonic with unit peak: P_l^|m|(cos theta) times cos(m phi) (m >= 0)
/// or sin(|m| phi) (m < 0), scaled so that its maximum modulus is 1.
/// For m = 0 this is the Legendre polynomial P_l(cos theta).
double peak_harmonic(int l, int m, double theta, double phi);

struct HarmonicMode {
  int l = 0;
  int m = 0;
  double amplitude = 0.0;
};

/// rho0 (1 + sum_k a_k peak_harmonic(l_k, m_k)).
StarSurface perturbed_sphere(std::shared_ptr<const ConformalProfile> profile, std::shared_ptr<const SphereGrid> grid,
                             double rho0, const std::vector<HarmonicMode>& modes);

struct SurfaceGeometry {
  Partials dG;  // coordinate partials of G up to the computed order

  // Flat picture.
  Field W;  // sqrt(G^2 + G_theta^2 + G_phi^2 / sin^2 theta)
  SymField sigma_flat, sigma_flat_inv, A_flat;
  Field kappa1_flat, kappa2_flat, H_flat, detA_flat;
  Field support, cos_theta;

  // Conformal factor along the surface.
  Field r, F, dF;

  // Curved picture.
  SymField sigma, sigma_inv, A0;
  std::array<Field, 6> christoffel;  // Gamma^theta_{tt,tp,pp}, Gamma^phi_{tt,tp,pp}
  Field kappa1, kappa2, H0, detA0, normA0_sq;
  Field K;  // Gauss curvature of sigma (empty unless requested)
  Field ric_nu, T, Rbar, V, dV_dnu;
  Field area;            // dsigma including quadrature weights
  Field gauss_residual;  // detA0 - K + Rbar/2 - Ric(nu, nu) (empty unless K present)

  std::size_t nonconvex_points = 0;  // points with kappa1_flat <= 0
  bool finite = true;

  bool has_curved() const { return H0.size() > 0; }
  bool has_gauss_curvature() const { return K.size() > 0; }
  double integrate(const Field& f) const { return (f * area).sum(); }
  double total_area() const { return area.sum(); }
};

/// Flat fields from G and its tangential derivatives. `order` is the number of
/// G derivatives computed (2 suffices for everything but K, which needs 3).
SurfaceGeometry flat_geometry(const StarSurface& surface, int order = 3);

/// Fills the curved fields of `geometry` (which must hold the flat fields of
/// `surface`). K and the Gauss residual are computed when dG has order 3.
void curved_geometry(const StarSurface& surface, SurfaceGeometry& geometry);

/// flat_geometry followed by curved_geometry.
SurfaceGeometry surface_geometry(const StarSurface& surface, bool gauss_curvature = true);

/// Laplace-Beltrami operator of the curved slice metric sigma applied to u.
Field laplace_beltrami(const SphereGrid& grid, const SurfaceGeometry& geometry, const Field& u);
Field laplace_beltrami(const SurfaceGeometry& geometry, const Partials& du);

/// Hessian, in the flat induced metric, of the restriction of a radial
/// function f(rho) to the surface, given f' and f'' pointwise.
SymField flat_radial_hessian(const SurfaceGeometry& geometry, const Field& f1, const Field& f2);

/// Trace of a symmetric tensor against an inverse metric.
Field trace(const SymField& inverse_metric, const SymField& tensor);

// ---------------------------------------------------------------------------
// Foliation condition monitors

struct ConditionEntry {
  std::string name;
  double min_value = 0.0;
  bool pass = true;
  bool informational = false;  // reported but not part of the verdict
  std::size_t argmin = 0;
  double theta = 0.0;
  double phi = 0.0;
};

struct ConditionReport {
  std::vector<ConditionEntry> entries;

  const ConditionEntry& at(const std::string& name) const;
  /// dV/dnu > 0, detA0 + T/2 - Ric(nu, nu) > 0 and detA0 > T/2.
  bool foliation_conditions() const;
  /// Every non-informational entry.
  bool all_pass() const;
};

/// Largest tangent-angle threshold max_{R >= rho_from} angle_threshold(r(R))
/// on a logarithmic grid with its asymptotic value, and the same for the
/// variant Reissner-Nordstrom formula (NaN for other kinds).
struct AngleThresholdMax {
  double value;
  double variant;
};
AngleThresholdMax max_angle_threshold(const ConformalProfile& profile, double rho_from);

/// Pointwise minima of the monitored quantities; a quantity passes when its
/// minimum exceeds `margin`.
ConditionReport condition_report(const StarSurface& surface, const SurfaceGeometry& geometry, double margin = 1e-8);

// ---------------------------------------------------------------------------
// Serialization

void write_surface_csv(const StarSurface& surface, const std::filesystem::path& path);
/// Reads `theta,phi,G`; the points must form a SphereGrid in grid order.
StarSurface read_surface_csv(const std::filesystem::path& path, std::shared_ptr<const ConformalProfile> profile);
void write_geometry_csv(const StarSurface& surface, const SurfaceGeometry& geometry,
                        const std::filesystem::path& path);

}  // namespace qlp
