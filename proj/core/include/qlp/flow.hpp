#pragma once

// Unit normal flow of star-shaped surfaces in a static reference manifold,
// realized in the isothermal picture as the Euclidean flow with normal speed
// 1/F^2 and evolved as a radial graph rho = G(theta, phi, s).

#include <array>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "qlp/surfgeom.hpp"

namespace qlp {

struct FlowConfig {
  double ds = 0.01;
  double s_max = 1.0;
  double tolerance = 1e-4;  // unit-lapse reconstruction tolerance per step
  double margin = 1e-8;     // strict-inequality margin of the condition monitors
  bool abort_on_condition_failure = false;
  std::size_t n_theta = 32;
  std::size_t n_phi = 64;
  std::size_t keep_every = 1;  // store every k-th step as a slice
  std::size_t max_steps = 10'000'000;
  double cfl_limit = 1.0;
  bool filter = true;  // project onto the represented harmonics after each step
};

struct SliceDiagnostics {
  double s = 0.0;
  double min_rho = 0.0, max_rho = 0.0;
  double min_cos_theta = 0.0, max_cos_theta = 0.0;
  double min_kappa_rho2 = 0.0, max_kappa_rho2 = 0.0;  // kappa1_flat rho^2
  double roundness = 0.0;                             // max |G - mean G| / mean G
  double min_H0 = 0.0;
  double max_gauss_residual = 0.0;
  double lapse_error = 0.0;  // |normal speed F^2 - 1| over the step into this slice
  double cfl = 0.0;
  ConditionReport conditions;

  /// "ok" or the failing monitor names joined by '|'.
  std::string condition_flags() const;
};

class Foliation {
 public:
  Foliation(std::shared_ptr<const ConformalProfile> profile, std::shared_ptr<const SphereGrid> grid, FlowConfig config)
      : profile_(std::move(profile)), grid_(std::move(grid)), config_(config) {}

  std::size_t size() const noexcept { return s_.size(); }
  double s(std::size_t k) const { return s_[k]; }
  const std::vector<double>& s_values() const noexcept { return s_; }
  const Field& G(std::size_t k) const { return G_[k]; }
  const SliceDiagnostics& diagnostics(std::size_t k) const { return diag_[k]; }
  const FlowConfig& config() const noexcept { return config_; }
  const std::shared_ptr<const ConformalProfile>& profile() const noexcept { return profile_; }
  const std::shared_ptr<const SphereGrid>& grid() const noexcept { return grid_; }

  StarSurface surface(std::size_t k) const { return StarSurface(profile_, grid_, G_[k]); }
  /// Geometry is recomputed on demand; slices only store G.
  SurfaceGeometry geometry(std::size_t k, bool gauss_curvature = true) const {
    return surface_geometry(surface(k), gauss_curvature);
  }

  bool halted() const noexcept { return halted_; }
  std::size_t halt_index() const noexcept { return halt_index_; }
  const std::string& halt_reason() const noexcept { return halt_reason_; }

  void append(double s, Field G, SliceDiagnostics diagnostics);
  void halt(std::size_t index, std::string reason);

 private:
  std::shared_ptr<const ConformalProfile> profile_;
  std::shared_ptr<const SphereGrid> grid_;
  FlowConfig config_;
  std::vector<double> s_;
  std::vector<Field> G_;
  std::vector<SliceDiagnostics> diag_;
  bool halted_ = false;
  std::size_t halt_index_ = 0;
  std::string halt_reason_;
};

/// dG/ds = W / (G F^2(G)) at fixed angles (the normal speed 1/F^2 as a graph evolution).
Field graph_speed(const StarSurface& surface);
Field graph_speed(const SurfaceGeometry& geometry);

/// Angular velocity v^a = -G_s sigma_flat^{ab} G_b of the normal trajectories,
/// so that d/ds along a trajectory is d/ds|_angles + v^a d_a.
std::array<Field, 2> trajectory_velocity(const SurfaceGeometry& geometry);

/// Courant number of one step of size ds.
double flow_cfl(const StarSurface& surface, double ds);

/// One classical Runge-Kutta step of the graph evolution.
StarSurface step_flow(const StarSurface& surface, double ds, bool filter = true);

SliceDiagnostics slice_diagnostics(const StarSurface& surface, const SurfaceGeometry& geometry, double s,
                                   double margin);

Foliation run_flow(const StarSurface& initial, const FlowConfig& config);

/// Time series `s,min_cos_theta,min_kappa_rho2,min_rho,condition_flags`.
void write_flow_csv(const Foliation& foliation, const std::filesystem::path& path);

// ---------------------------------------------------------------------------

struct EvolutionReport {
  std::size_t slices_checked = 0;
  double rho_law = 0.0;              // max |d rho/ds - cos(theta)/F^2|
  double flat_mean_curvature_law = 0.0;   // max |dH/ds + Lap f + f |A|^2|, f = 1/F^2
  double flat_gauss_curvature_law = 0.0;  // max |d det S/ds + tr(adj S Hess f) + f det S H|
  double curved_mean_curvature_law = 0.0;  // max |dH0/ds + |A0|^2 + Ric(nu, nu)|
  double scalar_curvature_reconstruction = 0.0;  // max |R(ds^2 + sigma_s) - Rbar|
  // Lower-bound margins along trajectories (Schwarzschild bounds with the reference mass).
  double cos_theta_margin = std::numeric_limits<double>::infinity();
  double kappa_rho2_margin = std::numeric_limits<double>::infinity();
  double kappa_rho2_margin_weak = std::numeric_limits<double>::infinity();  // with 2/sqrt(3) in place of 2 cos
};

/// Finite-difference checks of the evolution laws along trajectories on
/// interior slices. Requires at least 3 slices.
EvolutionReport evolution_diagnostics(const Foliation& foliation);

/// Centered three-point derivative at the middle of (s0, s1, s2).
struct ThreePoint {
  double c0, c1, c2;
};
ThreePoint three_point_weights(double s0, double s1, double s2);

// ---------------------------------------------------------------------------

struct FlowConstants {
  double C3 = 0.0, C4 = 0.0, C5 = 0.0, C1 = 0.0, C2 = 0.0;
  double C2_exterior = 0.0;        // C2 with max G taken over the whole exterior
  double max_angle = 0.0;          // max G over [rho_min, infinity)
  double max_angle_exterior = 0.0;  // max G over the exterior
  double argmax_C3 = 0.0, argmax_C4 = 0.0, argmax_C5 = 0.0;  // rho of the sup (infinity if at the tail)
  bool tail_stable = true;
};

/// Smallest constants with
///   |d(1/F^2)/drho|             <= C3 / (F^2 rho^2 + 1)
///   2|F'|/F + F^2 sqrt(Rbar)    <= C4 / (rho^2 + 1)
///   |D^2 (1/F^2)|               <= C5 / (rho^3 F^2 + 1)
/// on [rho_min, infinity), and the derived C1, C2.
FlowConstants compute_constants(const ConformalProfile& profile, double rho_min);

}  // namespace qlp
