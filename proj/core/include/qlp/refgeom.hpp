#pragma once

// Spherically symmetric static reference manifolds
//
//   gbar = dr^2 / phi(r) + r^2 dS^2,   static potential V(r),
//
// together with their curvature, the direction-dependent T-function and the
// isothermal (conformally flat) coordinate rho with gbar = F^4 (drho^2 + rho^2 dS^2).

#include <cstddef>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qlp {

enum class ReferenceKind { Schwarzschild, ReissnerNordstrom, Tabulated };

std::string to_string(ReferenceKind kind);
ReferenceKind reference_kind_from_string(const std::string& name);

struct TableRow {
  double r;
  double phi;
  double V;
};

/// Values of the metric coefficient and static potential with their first two
/// radial derivatives at one area radius.
struct RadialJet {
  double r;
  double phi;
  double phi_minus_one;  // phi - 1, evaluated without cancellation for analytic kinds
  double dphi;
  double d2phi;
  double V;
  double dV;
  double d2V;
};

class ReferenceManifold {
 public:
  ReferenceKind kind() const noexcept { return kind_; }
  double mass() const noexcept { return m_; }
  double charge() const noexcept { return e_; }

  /// Outermost zero of phi; 0 when phi has no zero (e.g. a flat table).
  double r_horizon() const noexcept { return r_horizon_; }
  bool has_horizon() const noexcept { return r_horizon_ > 0.0; }
  /// Lower end of the domain of validity (the horizon, or the first table row).
  double r_inner() const noexcept { return r_inner_; }
  /// Upper end of the domain of validity (infinite for analytic kinds).
  double r_max() const noexcept { return r_max_; }

  /// Evaluates phi, V and derivatives. Throws Domain outside (r_inner, r_max].
  RadialJet eval(double r) const;
  /// Same as eval() but admits r == r_inner (used to close tables at the horizon).
  RadialJet eval_closed(double r) const;

  double phi(double r) const { return eval(r).phi; }
  double potential(double r) const { return eval(r).V; }

  std::span<const TableRow> table() const;

 private:
  friend ReferenceManifold make_reference(ReferenceKind, double, double,
                                          std::optional<std::vector<TableRow>>);
  struct Table;

  RadialJet eval_unchecked(double r) const;

  ReferenceKind kind_ = ReferenceKind::Schwarzschild;
  double m_ = 0.0;
  double e_ = 0.0;
  double r_horizon_ = 0.0;
  double r_inner_ = 0.0;
  double r_max_ = std::numeric_limits<double>::infinity();
  std::shared_ptr<const Table> table_;
};

/// Builds a reference manifold. For the analytic kinds phi = 1 - 2m/r + e^2/r^2
/// and V = sqrt(phi); `table` is ignored. For Tabulated, `table` is required and
/// `m` is the declared ADM mass (m >= 0), used only where the mass enters a
/// formula (e.g. the Penrose right-hand side).
ReferenceManifold make_reference(ReferenceKind kind, double m, double e = 0.0,
                                 std::optional<std::vector<TableRow>> table = std::nullopt);

/// phi = V = 1 sampled on [r_min, r_max].
ReferenceManifold make_flat_reference(double r_min = 0.05, double r_max = 1.0e4, std::size_t n = 400);

std::vector<TableRow> read_reference_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Curvature

struct RicciEigenvalues {
  double radial;      // Ric(e_r, e_r)
  double tangential;  // Ric(e_1, e_1) = Ric(e_2, e_2)
};

/// Orthonormal-frame Ricci eigenvalues of dr^2/phi + r^2 dS^2:
/// radial = -phi'/r, tangential = -phi'/(2r) + (1 - phi)/r^2.
RicciEigenvalues ricci_eigenvalues(const ReferenceManifold& ref, double r);

double scalar_curvature(const ReferenceManifold& ref, double r);

/// Ric(nu, nu) for a unit normal making angle theta with the radial direction.
double ricci_normal(const ReferenceManifold& ref, double r, double cos_theta);

/// T defined by  Lap V - D^2 V(nu, nu) + V Ric(nu, nu) = T V.
double t_function(const ReferenceManifold& ref, double r, double cos_theta);

/// Orthonormal components of the Einstein tensor of the static spacetime
/// -V^2 dt^2 + gbar, built from the curvature eigenvalues and the Hessian of V.
struct EinsteinComponents {
  double time_time;      // G(e0, e0) = Rbar / 2
  double normal_normal;  // G(nu, nu)
};
EinsteinComponents einstein_components(const ReferenceManifold& ref, double r, double cos_theta);

/// cos(theta) threshold above which Ric(nu, nu) < 0:
/// sqrt(lambda_tan / (lambda_tan - lambda_rad)); 0 where lambda_tan <= 0.
double angle_threshold(const ReferenceManifold& ref, double r);

/// Variant Reissner-Nordstrom threshold sqrt(m / (3m - e^2/r)), reported next
/// to angle_threshold for comparison.
double angle_threshold_printed_rn(double m, double e, double r);

// ---------------------------------------------------------------------------
// Isothermal coordinates

struct ConformalFactor {
  double rho;
  double r;    // area radius, r = rho F^2
  double F;
  double dF;   // dF/drho
  double d2F;  // d^2F/drho^2
};

class ConformalProfile {
 public:
  /// Integrates d ln(rho) / d ln(r) = 1/sqrt(phi) over the whole domain of `ref`.
  /// Analytic kinds are normalized so that rho/r -> 1 as r -> infinity;
  /// tabulated kinds so that rho = r at the last table row.
  static std::shared_ptr<const ConformalProfile> build(const ReferenceManifold& ref);

  const ReferenceManifold& reference() const noexcept { return ref_; }

  double rho_of_r(double r) const;
  double r_of_rho(double rho) const;
  ConformalFactor factor(double rho) const;

  double rho_horizon() const noexcept { return rho_lo_; }
  double rho_max() const noexcept { return rho_hi_; }
  std::size_t node_count() const noexcept { return y_.size(); }

 private:
  explicit ConformalProfile(ReferenceManifold ref) : ref_(std::move(ref)) {}

  // Quintic Hermite data of r as a function of y = ln(rho).
  std::vector<double> y_, r_, dr_, d2r_;
  ReferenceManifold ref_;
  double rho_lo_ = 0.0;
  double rho_hi_ = 0.0;
};

/// Validates that `r_grid` is increasing and inside (r_inner, r_max] and returns
/// the profile of `ref`.
std::shared_ptr<const ConformalProfile> isothermal_profile(const ReferenceManifold& ref,
                                                           std::span<const double> r_grid);

void write_profile_csv(const ConformalProfile& profile, std::span<const double> r_grid,
                       const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Static reference checks

struct CheckViolation {
  std::string condition;
  double r;
  double cos_theta;  // NaN when the condition does not depend on direction
  double value;
};

struct StaticReport {
  bool dV_positive = true;
  bool dF_negative = true;
  bool ricci_radial_negative = true;
  bool t_bounds = true;  // 0 <= T <= Rbar
  std::vector<CheckViolation> violations;  // first violation of each failing condition
  std::vector<CheckViolation> equalities;  // points where T = Rbar or T = 0 with Rbar > 0

  bool ok() const { return dV_positive && dF_negative && ricci_radial_negative && t_bounds; }
};

StaticReport static_check(const ReferenceManifold& ref, std::span<const double> r_grid,
                          std::size_t n_directions = 11);

/// Exponent tau of 1 - V ~ c r^(-tau), fitted in log-log over the outer decade
/// of a table. 1 for the analytic kinds; infinity when V = 1 on that decade.
double potential_decay_rate(const ReferenceManifold& ref);

}  // namespace qlp
