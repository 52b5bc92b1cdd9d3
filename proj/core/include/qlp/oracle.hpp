#pragma once

// Rotationally symmetric reductions: closed forms and 1D integrations used as
// independent ground truth. Nothing here touches the spherical grid.

#include <filesystem>
#include <span>
#include <vector>

#include "qlp/refgeom.hpp"

namespace qlp::oracle {

struct RoundGeometry {
  double r;
  double H0;      // (2/r) sqrt(phi)
  double kappa;   // sqrt(phi) / r
  double V;
  double dV_dnu;  // sqrt(phi) V'
  double detA0;   // phi / r^2
  double ric_nu;  // radial Ricci eigenvalue
  double T;       // along the radial direction
  double Rbar;
};

/// Geometry of the coordinate sphere of area radius r. Throws Domain at or
/// inside the horizon.
RoundGeometry round_geometry(const ReferenceManifold& ref, double r);

struct RoundState {
  double s;
  double r;
  double u;
  double E;  // (r^2 / 2) V H0 (1 - 1/u)
};

/// Integrates dr/ds = sqrt(phi), du/ds = (u - u^3) c / H0 with
/// c = detA0 - Ric(nu, nu) + T/2 and reports the state at each requested s
/// (nondecreasing, starting at or after 0).
std::vector<RoundState> round_flow_u(const ReferenceManifold& ref, double r0, double u0,
                                     std::span<const double> s_out);
/// Same on a uniform output grid 0, ds, ..., s_max.
std::vector<RoundState> round_flow_u(const ReferenceManifold& ref, double r0, double u0, double s_max, double ds);

/// Initial rate du/ds of the round equation.
double round_u_rate(const ReferenceManifold& ref, double r, double u);

struct ClosedFormScenario {
  double M, m, r0;
  double lhs;  // E(0) = r0 sqrt(1 - 2m/r0) (sqrt(1 - 2m/r0) - sqrt(1 - 2M/r0))
  double rhs;  // M - m
  double margin() const { return lhs - rhs; }
};

/// Schwarzschild mass M interior bounded by the coordinate sphere r0 of the
/// mass m reference. Requires m <= M and 2M < r0.
ClosedFormScenario scenario_closed_form(double M, double m, double r0);

std::vector<ClosedFormScenario> closed_form_sweep(std::span<const double> Ms, std::span<const double> ms,
                                                  std::span<const double> r0s);

/// CSV `M,m,r0,LHS,RHS,margin`.
void write_sweep_csv(std::span<const ClosedFormScenario> rows, const std::filesystem::path& path);

}  // namespace qlp::oracle
