#include "qlp/oracle.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include <cmath>
#include <memory>

#include "qlp/csv.hpp"
#include "qlp/errors.hpp"

namespace qlp::oracle {

namespace {

struct Radial {
  double phi, dphi, V, dV, ric_rad, T, Rbar;
};

Radial radial(const ReferenceManifold& ref, double r) {
  if (ref.kind() != ReferenceKind::Tabulated) {
    const double m = ref.mass(), e2 = ref.charge() * ref.charge();
    const double phi = 1.0 - 2.0 * m / r + e2 / (r * r);
    if (!(phi > 0.0) || (ref.has_horizon() && r <= ref.r_horizon()))
      throw Error(ErrorKind::Domain, "radius at or inside the horizon");
    const double dphi = 2.0 * m / (r * r) - 2.0 * e2 / (r * r * r);
    const double V = std::sqrt(phi);
    // V = sqrt(phi) makes the radial T vanish identically.
    return {phi, dphi, V, dphi / (2.0 * V), -dphi / r, 0.0, 2.0 * e2 / (r * r * r * r)};
  }
  const RadialJet j = ref.eval(r);
  const double ric_rad = -j.dphi / r;
  const double ric_tan = -j.dphi / (2.0 * r) - j.phi_minus_one / (r * r);
  // Lap V - D^2 V(e_r, e_r) = 2 phi V' / r
  const double T = 2.0 * j.phi * j.dV / (r * j.V) + ric_rad;
  return {j.phi, j.dphi, j.V, j.dV, ric_rad, T, ric_rad + 2.0 * ric_tan};
}

double reaction(const Radial& q, double r) { return q.phi / (r * r) + q.dphi / r + 0.5 * q.T; }

struct OdeContext {
  const ReferenceManifold* ref;
};

int round_rhs(double, const double y[], double dy[], void* params) {
  const auto* ctx = static_cast<const OdeContext*>(params);
  const double r = y[0], u = y[1];
  Radial q;
  try {
    q = radial(*ctx->ref, r);
  } catch (const Error&) {
    return GSL_EDOM;
  }
  const double sq = std::sqrt(q.phi);
  dy[0] = sq;
  dy[1] = (u - u * u * u) * reaction(q, r) / (2.0 * sq / r);
  return GSL_SUCCESS;
}

}  // namespace

RoundGeometry round_geometry(const ReferenceManifold& ref, double r) {
  const Radial q = radial(ref, r);
  const double sq = std::sqrt(q.phi);
  return {r, 2.0 * sq / r, sq / r, q.V, sq * q.dV, q.phi / (r * r), q.ric_rad, q.T, q.Rbar};
}

double round_u_rate(const ReferenceManifold& ref, double r, double u) {
  const Radial q = radial(ref, r);
  return (u - u * u * u) * reaction(q, r) / (2.0 * std::sqrt(q.phi) / r);
}

std::vector<RoundState> round_flow_u(const ReferenceManifold& ref, double r0, double u0,
                                     std::span<const double> s_out) {
  if (!(u0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "u0 must be positive");
  round_geometry(ref, r0);

  OdeContext ctx{&ref};
  gsl_odeiv2_system sys{round_rhs, nullptr, 2, &ctx};
  std::unique_ptr<gsl_odeiv2_driver, decltype(&gsl_odeiv2_driver_free)> driver(
      gsl_odeiv2_driver_alloc_y_new(&sys, gsl_odeiv2_step_rk8pd, 1e-4, 1e-14, 1e-14), &gsl_odeiv2_driver_free);

  auto energy = [&](double r, double u) {
    const auto g = round_geometry(ref, r);
    return 0.5 * r * r * g.V * g.H0 * (1.0 - 1.0 / u);
  };

  std::vector<RoundState> out;
  out.reserve(s_out.size());
  double s = 0.0;
  double y[2] = {r0, u0};
  for (const double target : s_out) {
    if (target < s) throw Error(ErrorKind::InvalidArgument, "output abscissae must be nondecreasing from 0");
    if (target > s) {
      const int status = gsl_odeiv2_driver_apply(driver.get(), &s, target, y);
      if (status != GSL_SUCCESS) throw Error(ErrorKind::Tolerance, "round flow integration failed");
    }
    out.push_back({target, y[0], y[1], energy(y[0], y[1])});
  }
  return out;
}

std::vector<RoundState> round_flow_u(const ReferenceManifold& ref, double r0, double u0, double s_max, double ds) {
  if (!(ds > 0.0) || !(s_max >= 0.0)) throw Error(ErrorKind::InvalidArgument, "need ds > 0 and s_max >= 0");
  std::vector<double> s;
  const auto n = static_cast<std::size_t>(std::llround(s_max / ds));
  for (std::size_t k = 0; k <= n; ++k) s.push_back(std::min(s_max, double(k) * ds));
  return round_flow_u(ref, r0, u0, s);
}

ClosedFormScenario scenario_closed_form(double M, double m, double r0) {
  if (!(m >= 0.0) || !(m <= M)) throw Error(ErrorKind::InvalidArgument, "need 0 <= m <= M");
  if (!(r0 > 2.0 * M)) throw Error(ErrorKind::Domain, "r0 must lie outside both horizons");
  const double a = std::sqrt(1.0 - 2.0 * m / r0), b = std::sqrt(1.0 - 2.0 * M / r0);
  return {M, m, r0, r0 * a * (a - b), M - m};
}

std::vector<ClosedFormScenario> closed_form_sweep(std::span<const double> Ms, std::span<const double> ms,
                                                  std::span<const double> r0s) {
  std::vector<ClosedFormScenario> out;
  for (const double M : Ms)
    for (const double m : ms)
      for (const double r0 : r0s)
        if (m <= M && r0 > 2.0 * M) out.push_back(scenario_closed_form(M, m, r0));
  return out;
}

void write_sweep_csv(std::span<const ClosedFormScenario> rows, const std::filesystem::path& path) {
  CsvWriter out(path, {"M", "m", "r0", "LHS", "RHS", "margin"});
  for (const auto& c : rows) out.row({c.M, c.m, c.r0, c.lhs, c.rhs, c.margin()});
}

}  // namespace qlp::oracle
