#include "qlp/refgeom.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>

#include <algorithm>
#include <cmath>

#include "qlp/csv.hpp"
#include "qlp/errors.hpp"

namespace qlp {

namespace {

struct GslInterpDeleter {
  void operator()(gsl_interp* p) const { gsl_interp_free(p); }
};
using GslInterp = std::unique_ptr<gsl_interp, GslInterpDeleter>;

GslInterp make_steffen(const std::vector<double>& x, const std::vector<double>& y) {
  GslInterp interp(gsl_interp_alloc(gsl_interp_steffen, x.size()));
  if (!interp || gsl_interp_init(interp.get(), x.data(), y.data(), x.size()) != GSL_SUCCESS)
    throw Error(ErrorKind::BadTable, "cannot build monotone interpolant");
  return interp;
}

}  // namespace

// Monotone cubic (Steffen) interpolants of phi and V. Read-only after
// construction; GSL evaluation without an accelerator is reentrant.
struct ReferenceManifold::Table {
  std::vector<TableRow> rows;
  std::vector<double> r, phi, V;
  GslInterp phi_interp, V_interp;

  double eval_phi(double x) const { return gsl_interp_eval(phi_interp.get(), r.data(), phi.data(), x, nullptr); }
};

std::string to_string(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::Schwarzschild: return "schwarzschild";
    case ReferenceKind::ReissnerNordstrom: return "reissner_nordstrom";
    case ReferenceKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

ReferenceKind reference_kind_from_string(const std::string& name) {
  if (name == "schwarzschild") return ReferenceKind::Schwarzschild;
  if (name == "reissner_nordstrom" || name == "rn") return ReferenceKind::ReissnerNordstrom;
  if (name == "tabulated" || name == "table") return ReferenceKind::Tabulated;
  throw Error(ErrorKind::InvalidArgument, "unknown reference kind '" + name + "'");
}

ReferenceManifold make_reference(ReferenceKind kind, double m, double e,
                                 std::optional<std::vector<TableRow>> table) {
  gsl_set_error_handler_off();
  ReferenceManifold ref;
  ref.kind_ = kind;
  if (!std::isfinite(m) || !std::isfinite(e)) throw Error(ErrorKind::InvalidArgument, "non-finite m or e");

  if (kind != ReferenceKind::Tabulated) {
    if (m <= 0.0) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
    if (kind == ReferenceKind::Schwarzschild) e = 0.0;
    if (std::abs(e) > m) throw Error(ErrorKind::ExtremalViolation, "|e| > m: no horizon");
    ref.m_ = m;
    ref.e_ = e;
    ref.r_horizon_ = m + std::sqrt(m * m - e * e);
    ref.r_inner_ = ref.r_horizon_;
    return ref;
  }

  if (m < 0.0) throw Error(ErrorKind::InvalidArgument, "declared mass must be nonnegative");
  if (!table) throw Error(ErrorKind::BadTable, "tabulated reference needs a table");
  auto& rows = *table;
  if (rows.size() < 4) throw Error(ErrorKind::BadTable, "need at least 4 table rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isfinite(rows[i].r) || !std::isfinite(rows[i].phi) || !std::isfinite(rows[i].V))
      throw Error(ErrorKind::BadTable, "non-finite entry in row " + std::to_string(i));
    if (rows[i].r <= 0.0) throw Error(ErrorKind::BadTable, "table radii must be positive");
    if (i > 0 && rows[i].r <= rows[i - 1].r)
      throw Error(ErrorKind::BadTable, "table radii not strictly increasing at row " + std::to_string(i));
  }
  // Nonpositive phi may only occur as a prefix (the region inside the horizon).
  std::size_t first_positive = 0;
  while (first_positive < rows.size() && rows[first_positive].phi <= 0.0) ++first_positive;
  if (first_positive + 3 > rows.size()) throw Error(ErrorKind::BadTable, "too few rows with phi > 0");
  for (std::size_t i = first_positive; i < rows.size(); ++i) {
    if (rows[i].phi <= 0.0) throw Error(ErrorKind::BadTable, "phi <= 0 past the horizon at row " + std::to_string(i));
    if (rows[i].V <= 0.0) throw Error(ErrorKind::BadTable, "V <= 0 past the horizon at row " + std::to_string(i));
  }

  auto t = std::make_shared<ReferenceManifold::Table>();
  t->rows = rows;
  for (const auto& row : rows) {
    t->r.push_back(row.r);
    t->phi.push_back(row.phi);
    t->V.push_back(row.V);
  }
  t->phi_interp = make_steffen(t->r, t->phi);
  t->V_interp = make_steffen(t->r, t->V);

  ref.m_ = m;
  ref.e_ = e;
  ref.r_max_ = rows.back().r;
  if (first_positive == 0) {
    ref.r_horizon_ = 0.0;
    ref.r_inner_ = rows.front().r;
  } else {
    // Root of the interpolant itself, so phi > 0 strictly above r_horizon.
    double lo = rows[first_positive - 1].r, hi = rows[first_positive].r;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (t->eval_phi(mid) > 0.0 ? hi : lo) = mid;
    }
    ref.r_horizon_ = hi;
    ref.r_inner_ = hi;
  }
  ref.table_ = std::move(t);
  return ref;
}

ReferenceManifold make_flat_reference(double r_min, double r_max, std::size_t n) {
  if (!(r_min > 0.0 && r_max > r_min) || n < 4) throw Error(ErrorKind::InvalidArgument, "bad flat table range");
  std::vector<TableRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = r_min * std::pow(r_max / r_min, double(i) / double(n - 1));
    rows[i] = {r, 1.0, 1.0};
  }
  rows.back().r = r_max;
  return make_reference(ReferenceKind::Tabulated, 0.0, 0.0, std::move(rows));
}

std::vector<TableRow> read_reference_csv(const std::filesystem::path& path) {
  const auto csv = read_csv(path);
  const auto ir = csv.column("r"), ip = csv.column("phi"), iv = csv.column("V");
  std::vector<TableRow> rows;
  rows.reserve(csv.rows.size());
  for (const auto& row : csv.rows) rows.push_back({row[ir], row[ip], row[iv]});
  return rows;
}

std::span<const TableRow> ReferenceManifold::table() const {
  if (!table_) return {};
  return table_->rows;
}

RadialJet ReferenceManifold::eval(double r) const {
  if (!(r > r_inner_) || r > r_max_ * (1.0 + 1e-12))
    throw Error(ErrorKind::Domain, "r = " + format_number(r) + " outside (" + format_number(r_inner_) + ", " +
                                       format_number(r_max_) + "]");
  return eval_unchecked(std::min(r, r_max_));
}

RadialJet ReferenceManifold::eval_closed(double r) const {
  if (r < r_inner_ || r > r_max_ * (1.0 + 1e-12))
    throw Error(ErrorKind::Domain, "r = " + format_number(r) + " outside [" + format_number(r_inner_) + ", " +
                                       format_number(r_max_) + "]");
  return eval_unchecked(std::clamp(r, r_inner_, r_max_));
}

RadialJet ReferenceManifold::eval_unchecked(double r) const {
  RadialJet j{};
  j.r = r;
  if (kind_ != ReferenceKind::Tabulated) {
    const double m = m_, e2 = e_ * e_;
    const double r_plus = r_horizon_;
    const double r_minus = r_plus > 0.0 ? e2 / r_plus : 0.0;
    // factorized form keeps phi accurate near the horizon
    j.phi = (r - r_plus) * (r - r_minus) / (r * r);
    j.phi_minus_one = (-2.0 * m + e2 / r) / r;
    j.dphi = 2.0 * m / (r * r) - 2.0 * e2 / (r * r * r);
    j.d2phi = -4.0 * m / (r * r * r) + 6.0 * e2 / (r * r * r * r);
    j.V = std::sqrt(std::max(j.phi, 0.0));
    if (j.V > 0.0) {
      j.dV = j.dphi / (2.0 * j.V);
      j.d2V = j.d2phi / (2.0 * j.V) - j.dphi * j.dphi / (4.0 * j.V * j.V * j.V);
    } else {
      j.dV = j.d2V = std::numeric_limits<double>::infinity();
    }
    return j;
  }
  const auto& t = *table_;
  const double* x = t.r.data();
  j.phi = gsl_interp_eval(t.phi_interp.get(), x, t.phi.data(), r, nullptr);
  j.phi_minus_one = j.phi - 1.0;
  j.dphi = gsl_interp_eval_deriv(t.phi_interp.get(), x, t.phi.data(), r, nullptr);
  j.d2phi = gsl_interp_eval_deriv2(t.phi_interp.get(), x, t.phi.data(), r, nullptr);
  j.V = gsl_interp_eval(t.V_interp.get(), x, t.V.data(), r, nullptr);
  j.dV = gsl_interp_eval_deriv(t.V_interp.get(), x, t.V.data(), r, nullptr);
  j.d2V = gsl_interp_eval_deriv2(t.V_interp.get(), x, t.V.data(), r, nullptr);
  return j;
}

// ---------------------------------------------------------------------------

namespace {

RicciEigenvalues ricci_from_jet(const RadialJet& j) {
  const double r = j.r;
  return {-j.dphi / r, -j.dphi / (2.0 * r) - j.phi_minus_one / (r * r)};
}

struct PotentialHessian {
  double radial;      // D^2 V(e_r, e_r)
  double tangential;  // D^2 V(e_1, e_1)
  double laplacian;
};

PotentialHessian hessian_from_jet(const RadialJet& j) {
  const double rr = j.phi * j.d2V + 0.5 * j.dphi * j.dV;
  const double tt = j.phi * j.dV / j.r;
  return {rr, tt, rr + 2.0 * tt};
}

}  // namespace

RicciEigenvalues ricci_eigenvalues(const ReferenceManifold& ref, double r) {
  return ricci_from_jet(ref.eval(r));
}

double scalar_curvature(const ReferenceManifold& ref, double r) {
  const auto ric = ricci_eigenvalues(ref, r);
  return ric.radial + 2.0 * ric.tangential;
}

double ricci_normal(const ReferenceManifold& ref, double r, double cos_theta) {
  const auto ric = ricci_eigenvalues(ref, r);
  const double c2 = cos_theta * cos_theta;
  return c2 * ric.radial + (1.0 - c2) * ric.tangential;
}

double t_function(const ReferenceManifold& ref, double r, double cos_theta) {
  const auto j = ref.eval(r);
  if (!std::isfinite(j.d2V)) throw Error(ErrorKind::Domain, "V not twice differentiable at r");
  const auto ric = ricci_from_jet(j);
  const auto hess = hessian_from_jet(j);
  const double c2 = cos_theta * cos_theta, s2 = 1.0 - c2;
  const double hess_nn = c2 * hess.radial + s2 * hess.tangential;
  const double ric_nn = c2 * ric.radial + s2 * ric.tangential;
  return (hess.laplacian - hess_nn) / j.V + ric_nn;
}

EinsteinComponents einstein_components(const ReferenceManifold& ref, double r, double cos_theta) {
  const auto j = ref.eval(r);
  const auto ric = ricci_from_jet(j);
  const auto hess = hessian_from_jet(j);
  const double c2 = cos_theta * cos_theta, s2 = 1.0 - c2;
  const double rbar = ric.radial + 2.0 * ric.tangential;
  // Spacetime Ricci of -V^2 dt^2 + gbar: R(e0,e0) = Lap V / V, R_ij = Ric_ij - D_iD_j V / V.
  const double spacetime_scalar = rbar - 2.0 * hess.laplacian / j.V;
  const double ric4_nn = c2 * ric.radial + s2 * ric.tangential - (c2 * hess.radial + s2 * hess.tangential) / j.V;
  const double ric4_00 = hess.laplacian / j.V;
  return {ric4_00 + 0.5 * spacetime_scalar, ric4_nn - 0.5 * spacetime_scalar};
}

double angle_threshold(const ReferenceManifold& ref, double r) {
  const auto ric = ricci_eigenvalues(ref, r);
  if (ric.tangential <= 0.0) return 0.0;
  const double gap = ric.tangential - ric.radial;
  if (gap <= 0.0) return 1.0;
  return std::sqrt(std::min(1.0, ric.tangential / gap));
}

double angle_threshold_printed_rn(double m, double e, double r) {
  return std::sqrt(m / (3.0 * m - e * e / r));
}

// ---------------------------------------------------------------------------

StaticReport static_check(const ReferenceManifold& ref, std::span<const double> r_grid, std::size_t n_directions) {
  const auto profile = isothermal_profile(ref, r_grid);
  StaticReport report;
  n_directions = std::max<std::size_t>(n_directions, 2);

  auto flag = [&](bool& ok, const std::string& name, double r, double c, double value) {
    if (ok) report.violations.push_back({name, r, c, value});
    ok = false;
  };
  bool seen_upper_equality = false, seen_lower_equality = false;

  for (const double r : r_grid) {
    const auto j = ref.eval(r);
    const auto ric = ricci_from_jet(j);
    const double rbar = ric.radial + 2.0 * ric.tangential;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!(j.dV > 0.0)) flag(report.dV_positive, "dV/dr > 0", r, nan, j.dV);
    const auto fac = profile->factor(profile->rho_of_r(r));
    if (!(fac.dF < 0.0)) flag(report.dF_negative, "dF/drho < 0", r, nan, fac.dF);
    if (!(ric.radial < 0.0)) flag(report.ricci_radial_negative, "Ric(e_r,e_r) < 0", r, nan, ric.radial);

    const double scale = std::abs(ric.radial) + std::abs(ric.tangential);
    const double tol = 1e-10 * scale + 1e-300;
    for (std::size_t k = 0; k < n_directions; ++k) {
      const double c = double(k) / double(n_directions - 1);
      const double t = t_function(ref, r, c);
      if (t < -tol) flag(report.t_bounds, "T >= 0", r, c, t);
      if (t > rbar + tol) flag(report.t_bounds, "T <= Rbar", r, c, t - rbar);
      if (rbar > tol) {
        if (!seen_upper_equality && std::abs(t - rbar) <= tol) {
          report.equalities.push_back({"T = Rbar", r, c, t});
          seen_upper_equality = true;
        }
        if (!seen_lower_equality && std::abs(t) <= tol) {
          report.equalities.push_back({"T = 0", r, c, t});
          seen_lower_equality = true;
        }
      }
    }
  }
  return report;
}

double potential_decay_rate(const ReferenceManifold& ref) {
  if (ref.kind() != ReferenceKind::Tabulated) return 1.0;
  const auto rows = ref.table();
  const double r_from = rows.back().r / 10.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (const auto& row : rows) {
    const double gap = std::abs(1.0 - row.V);
    if (row.r < r_from || gap < 1e-15) continue;
    const double x = std::log(row.r), y = std::log(gap);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::infinity();
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

}  // namespace qlp
