#include "qlp/energy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "qlp/csv.hpp"
#include "qlp/errors.hpp"

namespace qlp {

namespace {

constexpr double kEightPi = 8.0 * std::numbers::pi;

}  // namespace

double quasilocal_energy(const SurfaceGeometry& g, const Field& u) {
  if (u.size() != g.H0.size()) throw Error(ErrorKind::InvalidArgument, "u does not match the slice");
  if (!(u.minCoeff() > 0.0)) throw Error(ErrorKind::InvalidArgument, "u must be positive");
  return g.integrate(g.V * g.H0 * (1.0 - 1.0 / u)) / kEightPi;
}

double energy_rate_formula(const SurfaceGeometry& g, const Field& u) {
  if (u.size() != g.H0.size()) throw Error(ErrorKind::InvalidArgument, "u does not match the slice");
  const Field w = u - 1.0;
  const Field bracket = g.H0 * g.dV_dnu + g.V * (g.detA0 - 0.5 * g.T);
  return -g.integrate(w.square() / u * bracket) / kEightPi;
}

EnergyTrace monotonicity_check(const Foliation& fol, const UField& u) {
  if (fol.size() < 3 || u.u.size() != fol.size())
    throw Error(ErrorKind::InvalidArgument, "monotonicity check needs at least 3 slices with u on each");
  const std::size_t n = fol.size();
  EnergyTrace t;
  t.s = fol.s_values();
  t.E.resize(n);
  t.dEds_formula.resize(n);
  t.dEds_numeric.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < n; ++k) {
    const auto g = fol.geometry(k, false);
    t.E[k] = quasilocal_energy(g, u.u[k]);
    t.dEds_formula[k] = energy_rate_formula(g, u.u[k]);
    t.max_rate = std::max(t.max_rate, t.dEds_formula[k]);
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const auto w = three_point_weights(t.s[k - 1], t.s[k], t.s[k + 1]);
    t.dEds_numeric[k] = w.c0 * t.E[k - 1] + w.c1 * t.E[k] + w.c2 * t.E[k + 1];
    t.max_discrepancy = std::max(t.max_discrepancy, std::abs(t.dEds_numeric[k] - t.dEds_formula[k]));
  }
  for (std::size_t k = 0; k + 1 < n; ++k) t.max_increase = std::max(t.max_increase, t.E[k + 1] - t.E[k]);
  return t;
}

AdmFit adm_extrapolate(const EnergyTrace& trace, double max_residual) {
  const std::size_t n = trace.s.size();
  const std::size_t first = n - n / 3;
  AdmFit fit;
  fit.samples = n - first;
  if (fit.samples < 10) throw Error(ErrorKind::Tolerance, "extrapolation needs at least 10 tail samples");
  if (!(trace.s[first] > 0.0)) throw Error(ErrorKind::Tolerance, "extrapolation tail must have s > 0");

  Eigen::MatrixXd A(fit.samples, 3);
  Eigen::VectorXd y(fit.samples);
  for (std::size_t i = 0; i < fit.samples; ++i) {
    const double x = 1.0 / trace.s[first + i];
    A.row(i) << 1.0, x, x * x;
    y[i] = trace.E[first + i];
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
  fit.E_inf = c[0];
  fit.a = c[1];
  fit.b = c[2];
  fit.rms_residual = std::sqrt((A * c - y).squaredNorm() / double(fit.samples));
  const double scale = std::max(y.cwiseAbs().maxCoeff(), 1e-300);
  if (fit.rms_residual > max_residual * scale && fit.rms_residual > 1e-14)
    throw Error(ErrorKind::Tolerance, "energy tail is not in the asymptotic regime (fit residual " +
                                          format_number(fit.rms_residual) + ")");
  return fit;
}

void write_energy_csv(const EnergyTrace& t, const std::filesystem::path& path) {
  CsvWriter out(path, {"s", "E", "dEds_numeric", "dEds_formula"});
  for (std::size_t k = 0; k < t.s.size(); ++k) {
    const std::string numeric = std::isnan(t.dEds_numeric[k]) ? "" : format_number(t.dEds_numeric[k]);
    out.row_text({format_number(t.s[k]), format_number(t.E[k]), numeric, format_number(t.dEds_formula[k])});
  }
}

// ---------------------------------------------------------------------------

std::string to_string(InnerKind kind) {
  switch (kind) {
    case InnerKind::SchwarzschildInterior: return "schwarzschild_interior";
    case InnerKind::ReissnerNordstromInterior: return "rn_interior";
    case InnerKind::Custom: return "custom";
  }
  return "unknown";
}

InnerKind inner_kind_from_string(const std::string& name) {
  if (name == "schwarzschild_interior") return InnerKind::SchwarzschildInterior;
  if (name == "rn_interior") return InnerKind::ReissnerNordstromInterior;
  if (name == "custom") return InnerKind::Custom;
  throw Error(ErrorKind::InvalidArgument, "unknown inner data type '" + name + "'");
}

double InnerData::horizon_mass() const {
  switch (kind) {
    case InnerKind::SchwarzschildInterior: return M;
    case InnerKind::ReissnerNordstromInterior: return 0.5 * (M + std::sqrt(M * M - e * e));
    case InnerKind::Custom: return std::sqrt(horizon_area / (16.0 * std::numbers::pi));
  }
  return 0.0;
}

Field InnerData::boundary_mean_curvature(double r0, std::size_t points) const {
  if (kind == InnerKind::Custom) {
    if (std::size_t(H.size()) != points) throw Error(ErrorKind::InvalidArgument, "custom H does not match the grid");
    return H;
  }
  if (kind == InnerKind::ReissnerNordstromInterior && std::abs(e) > M)
    throw Error(ErrorKind::ExtremalViolation, "inner data has |e| > M");
  const double phi = 1.0 - 2.0 * M / r0 + e * e / (r0 * r0);
  if (!(phi > 0.0) || r0 <= M + std::sqrt(std::max(0.0, M * M - e * e)))
    throw Error(ErrorKind::Domain, "boundary lies inside the inner horizon");
  return Field::Constant(Eigen::Index(points), 2.0 / r0 * std::sqrt(phi));
}

namespace {

void add(PenroseReport& rep, std::string name, double value, double threshold, bool informational) {
  const bool pass = value > threshold;
  rep.hypotheses.push_back({name, value, threshold, pass, informational});
  if (!pass && !informational && rep.failure.empty()) rep.failure = name;
}

}  // namespace

PenroseReport penrose_report(const Scenario& sc) {
  PenroseReport rep;
  rep.scenario = sc.name;
  const StarSurface& surface = sc.boundary;
  const ReferenceManifold& ref = surface.reference();
  const SphereGrid& grid = surface.grid();
  const double m = ref.mass();

  if (sc.inner.kind == InnerKind::Custom && !(sc.inner.horizon_area >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "horizon area must be nonnegative");

  const auto g0 = surface_geometry(surface, true);
  rep.boundary_conditions = condition_report(surface, g0, sc.flow.margin);
  const double mean_G = surface.G().mean();
  const double roundness = (surface.G() - mean_G).abs().maxCoeff() / mean_G;
  const bool round = roundness < 1e-12;
  if (sc.inner.kind != InnerKind::Custom && !round)
    throw Error(ErrorKind::InvalidArgument, "closed-form inner data needs a round boundary");
  const double r0 = g0.r.mean();
  const Field H = sc.inner.boundary_mean_curvature(r0, grid.size());

  add(rep, "physical_mean_curvature", H.minCoeff(), 0.0, false);
  add(rep, "reference_mean_curvature", g0.H0.minCoeff(), 0.0, false);
  add(rep, "kappa1_flat", g0.kappa1_flat.minCoeff(), 0.0, false);
  for (const auto& e : rep.boundary_conditions.entries)
    if (e.name == "dV_dnu" || e.name == "detA0_plus_T_half_minus_ric" || e.name == "detA0_minus_T_half")
      add(rep, "boundary_" + e.name, e.min_value, sc.flow.margin, false);

  // Thresholds of the condition-preservation results, reported for reference.
  const double min_rho = surface.G().minCoeff();
  const auto cos_min = g0.cos_theta.minCoeff();
  const auto kappa_rho2 = (g0.kappa1_flat * surface.G().square()).minCoeff();
  if (ref.kind() == ReferenceKind::Schwarzschild) {
    add(rep, "preserved_cos_theta", cos_min, 1.0 / std::sqrt(3.0), true);
    add(rep, "preserved_kappa_rho2", kappa_rho2, std::sqrt(3.0) * m, true);
    add(rep, "preserved_rho", min_rho, 3.0 * m, true);
  } else {
    const auto c = compute_constants(surface.profile(), min_rho);
    add(rep, "preserved_cos_theta", cos_min, c.max_angle, true);
    add(rep, "preserved_kappa_rho2_C1", kappa_rho2, c.C1, true);
    add(rep, "preserved_kappa_rho2_C2", kappa_rho2, c.C2, true);
  }

  if (ref.kind() == ReferenceKind::Tabulated)
    add(rep, "reference_V_decay_rate", potential_decay_rate(ref), 0.5, true);

  rep.rhs = sc.inner.horizon_mass() - m;
  if (ref.kind() == ReferenceKind::Schwarzschild && sc.inner.kind == InnerKind::SchwarzschildInterior)
    rep.closed_form = oracle::scenario_closed_form(sc.inner.M, m, r0);

  bool gate = rep.failure.empty();
  if (!gate && !sc.run_on_hypothesis_failure) return rep;
  if (!(H.minCoeff() > 0.0) || !(g0.H0.minCoeff() > 0.0)) return rep;

  try {
    FlowConfig flow = sc.flow;
    flow.n_theta = grid.n_theta();
    flow.n_phi = grid.n_phi();
    const Foliation fol = run_flow(surface, flow);
    for (std::size_t k = 0; k < fol.size(); ++k)
      if (!fol.diagnostics(k).conditions.foliation_conditions()) {
        add(rep, "foliation_conditions_all_slices", fol.s(k), fol.s(fol.size() - 1), false);
        gate = false;
        break;
      }
    if (fol.halted()) {
      if (rep.failure.empty()) rep.failure = "flow halted: " + fol.halt_reason();
      gate = false;
    }
    for (std::size_t k = 0; k < fol.size(); ++k)
      rep.gauss_residual = std::max(rep.gauss_residual, fol.diagnostics(k).max_gauss_residual);
    rep.hypotheses_met = gate;
    if (!gate && !sc.run_on_hypothesis_failure) return rep;

    const Field u0 = initial_u(H, g0.H0);
    const UField u = solve_u(fol, u0, sc.solver);
    rep.u_bound_excess = u.worst_bound_excess;
    rep.decay_bounded = u.decay_bounded;
    rep.u_s = u.s;
    rep.max_u_minus_1 = u.max_u_minus_1;
    rep.min_u = u.min_u;
    rep.trace = monotonicity_check(fol, u);
    rep.E0 = rep.trace.E.front();
    rep.margin = rep.E0 - rep.rhs;
    rep.monotonicity_margin = rep.trace.max_rate;
    rep.monotonicity_discrepancy = rep.trace.max_discrepancy;
    rep.max_energy_increase = rep.trace.max_increase;
    rep.pipeline_ran = true;
    if (sc.scalar_residual) rep.scalar_residual = scalar_residual(fol, u).max();
    const AdmFit fit = adm_extrapolate(rep.trace);
    rep.E_inf = fit.E_inf;
    rep.E_inf_fit_residual = fit.rms_residual;
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::Hypothesis) rep.hypotheses_met = false;
    if (rep.failure.empty()) rep.failure = err.what();
  }
  return rep;
}

}  // namespace qlp
