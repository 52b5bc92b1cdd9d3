#include "qlp/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qlp/csv.hpp"
#include "qlp/errors.hpp"

namespace qlp {

namespace {

// Grid fields of F(G) and F'(G).
void conformal_fields(const ConformalProfile& profile, const Field& G, Field& F, Field& dF) {
  F.resize(G.size());
  dF.resize(G.size());
  for (Eigen::Index k = 0; k < G.size(); ++k) {
    const auto fac = profile.factor(G[k]);
    F[k] = fac.F;
    dF[k] = fac.dF;
  }
}

Field speed_from(const SphereGrid& grid, const Field& G, const Partials& d, const Field& F) {
  Field speed(G.size());
  for (std::size_t i = 0; i < grid.n_theta(); ++i) {
    const double s2 = grid.sin_theta(i) * grid.sin_theta(i);
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      const std::size_t k = grid.index(i, j);
      const double gt = d(1, 0)[k], gp = d(0, 1)[k];
      const double W = std::sqrt(G[k] * G[k] + gt * gt + gp * gp / s2);
      speed[k] = W / (G[k] * F[k] * F[k]);
    }
  }
  return speed;
}

}  // namespace

std::string SliceDiagnostics::condition_flags() const {
  std::string flags;
  for (const auto& e : conditions.entries) {
    if (e.informational || e.pass) continue;
    if (!flags.empty()) flags += '|';
    flags += e.name;
  }
  return flags.empty() ? "ok" : flags;
}

void Foliation::append(double s, Field G, SliceDiagnostics diagnostics) {
  if (!s_.empty() && !(s > s_.back())) throw Error(ErrorKind::InvalidArgument, "slice parameters must increase");
  s_.push_back(s);
  G_.push_back(std::move(G));
  diag_.push_back(std::move(diagnostics));
}

void Foliation::halt(std::size_t index, std::string reason) {
  halted_ = true;
  halt_index_ = index;
  halt_reason_ = std::move(reason);
}

Field graph_speed(const StarSurface& surface) {
  const auto d = surface.grid().derivatives(surface.G(), 1);
  Field F, dF;
  conformal_fields(surface.profile(), surface.G(), F, dF);
  return speed_from(surface.grid(), surface.G(), d, F);
}

Field graph_speed(const SurfaceGeometry& g) { return g.W / (g.dG(0, 0) * g.F.square()); }

std::array<Field, 2> trajectory_velocity(const SurfaceGeometry& g) {
  const Field speed = graph_speed(g);
  const Field& Gt = g.dG(1, 0);
  const Field& Gp = g.dG(0, 1);
  return {-speed * (g.sigma_flat_inv[0] * Gt + g.sigma_flat_inv[1] * Gp),
          -speed * (g.sigma_flat_inv[1] * Gt + g.sigma_flat_inv[2] * Gp)};
}

double flow_cfl(const StarSurface& surface, double ds) {
  const SphereGrid& grid = surface.grid();
  const Field& G = surface.G();
  const auto d = grid.derivatives(G, 1);
  Field F, dF;
  conformal_fields(surface.profile(), G, F, dF);
  // Characteristic angular speeds of G_s = W / (G F^2): dH/dG_a.
  double dtheta = std::numbers::pi, cfl = 0.0;
  for (std::size_t i = 1; i < grid.n_theta(); ++i) dtheta = std::min(dtheta, grid.theta(i) - grid.theta(i - 1));
  const double dphi = 2.0 * std::numbers::pi / double(grid.n_phi());
  for (std::size_t i = 0; i < grid.n_theta(); ++i) {
    const double s = grid.sin_theta(i), s2 = s * s;
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      const std::size_t k = grid.index(i, j);
      const double gt = d(1, 0)[k], gp = d(0, 1)[k];
      const double W = std::sqrt(G[k] * G[k] + gt * gt + gp * gp / s2);
      const double denom = G[k] * F[k] * F[k] * W;
      cfl = std::max(cfl, ds * (std::abs(gt) / denom / dtheta + std::abs(gp) / (s2 * denom) / dphi));
    }
  }
  return cfl;
}

StarSurface step_flow(const StarSurface& surface, double ds, bool filter) {
  if (!(ds > 0.0)) throw Error(ErrorKind::InvalidArgument, "flow step must be positive");
  const SphereGrid& grid = surface.grid();
  const ConformalProfile& profile = surface.profile();
  auto rhs = [&](const Field& G) {
    if (!G.isFinite().all() || !(G.minCoeff() > profile.rho_horizon()))
      throw Error(ErrorKind::StarShape, "flow stage left the star-shaped exterior region");
    const auto d = grid.derivatives(G, 1);
    Field F, dF;
    conformal_fields(profile, G, F, dF);
    Field speed = speed_from(grid, G, d, F);
    if (!speed.isFinite().all() || (speed * F.square()).maxCoeff() > 1e3)
      throw Error(ErrorKind::StarShape, "graph gradient blow-up");
    return speed;
  };
  const Field& G0 = surface.G();
  const Field k1 = rhs(G0);
  const Field k2 = rhs(G0 + 0.5 * ds * k1);
  const Field k3 = rhs(G0 + 0.5 * ds * k2);
  const Field k4 = rhs(G0 + ds * k3);
  Field G1 = G0 + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (filter) G1 = grid.project(G1);
  if (!G1.isFinite().all() || !(G1.minCoeff() > 0.0)) throw Error(ErrorKind::StarShape, "update is not star-shaped");
  return surface.with_G(std::move(G1));
}

SliceDiagnostics slice_diagnostics(const StarSurface& surface, const SurfaceGeometry& g, double s, double margin) {
  SliceDiagnostics d;
  const Field& G = surface.G();
  d.s = s;
  d.min_rho = G.minCoeff();
  d.max_rho = G.maxCoeff();
  d.min_cos_theta = g.cos_theta.minCoeff();
  d.max_cos_theta = g.cos_theta.maxCoeff();
  const Field kr2 = g.kappa1_flat * G.square();
  d.min_kappa_rho2 = kr2.minCoeff();
  d.max_kappa_rho2 = kr2.maxCoeff();
  const double mean = G.mean();
  d.roundness = (G - mean).abs().maxCoeff() / mean;
  d.min_H0 = g.H0.minCoeff();
  if (g.has_gauss_curvature()) d.max_gauss_residual = g.gauss_residual.abs().maxCoeff();
  d.conditions = condition_report(surface, g, margin);
  return d;
}

Foliation run_flow(const StarSurface& initial, const FlowConfig& config) {
  if (!(config.ds > 0.0) || !(config.s_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "need ds > 0 and s_max > 0");
  if (config.keep_every == 0) throw Error(ErrorKind::InvalidArgument, "keep_every must be positive");
  const auto n_steps = static_cast<std::size_t>(std::ceil(config.s_max / config.ds - 1e-9));
  if (n_steps > config.max_steps) throw Error(ErrorKind::InvalidArgument, "maximum step count exceeded");

  Foliation fol(initial.profile_ptr(), initial.grid_ptr(), config);
  auto record = [&](const StarSurface& surf, double s, double lapse, double cfl) {
    const auto geom = surface_geometry(surf, true);
    auto diag = slice_diagnostics(surf, geom, s, config.margin);
    diag.lapse_error = lapse;
    diag.cfl = cfl;
    const bool ok = diag.conditions.all_pass();
    const std::string flags = diag.condition_flags();
    fol.append(s, surf.G(), std::move(diag));
    if (config.abort_on_condition_failure && !ok) {
      fol.halt(fol.size() - 1, "condition failure: " + flags);
      return false;
    }
    return true;
  };

  StarSurface current = initial;
  if (!record(current, 0.0, 0.0, 0.0)) return fol;
  double s = 0.0, max_lapse = 0.0, max_cfl = 0.0;
  for (std::size_t n = 1; n <= n_steps; ++n) {
    const double h = std::min(config.ds, config.s_max - s);
    const double cfl = flow_cfl(current, h);
    if (cfl > config.cfl_limit)
      throw Error(ErrorKind::StepRejected, "CFL violation (" + format_number(cfl) + ") at s = " + format_number(s));
    StarSurface next = step_flow(current, h, config.filter);

    // Unit lapse: the achieved normal displacement over the step, measured at the
    // mean surface, times F^2 should equal the step size.
    const StarSurface mid = current.with_G(0.5 * (current.G() + next.G()));
    const auto dmid = mid.grid().derivatives(mid.G(), 1);
    Field F, dF;
    conformal_fields(mid.profile(), mid.G(), F, dF);
    const Field speed_mid = speed_from(mid.grid(), mid.G(), dmid, F);
    const Field achieved = (next.G() - current.G()) / h;
    const double lapse = (achieved / speed_mid - 1.0).abs().maxCoeff();
    max_lapse = std::max(max_lapse, lapse);
    max_cfl = std::max(max_cfl, cfl);

    current = std::move(next);
    s = (n == n_steps) ? config.s_max : s + h;
    if (n % config.keep_every == 0 || n == n_steps) {
      if (!record(current, s, max_lapse, max_cfl)) return fol;
      max_lapse = max_cfl = 0.0;
    }
  }
  return fol;
}

void write_flow_csv(const Foliation& fol, const std::filesystem::path& path) {
  CsvWriter out(path, {"s", "min_cos_theta", "min_kappa_rho2", "min_rho", "condition_flags"});
  for (std::size_t k = 0; k < fol.size(); ++k) {
    const auto& d = fol.diagnostics(k);
    out.row_text({format_number(d.s), format_number(d.min_cos_theta), format_number(d.min_kappa_rho2),
                  format_number(d.min_rho), d.condition_flags()});
  }
}

// ---------------------------------------------------------------------------

ThreePoint three_point_weights(double s0, double s1, double s2) {
  const double h1 = s1 - s0, h2 = s2 - s1;
  return {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))};
}

namespace {

// Smallest-eigenvalue derivative of the flat shape operator S under
// dS/ds = -Hess^#(f) - f S^2.
Field min_curvature_rate(const SurfaceGeometry& g, const SymField& hess, const Field& f) {
  Field out(g.W.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    const double s11 = g.sigma_flat[0][k], s12 = g.sigma_flat[1][k], s22 = g.sigma_flat[2][k];
    const double a11 = g.A_flat[0][k], a12 = g.A_flat[1][k], a22 = g.A_flat[2][k];
    const double k1 = g.kappa1_flat[k], k2 = g.kappa2_flat[k];
    const double h11 = hess[0][k], h12 = hess[1][k], h22 = hess[2][k];
    double hee;
    if (std::abs(k2 - k1) <= 1e-8 * (std::abs(k1) + std::abs(k2) + 1e-300)) {
      // umbilic: smallest eigenvalue of -Hess^# restricted to the whole tangent plane
      const double det_s = s11 * s22 - s12 * s12;
      const double tr = (s22 * h11 - 2.0 * s12 * h12 + s11 * h22) / det_s;
      const double det = (h11 * h22 - h12 * h12) / det_s;
      const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
      hee = 0.5 * tr + disc;  // largest Hess eigenvalue gives the smallest rate
    } else {
      // eigenvector of (A - k1 sigma) e = 0, from the better-conditioned row
      const double r11 = a11 - k1 * s11, r12 = a12 - k1 * s12, r22 = a22 - k1 * s22;
      double e1, e2;
      if (std::abs(r11) + std::abs(r12) >= std::abs(r12) + std::abs(r22)) {
        e1 = r12;
        e2 = -r11;
      } else {
        e1 = r22;
        e2 = -r12;
      }
      const double norm2 = s11 * e1 * e1 + 2.0 * s12 * e1 * e2 + s22 * e2 * e2;
      hee = (h11 * e1 * e1 + 2.0 * h12 * e1 * e2 + h22 * e2 * e2) / norm2;
    }
    out[k] = -hee - f[k] * k1 * k1;
  }
  return out;
}

}  // namespace

EvolutionReport evolution_diagnostics(const Foliation& fol) {
  if (fol.size() < 3) throw Error(ErrorKind::InvalidArgument, "evolution diagnostics need at least 3 slices");
  const SphereGrid& grid = *fol.grid();
  const double m = fol.profile()->reference().mass();
  EvolutionReport rep;

  std::array<SurfaceGeometry, 3> win{fol.geometry(0), fol.geometry(1), fol.geometry(2)};
  auto detS = [](const SurfaceGeometry& g) { return g.detA_flat; };

  for (std::size_t k = 1; k + 1 < fol.size(); ++k) {
    if (k > 1) {
      win[0] = std::move(win[1]);
      win[1] = std::move(win[2]);
      win[2] = fol.geometry(k + 1);
    }
    const auto w = three_point_weights(fol.s(k - 1), fol.s(k), fol.s(k + 1));
    const SurfaceGeometry& g = win[1];
    const auto v = trajectory_velocity(g);
    auto along = [&](const Field& q0, const Field& q1, const Field& q2) {
      const auto dq = grid.derivatives(q1, 1);
      return Field(w.c0 * q0 + w.c1 * q1 + w.c2 * q2 + v[0] * dq(1, 0) + v[1] * dq(0, 1));
    };

    const Field& rho = g.dG(0, 0);
    const Field F2 = g.F.square();
    const Field F3 = F2 * g.F;

    // (a) d rho / ds = cos(theta) / F^2
    const Field drho = along(win[0].dG(0, 0), rho, win[2].dG(0, 0));
    rep.rho_law = std::max(rep.rho_law, (drho - g.cos_theta / F2).abs().maxCoeff());

    // (b) flat shape operator law with normal speed f = 1/F^2
    Field d2F(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i) d2F[i] = fol.profile()->factor(rho[i]).d2F;
    const Field f = 1.0 / F2;
    const Field f1 = -2.0 * g.dF / F3;
    const Field f2 = -2.0 * d2F / F3 + 6.0 * g.dF.square() / (F2 * F2);
    const SymField hess = flat_radial_hessian(g, f1, f2);
    const Field lap_f = trace(g.sigma_flat_inv, hess);
    const Field normA2 = g.kappa1_flat.square() + g.kappa2_flat.square();
    const Field dH = along(win[0].H_flat, g.H_flat, win[2].H_flat);
    rep.flat_mean_curvature_law =
        std::max(rep.flat_mean_curvature_law, (dH + lap_f + f * normA2).abs().maxCoeff());
    // tr(adj(S) Hess^#) = H lap f - <A, Hess> with indices raised by sigma_flat
    const auto& si = g.sigma_flat_inv;
    SymField Aup;
    Aup[0] = si[0] * si[0] * g.A_flat[0] + 2.0 * si[0] * si[1] * g.A_flat[1] + si[1] * si[1] * g.A_flat[2];
    Aup[1] = si[0] * si[1] * g.A_flat[0] + (si[0] * si[2] + si[1] * si[1]) * g.A_flat[1] + si[1] * si[2] * g.A_flat[2];
    Aup[2] = si[1] * si[1] * g.A_flat[0] + 2.0 * si[1] * si[2] * g.A_flat[1] + si[2] * si[2] * g.A_flat[2];
    const Field A_hess = Aup[0] * hess[0] + 2.0 * Aup[1] * hess[1] + Aup[2] * hess[2];
    const Field ddet = along(detS(win[0]), detS(g), detS(win[2]));
    rep.flat_gauss_curvature_law = std::max(
        rep.flat_gauss_curvature_law,
        (ddet + g.H_flat * lap_f - A_hess + f * g.detA_flat * g.H_flat).abs().maxCoeff());

    // (c) curved first variation with unit speed
    const Field dH0 = along(win[0].H0, g.H0, win[2].H0);
    rep.curved_mean_curvature_law =
        std::max(rep.curved_mean_curvature_law, (dH0 + g.normA0_sq + g.ric_nu).abs().maxCoeff());
    const Field R = 2.0 * g.K - 2.0 * dH0 - g.normA0_sq - g.H0.square();
    rep.scalar_curvature_reconstruction =
        std::max(rep.scalar_curvature_reconstruction, (R - g.Rbar).abs().maxCoeff());

    // (d) lower bounds for d cos/ds and d(kappa rho^2)/ds
    const Field dcos = along(win[0].cos_theta, g.cos_theta, win[2].cos_theta);
    const Field sin_a = (1.0 - g.cos_theta.square()).max(0.0).sqrt();
    const Field grad_f = f1.abs() * sin_a;
    rep.cos_theta_margin =
        std::min(rep.cos_theta_margin, (dcos - (sin_a.square() / (F2 * rho) - grad_f)).minCoeff());
    const Field k1 = g.kappa1_flat;
    const Field dk = min_curvature_rate(g, hess, f);
    const Field dkr2 = rho.square() * dk + 2.0 * rho * k1 * g.cos_theta / F2;
    const Field bound = (2.0 * rho.square() * g.cos_theta * k1 - rho.cube() * k1.square() - m) / (rho * F2);
    const Field bound_weak =
        (2.0 / std::sqrt(3.0) * rho.square() * k1 - rho.cube() * k1.square() - m) / (rho * F2);
    rep.kappa_rho2_margin = std::min(rep.kappa_rho2_margin, (dkr2 - bound).minCoeff());
    rep.kappa_rho2_margin_weak = std::min(rep.kappa_rho2_margin_weak, (dkr2 - bound_weak).minCoeff());
    ++rep.slices_checked;
  }
  return rep;
}

}  // namespace qlp
