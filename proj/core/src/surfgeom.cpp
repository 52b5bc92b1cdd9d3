#include "qlp/surfgeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "qlp/csv.hpp"
#include "qlp/errors.hpp"

namespace qlp {

namespace {

// Value with first and second partials in (theta, phi).
struct Jet {
  double v = 0, t = 0, p = 0, tt = 0, tp = 0, pp = 0;
};

Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.t + b.t, a.p + b.p, a.tt + b.tt, a.tp + b.tp, a.pp + b.pp}; }

Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v,
          a.t * b.v + a.v * b.t,
          a.p * b.v + a.v * b.p,
          a.tt * b.v + 2.0 * a.t * b.t + a.v * b.tt,
          a.tp * b.v + a.t * b.p + a.p * b.t + a.v * b.tp,
          a.pp * b.v + 2.0 * a.p * b.p + a.v * b.pp};
}

// f(g) given f, f', f'' at g.v
Jet compose(const Jet& g, double f0, double f1, double f2) {
  return {f0,
          f1 * g.t,
          f1 * g.p,
          f2 * g.t * g.t + f1 * g.tt,
          f2 * g.t * g.p + f1 * g.tp,
          f2 * g.p * g.p + f1 * g.pp};
}

double det3(double a, double b, double c, double d, double e, double f, double g, double h, double i) {
  return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

// Brioschi formula for the Gauss curvature of E dt^2 + 2 F dt dp + G dp^2.
double brioschi(const Jet& E, const Jet& F, const Jet& G) {
  const double d1 = det3(-0.5 * E.pp + F.tp - 0.5 * G.tt, 0.5 * E.t, F.t - 0.5 * E.p,  //
                         F.p - 0.5 * G.t, E.v, F.v,                                   //
                         0.5 * G.p, F.v, G.v);
  const double d2 = det3(0.0, 0.5 * E.p, 0.5 * G.t,  //
                         0.5 * E.p, E.v, F.v,        //
                         0.5 * G.t, F.v, G.v);
  const double det = E.v * G.v - F.v * F.v;
  return (d1 - d2) / (det * det);
}

struct Eigen2 {
  double k1, k2;
};

// Eigenvalues of the shape operator inv(g) h for 2x2 symmetric g, h, from the
// symmetric form inv(L) h inv(L)^T with g = L L^T.
Eigen2 principal(double g11, double g12, double g22, double h11, double h12, double h22) {
  const double l11 = std::sqrt(g11), l21 = g12 / l11, l22 = std::sqrt(g22 - l21 * l21);
  const double p21 = (h12 - l21 * h11 / l11) / l22;
  const double p22 = (h22 - l21 * h12 / l11) / l22;
  const double a = h11 / g11;
  const double b = p21 / l11;
  const double d = (p22 - p21 * l21 / l11) / l22;
  const double mid = 0.5 * (a + d);
  const double disc = std::hypot(0.5 * (a - d), b);
  return {mid - disc, mid + disc};
}

}  // namespace

StarSurface::StarSurface(std::shared_ptr<const ConformalProfile> profile, std::shared_ptr<const SphereGrid> grid,
                         Field G)
    : profile_(std::move(profile)), grid_(std::move(grid)), G_(std::move(G)) {
  if (!profile_ || !grid_) throw Error(ErrorKind::InvalidArgument, "surface needs a profile and a grid");
  if (std::size_t(G_.size()) != grid_->size()) throw Error(ErrorKind::InvalidArgument, "G does not match the grid");
  if (!G_.isFinite().all()) throw Error(ErrorKind::StarShape, "non-finite radius");
  const double g_min = G_.minCoeff();
  if (!(g_min > profile_->rho_horizon()))
    throw Error(ErrorKind::Domain, "surface reaches the horizon (min rho = " + format_number(g_min) + ")");
  if (G_.maxCoeff() > profile_->rho_max()) throw Error(ErrorKind::Domain, "surface beyond the profile range");
}

StarSurface StarSurface::round(std::shared_ptr<const ConformalProfile> profile, std::shared_ptr<const SphereGrid> grid,
                               double rho0) {
  Field G = Field::Constant(Eigen::Index(grid->size()), rho0);
  return StarSurface(std::move(profile), std::move(grid), std::move(G));
}

StarSurface StarSurface::coordinate_sphere(std::shared_ptr<const ConformalProfile> profile,
                                           std::shared_ptr<const SphereGrid> grid, double r) {
  const double rho0 = profile->rho_of_r(r);
  return round(std::move(profile), std::move(grid), rho0);
}

StarSurface StarSurface::from_function(std::shared_ptr<const ConformalProfile> profile,
                                       std::shared_ptr<const SphereGrid> grid,
                                       const std::function<double(double, double)>& G) {
  Field values(Eigen::Index(grid->size()));
  for (std::size_t i = 0; i < grid->n_theta(); ++i)
    for (std::size_t j = 0; j < grid->n_phi(); ++j) values[grid->index(i, j)] = G(grid->theta(i), grid->phi(j));
  return StarSurface(std::move(profile), std::move(grid), std::move(values));
}

double peak_harmonic(int l, int m, double theta, double phi) {
  const unsigned am = unsigned(std::abs(m));
  if (l < 0 || am > unsigned(l)) throw Error(ErrorKind::InvalidArgument, "harmonic needs 0 <= |m| <= l");
  static thread_local std::map<std::pair<int, unsigned>, double> peaks;
  auto it = peaks.find({l, am});
  if (it == peaks.end()) {
    double peak = 0.0;
    for (int k = 0; k <= 4000; ++k) peak = std::max(peak, std::abs(std::assoc_legendre(unsigned(l), am, -1.0 + k / 2000.0)));
    it = peaks.emplace(std::pair{l, am}, peak).first;
  }
  const double angular = m >= 0 ? std::cos(m * phi) : std::sin(double(am) * phi);
  return std::assoc_legendre(unsigned(l), am, std::cos(theta)) * angular / it->second;
}

StarSurface perturbed_sphere(std::shared_ptr<const ConformalProfile> profile, std::shared_ptr<const SphereGrid> grid,
                             double rho0, const std::vector<HarmonicMode>& modes) {
  return StarSurface::from_function(std::move(profile), std::move(grid), [&](double th, double ph) {
    double sum = 1.0;
    for (const auto& mode : modes) sum += mode.amplitude * peak_harmonic(mode.l, mode.m, th, ph);
    return rho0 * sum;
  });
}

// ---------------------------------------------------------------------------

SurfaceGeometry flat_geometry(const StarSurface& surface, int order) {
  if (order < 2 || order > 3) throw Error(ErrorKind::InvalidArgument, "geometry needs derivative order 2 or 3");
  const SphereGrid& grid = surface.grid();
  const std::size_t n = grid.size();
  SurfaceGeometry g;
  g.dG = grid.derivatives(surface.G(), order);
  const Field& G = surface.G();
  const Field& Gt = g.dG(1, 0);
  const Field& Gp = g.dG(0, 1);
  const Field& Gtt = g.dG(2, 0);
  const Field& Gtp = g.dG(1, 1);
  const Field& Gpp = g.dG(0, 2);

  auto alloc = [n](Field& f) { f.resize(Eigen::Index(n)); };
  alloc(g.W);
  for (auto* sym : {&g.sigma_flat, &g.sigma_flat_inv, &g.A_flat})
    for (auto& f : *sym) alloc(f);
  for (auto* f : {&g.kappa1_flat, &g.kappa2_flat, &g.H_flat, &g.detA_flat, &g.support, &g.cos_theta}) alloc(*f);

  for (std::size_t i = 0; i < grid.n_theta(); ++i) {
    const double s = grid.sin_theta(i), c = grid.cos_theta(i), s2 = s * s, cot = c / s;
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      const std::size_t k = grid.index(i, j);
      const double r = G[k], rt = Gt[k], rp = Gp[k];
      const double W = std::sqrt(r * r + rt * rt + rp * rp / s2);
      const double e = rt * rt + r * r, f = rt * rp, gg = rp * rp + r * r * s2;
      const double det = e * gg - f * f;
      const double h11 = -(r * (Gtt[k] - r) - 2.0 * rt * rt) / W;
      const double h12 = -(r * Gtp[k] - 2.0 * rt * rp - r * rp * cot) / W;
      const double h22 = -(r * (Gpp[k] - r * s2) - 2.0 * rp * rp + rt * r * s * c) / W;
      const auto kk = principal(e, f, gg, h11, h12, h22);

      g.W[k] = W;
      g.sigma_flat[0][k] = e;
      g.sigma_flat[1][k] = f;
      g.sigma_flat[2][k] = gg;
      g.sigma_flat_inv[0][k] = gg / det;
      g.sigma_flat_inv[1][k] = -f / det;
      g.sigma_flat_inv[2][k] = e / det;
      g.A_flat[0][k] = h11;
      g.A_flat[1][k] = h12;
      g.A_flat[2][k] = h22;
      g.kappa1_flat[k] = kk.k1;
      g.kappa2_flat[k] = kk.k2;
      g.H_flat[k] = kk.k1 + kk.k2;
      g.detA_flat[k] = (h11 * h22 - h12 * h12) / det;
      g.support[k] = r * r / W;
      g.cos_theta[k] = r / W;
    }
  }
  g.nonconvex_points = std::size_t((g.kappa1_flat <= 0.0).count());
  g.finite = g.W.isFinite().all() && g.A_flat[0].isFinite().all() && g.A_flat[1].isFinite().all() &&
             g.A_flat[2].isFinite().all();
  if ((g.sigma_flat[0] * g.sigma_flat[2] - g.sigma_flat[1].square()).minCoeff() <= 0.0)
    throw Error(ErrorKind::Degenerate, "induced metric is degenerate");
  return g;
}

void curved_geometry(const StarSurface& surface, SurfaceGeometry& g) {
  const SphereGrid& grid = surface.grid();
  const ConformalProfile& profile = surface.profile();
  const ReferenceManifold& ref = surface.reference();
  const std::size_t n = grid.size();
  if (std::size_t(g.W.size()) != n) throw Error(ErrorKind::InvalidArgument, "flat geometry missing");
  const bool with_k = g.dG.order() >= 3;
  const Field& G = surface.G();
  const auto& d = g.dG;

  auto alloc = [n](Field& f) { f.resize(Eigen::Index(n)); };
  for (auto* f : {&g.r, &g.F, &g.dF, &g.kappa1, &g.kappa2, &g.H0, &g.detA0, &g.normA0_sq, &g.ric_nu, &g.T, &g.Rbar,
                  &g.V, &g.dV_dnu, &g.area})
    alloc(*f);
  for (auto* sym : {&g.sigma, &g.sigma_inv, &g.A0})
    for (auto& f : *sym) alloc(f);
  for (auto& f : g.christoffel) alloc(f);
  if (with_k) {
    alloc(g.K);
    alloc(g.gauss_residual);
  } else {
    g.K.resize(0);
    g.gauss_residual.resize(0);
  }

  const double dphi = 2.0 * std::numbers::pi / double(grid.n_phi());
  for (std::size_t i = 0; i < grid.n_theta(); ++i) {
    const double s = grid.sin_theta(i), c = grid.cos_theta(i), s2 = s * s;
    const Jet sin2{s2, 2.0 * s * c, 0.0, 2.0 * (c * c - s2), 0.0, 0.0};
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      const std::size_t k = grid.index(i, j);
      const double rho = G[k];
      const auto fac = profile.factor(rho);
      if (!(fac.r > ref.r_inner())) throw Error(ErrorKind::Domain, "surface crosses the horizon");
      const auto jet = ref.eval(fac.r);
      const double F2 = fac.F * fac.F, F4 = F2 * F2;
      const double cos_a = g.cos_theta[k];

      // sigma = F^4(G) sigma_flat, with first and second partials
      const Jet Gj{rho, d(1, 0)[k], d(0, 1)[k], d(2, 0)[k], d(1, 1)[k], d(0, 2)[k]};
      const double f0 = F4, f1 = 4.0 * F2 * fac.F * fac.dF,
                   f2 = 12.0 * F2 * fac.dF * fac.dF + 4.0 * F2 * fac.F * fac.d2F;
      const Jet conf = compose(Gj, f0, f1, f2);
      Jet Gt_j, Gp_j;
      if (with_k) {
        Gt_j = {d(1, 0)[k], d(2, 0)[k], d(1, 1)[k], d(3, 0)[k], d(2, 1)[k], d(1, 2)[k]};
        Gp_j = {d(0, 1)[k], d(1, 1)[k], d(0, 2)[k], d(2, 1)[k], d(1, 2)[k], d(0, 3)[k]};
      } else {
        Gt_j = {d(1, 0)[k], d(2, 0)[k], d(1, 1)[k], 0, 0, 0};
        Gp_j = {d(0, 1)[k], d(1, 1)[k], d(0, 2)[k], 0, 0, 0};
      }
      const Jet E = conf * (Gt_j * Gt_j + Gj * Gj);
      const Jet Fm = conf * (Gt_j * Gp_j);
      const Jet Gm = conf * (Gp_j * Gp_j + Gj * Gj * sin2);

      const double det = E.v * Gm.v - Fm.v * Fm.v;
      const double i11 = Gm.v / det, i12 = -Fm.v / det, i22 = E.v / det;
      g.sigma[0][k] = E.v;
      g.sigma[1][k] = Fm.v;
      g.sigma[2][k] = Gm.v;
      g.sigma_inv[0][k] = i11;
      g.sigma_inv[1][k] = i12;
      g.sigma_inv[2][k] = i22;

      // Christoffel symbols of the first kind, then raised.
      const double c_t_tt = 0.5 * E.t, c_t_tp = 0.5 * E.p, c_t_pp = Fm.p - 0.5 * Gm.t;
      const double c_p_tt = Fm.t - 0.5 * E.p, c_p_tp = 0.5 * Gm.t, c_p_pp = 0.5 * Gm.p;
      g.christoffel[0][k] = i11 * c_t_tt + i12 * c_p_tt;
      g.christoffel[1][k] = i11 * c_t_tp + i12 * c_p_tp;
      g.christoffel[2][k] = i11 * c_t_pp + i12 * c_p_pp;
      g.christoffel[3][k] = i12 * c_t_tt + i22 * c_p_tt;
      g.christoffel[4][k] = i12 * c_t_tp + i22 * c_p_tp;
      g.christoffel[5][k] = i12 * c_t_pp + i22 * c_p_pp;

      // A0 = F^2 A_flat + 2 F F' cos(theta) sigma_flat
      const double shift = 2.0 * fac.F * fac.dF * cos_a;
      for (int a = 0; a < 3; ++a) g.A0[a][k] = F2 * g.A_flat[a][k] + shift * g.sigma_flat[a][k];
      const double bend = 2.0 * fac.dF * cos_a / fac.F;
      g.kappa1[k] = (g.kappa1_flat[k] + bend) / F2;
      g.kappa2[k] = (g.kappa2_flat[k] + bend) / F2;
      g.H0[k] = g.kappa1[k] + g.kappa2[k];
      g.detA0[k] = g.kappa1[k] * g.kappa2[k];
      g.normA0_sq[k] = g.kappa1[k] * g.kappa1[k] + g.kappa2[k] * g.kappa2[k];

      const double lam_r = -jet.dphi / fac.r;
      const double lam_t = -jet.dphi / (2.0 * fac.r) - jet.phi_minus_one / (fac.r * fac.r);
      g.r[k] = fac.r;
      g.F[k] = fac.F;
      g.dF[k] = fac.dF;
      g.ric_nu[k] = cos_a * cos_a * lam_r + (1.0 - cos_a * cos_a) * lam_t;
      g.Rbar[k] = lam_r + 2.0 * lam_t;
      g.T[k] = t_function(ref, fac.r, cos_a);
      g.V[k] = jet.V;
      g.dV_dnu[k] = cos_a * std::sqrt(jet.phi) * jet.dV;
      g.area[k] = std::sqrt(det) / s * grid.weight(i) * dphi;

      if (with_k) {
        g.K[k] = brioschi(E, Fm, Gm);
        g.gauss_residual[k] = g.detA0[k] - g.K[k] + 0.5 * g.Rbar[k] - g.ric_nu[k];
      }
    }
  }
  g.finite = g.finite && g.H0.isFinite().all() && g.area.isFinite().all() &&
             (!with_k || g.K.isFinite().all());
}

SurfaceGeometry surface_geometry(const StarSurface& surface, bool gauss_curvature) {
  auto g = flat_geometry(surface, gauss_curvature ? 3 : 2);
  curved_geometry(surface, g);
  return g;
}

Field laplace_beltrami(const SurfaceGeometry& g, const Partials& du) {
  if (du.order() < 2) throw Error(ErrorKind::InvalidArgument, "Laplacian needs second derivatives");
  const Field& ut = du(1, 0);
  const Field& up = du(0, 1);
  const auto& G = g.christoffel;
  const Field ctt = du(2, 0) - G[0] * ut - G[3] * up;
  const Field ctp = du(1, 1) - G[1] * ut - G[4] * up;
  const Field cpp = du(0, 2) - G[2] * ut - G[5] * up;
  return g.sigma_inv[0] * ctt + 2.0 * g.sigma_inv[1] * ctp + g.sigma_inv[2] * cpp;
}

Field laplace_beltrami(const SphereGrid& grid, const SurfaceGeometry& geometry, const Field& u) {
  return laplace_beltrami(geometry, grid.derivatives(u, 2));
}

SymField flat_radial_hessian(const SurfaceGeometry& g, const Field& f1, const Field& f2) {
  const Field& G = g.dG(0, 0);
  const Field& Gt = g.dG(1, 0);
  const Field& Gp = g.dG(0, 1);
  const Field radial = f1 / G;
  const Field normal = f1 * g.cos_theta;
  SymField h;
  h[0] = f2 * Gt * Gt + radial * (g.sigma_flat[0] - Gt * Gt) - normal * g.A_flat[0];
  h[1] = f2 * Gt * Gp + radial * (g.sigma_flat[1] - Gt * Gp) - normal * g.A_flat[1];
  h[2] = f2 * Gp * Gp + radial * (g.sigma_flat[2] - Gp * Gp) - normal * g.A_flat[2];
  return h;
}

Field trace(const SymField& inv, const SymField& t) { return inv[0] * t[0] + 2.0 * inv[1] * t[1] + inv[2] * t[2]; }

// ---------------------------------------------------------------------------

const ConditionEntry& ConditionReport::at(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw Error(ErrorKind::InvalidArgument, "no condition named '" + name + "'");
}

bool ConditionReport::foliation_conditions() const {
  return at("dV_dnu").pass && at("detA0_plus_T_half_minus_ric").pass && at("detA0_minus_T_half").pass;
}

bool ConditionReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.informational || e.pass; });
}

AngleThresholdMax max_angle_threshold(const ConformalProfile& profile, double rho_from) {
  const auto& ref = profile.reference();
  const double r_from = profile.r_of_rho(std::max(rho_from, profile.rho_horizon()));
  const bool analytic = ref.kind() != ReferenceKind::Tabulated;
  const double r_to = analytic ? std::max(r_from, 1.0) * 1e8 : ref.r_max();
  const bool rn = ref.kind() == ReferenceKind::ReissnerNordstrom;
  AngleThresholdMax out{0.0, rn ? 0.0 : std::numeric_limits<double>::quiet_NaN()};
  if (analytic) out.value = 1.0 / std::sqrt(3.0);  // limit r -> infinity
  if (rn) out.variant = 1.0 / std::sqrt(3.0);
  constexpr int kSamples = 2000;
  for (int k = 0; k <= kSamples; ++k) {
    double r = r_from * std::pow(r_to / r_from, double(k) / kSamples);
    if (k == 0 && !(r > ref.r_inner())) r = std::nextafter(ref.r_inner(), r_to);
    r = std::min(r, ref.r_max());
    out.value = std::max(out.value, angle_threshold(ref, r));
    if (rn) out.variant = std::max(out.variant, angle_threshold_printed_rn(ref.mass(), ref.charge(), r));
  }
  return out;
}

ConditionReport condition_report(const StarSurface& surface, const SurfaceGeometry& g, double margin) {
  if (!g.has_curved()) throw Error(ErrorKind::InvalidArgument, "condition report needs curved geometry");
  const SphereGrid& grid = surface.grid();
  ConditionReport report;
  auto add = [&](const std::string& name, const Field& q, bool informational = false) {
    Eigen::Index idx = 0;
    const double v = q.minCoeff(&idx);
    const std::size_t k = std::size_t(idx);
    report.entries.push_back(
        {name, v, v > margin, informational, k, grid.theta(k / grid.n_phi()), grid.phi(k % grid.n_phi())});
  };
  add("dV_dnu", g.dV_dnu);
  add("detA0_plus_T_half_minus_ric", g.detA0 + 0.5 * g.T - g.ric_nu);
  add("detA0_minus_T_half", g.detA0 - 0.5 * g.T);
  add("detA0_minus_Rbar_half", g.detA0 - 0.5 * g.Rbar);
  add("minus_ric_nu", -g.ric_nu);
  const auto threshold = max_angle_threshold(surface.profile(), surface.G().minCoeff());
  add("cos_theta_minus_angle_threshold", g.cos_theta - threshold.value);
  if (std::isfinite(threshold.variant)) add("cos_theta_minus_angle_threshold_variant", g.cos_theta - threshold.variant, true);
  add("mean_curvature", g.H0, true);
  add("kappa1_flat", g.kappa1_flat, true);
  return report;
}

// ---------------------------------------------------------------------------

void write_surface_csv(const StarSurface& surface, const std::filesystem::path& path) {
  const SphereGrid& grid = surface.grid();
  CsvWriter out(path, {"theta", "phi", "G"});
  for (std::size_t i = 0; i < grid.n_theta(); ++i)
    for (std::size_t j = 0; j < grid.n_phi(); ++j) out.row({grid.theta(i), grid.phi(j), surface.G()[grid.index(i, j)]});
}

StarSurface read_surface_csv(const std::filesystem::path& path, std::shared_ptr<const ConformalProfile> profile) {
  const auto csv = read_csv(path);
  const auto it = csv.column("theta"), ip = csv.column("phi"), ig = csv.column("G");
  std::size_t n_phi = 0;
  while (n_phi < csv.rows.size() && csv.rows[n_phi][it] == csv.rows[0][it]) ++n_phi;
  if (n_phi == 0 || csv.rows.size() % n_phi != 0) throw Error(ErrorKind::Io, "surface CSV is not a tensor grid");
  auto grid = std::make_shared<const SphereGrid>(csv.rows.size() / n_phi, n_phi);
  Field G(Eigen::Index(csv.rows.size()));
  for (std::size_t i = 0; i < grid->n_theta(); ++i)
    for (std::size_t j = 0; j < n_phi; ++j) {
      const auto& row = csv.rows[grid->index(i, j)];
      if (std::abs(row[it] - grid->theta(i)) > 1e-9 || std::abs(row[ip] - grid->phi(j)) > 1e-9)
        throw Error(ErrorKind::Io, "surface CSV points are not a Gauss-Legendre grid in grid order");
      G[grid->index(i, j)] = row[ig];
    }
  return StarSurface(std::move(profile), std::move(grid), std::move(G));
}

void write_geometry_csv(const StarSurface& surface, const SurfaceGeometry& g, const std::filesystem::path& path) {
  const SphereGrid& grid = surface.grid();
  std::vector<std::string> header{"theta", "phi", "G", "cos_theta", "support", "kappa1_flat", "kappa2_flat", "H_flat"};
  const bool curved = g.has_curved(), with_k = g.has_gauss_curvature();
  if (curved)
    for (const char* name : {"r", "F", "kappa1", "kappa2", "H0", "detA0", "ric_nu", "T", "Rbar", "V", "dV_dnu", "area"})
      header.emplace_back(name);
  if (with_k) {
    header.emplace_back("K");
    header.emplace_back("gauss_residual");
  }
  CsvWriter out(path, header);
  std::vector<double> row;
  for (std::size_t i = 0; i < grid.n_theta(); ++i)
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      const std::size_t k = grid.index(i, j);
      row = {grid.theta(i), grid.phi(j), surface.G()[k], g.cos_theta[k], g.support[k], g.kappa1_flat[k],
             g.kappa2_flat[k], g.H_flat[k]};
      if (curved)
        for (const Field* f : {&g.r, &g.F, &g.kappa1, &g.kappa2, &g.H0, &g.detA0, &g.ric_nu, &g.T, &g.Rbar, &g.V,
                               &g.dV_dnu, &g.area})
          row.push_back((*f)[k]);
      if (with_k) {
        row.push_back(g.K[k]);
        row.push_back(g.gauss_residual[k]);
      }
      out.row(row);
    }
}

}  // namespace qlp
