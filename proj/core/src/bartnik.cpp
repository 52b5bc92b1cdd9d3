#include "qlp/bartnik.hpp"

#include <algorithm>
#include <cmath>

#include "qlp/csv.hpp"
#include "qlp/errors.hpp"

namespace qlp {

namespace {

// Largest magnitude of the explicit RK4 stability region on the negative real axis.
constexpr double kRk4Stability = 2.78;

void check_slice(const SurfaceGeometry& g, double s) {
  if (!(g.H0.minCoeff() > 0.0))
    throw Error(ErrorKind::Hypothesis, "H0 <= 0 on the slice at s = " + format_number(s));
  if (!(reaction_coefficient(g).minCoeff() > 0.0))
    throw Error(ErrorKind::Hypothesis, "detA0 + T/2 - Ric(nu, nu) <= 0 on the slice at s = " + format_number(s));
}

Field rate_with(const SphereGrid& grid, const SurfaceGeometry& g, const Field& w, bool advect) {
  const Partials dw = grid.derivatives(w, 2);
  const Field u = 1.0 + w;
  const Field lap = laplace_beltrami(g, dw);
  // u - u^3 = -u w (2 + w), so that w = 0 is an exact fixed point
  Field rate = (u.square() * lap - u * w * (2.0 + w) * reaction_coefficient(g)) / g.H0;
  if (advect) {
    const auto v = trajectory_velocity(g);
    rate -= v[0] * dw(1, 0) + v[1] * dw(0, 1);
  }
  return rate;
}

}  // namespace

Field initial_u(const Field& H_phys, const Field& H0) {
  if (H_phys.size() != H0.size()) throw Error(ErrorKind::InvalidArgument, "H and H0 sizes differ");
  if (!(H_phys.minCoeff() > 0.0)) throw Error(ErrorKind::Hypothesis, "physical mean curvature is not positive");
  if (!(H0.minCoeff() > 0.0)) throw Error(ErrorKind::Hypothesis, "reference mean curvature is not positive");
  return H0 / H_phys;
}

Field reaction_coefficient(const SurfaceGeometry& g) { return g.detA0 - g.ric_nu + 0.5 * g.T; }

Field u_rate(const SphereGrid& grid, const SurfaceGeometry& g, const Field& w) { return rate_with(grid, g, w, true); }

double stable_step(const SphereGrid& grid, const SurfaceGeometry& g, const Field& u, double stability) {
  const double L = grid.max_degree();
  // Squared radius of the slice in its narrowest direction.
  Field radius2(g.H0.size());
  for (std::size_t i = 0; i < grid.n_theta(); ++i) {
    const double s2 = grid.sin_theta(i) * grid.sin_theta(i);
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      const std::size_t k = grid.index(i, j);
      const double a = g.sigma[0][k], b = g.sigma[1][k] / grid.sin_theta(i), c = g.sigma[2][k] / s2;
      radius2[k] = 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    }
  }
  const double diffusion = (u.square() / g.H0).maxCoeff() * L * (L + 1.0) / radius2.minCoeff();
  const double reaction = (reaction_coefficient(g) * (1.0 - 3.0 * u.square()) / g.H0).abs().maxCoeff();
  const auto v = trajectory_velocity(g);
  const Field sin_t = [&] {
    Field s(g.H0.size());
    for (std::size_t i = 0; i < grid.n_theta(); ++i) s.segment(i * grid.n_phi(), grid.n_phi()).setConstant(grid.sin_theta(i));
    return s;
  }();
  const double advection = (v[0].abs() * L + v[1].abs() * sin_t * L).maxCoeff() + (v[1].abs() * grid.max_order()).maxCoeff();
  return stability * kRk4Stability / (diffusion + reaction + advection);
}

Field advance_u(const SphereGrid& grid, const SurfaceGeometry& g, const Field& u, double ds, double bound_tolerance) {
  if (!(g.H0.minCoeff() > 0.0)) throw Error(ErrorKind::Hypothesis, "H0 <= 0 on the slice");
  const Field w = u - 1.0;
  const Field k1 = rate_with(grid, g, w, false);
  const Field k2 = rate_with(grid, g, w + 0.5 * ds * k1, false);
  const Field k3 = rate_with(grid, g, w + 0.5 * ds * k2, false);
  const Field k4 = rate_with(grid, g, w + ds * k3, false);
  const Field next = u + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const double lo = std::min(1.0, u.minCoeff()), hi = std::max(1.0, u.maxCoeff());
  if (next.minCoeff() < lo - bound_tolerance || next.maxCoeff() > hi + bound_tolerance)
    throw Error(ErrorKind::StepRejected, "maximum principle bounds violated; reduce ds");
  return next;
}

UField solve_u(const Foliation& fol, const Field& u0, const SolverConfig& config) {
  const SphereGrid& grid = *fol.grid();
  if (std::size_t(u0.size()) != grid.size()) throw Error(ErrorKind::InvalidArgument, "u0 does not match the grid");
  if (!(u0.minCoeff() > 0.0) || !u0.isFinite().all()) throw Error(ErrorKind::InvalidArgument, "u0 must be positive");
  if (fol.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty foliation");

  UField out;
  out.lower_bound = std::min(1.0, u0.minCoeff());
  out.upper_bound = std::max(1.0, u0.maxCoeff());
  auto store = [&](double s, const Field& w) {
    const Field u = 1.0 + w;
    const double dev = w.abs().maxCoeff();
    out.s.push_back(s);
    out.u.push_back(u);
    out.max_u_minus_1.push_back(dev);
    out.min_u.push_back(u.minCoeff());
    out.max_u.push_back(u.maxCoeff());
    out.decay.push_back(s * dev);
  };

  auto geometry_of = [&](const Field& G) { return surface_geometry(fol.surface(0).with_G(G), false); };
  auto flow_rate = [&](const SurfaceGeometry& g) { return graph_speed(g); };

  Field w = u0 - 1.0;
  store(fol.s(0), w);
  for (std::size_t k = 0; k + 1 < fol.size(); ++k) {
    Field G = fol.G(k);
    double s = fol.s(k);
    const double target = fol.s(k + 1);
    SurfaceGeometry geom = geometry_of(G);
    check_slice(geom, s);
    while (s < target) {
      double h = std::min(target - s, stable_step(grid, geom, 1.0 + w, config.stability));
      for (int attempt = 0;; ++attempt) {
        const Field kG1 = flow_rate(geom), kw1 = u_rate(grid, geom, w);
        const Field G2 = G + 0.5 * h * kG1, w2 = w + 0.5 * h * kw1;
        const auto g2 = geometry_of(G2);
        const Field kG2 = flow_rate(g2), kw2 = u_rate(grid, g2, w2);
        const Field G3 = G + 0.5 * h * kG2, w3 = w + 0.5 * h * kw2;
        const auto g3 = geometry_of(G3);
        const Field kG3 = flow_rate(g3), kw3 = u_rate(grid, g3, w3);
        const Field G4 = G + h * kG3, w4 = w + h * kw3;
        const auto g4 = geometry_of(G4);
        const Field kG4 = flow_rate(g4), kw4 = u_rate(grid, g4, w4);
        Field G_new = G + (h / 6.0) * (kG1 + 2.0 * kG2 + 2.0 * kG3 + kG4);
        Field w_new = w + (h / 6.0) * (kw1 + 2.0 * kw2 + 2.0 * kw3 + kw4);
        if (config.filter) {
          G_new = grid.project(G_new);
          w_new = grid.project(w_new);
        }
        const double u_min = 1.0 + w_new.minCoeff(), u_max = 1.0 + w_new.maxCoeff();
        const double excess = std::max(out.lower_bound - u_min, u_max - out.upper_bound);
        if (excess > config.bound_tolerance || !(u_min > 0.0) || !w_new.isFinite().all()) {
          ++out.rejected_steps;
          if (attempt >= config.max_halvings)
            throw Error(ErrorKind::StepRejected, "maximum principle step control failed at s = " + format_number(s));
          h *= 0.5;
          continue;
        }
        out.worst_bound_excess = std::max(out.worst_bound_excess, excess);
        ++out.accepted_steps;
        G = std::move(G_new);
        w = std::move(w_new);
        break;
      }
      s = (target - s - h <= 1e-12 * std::max(1.0, std::abs(target))) ? target : s + h;
      if (s < target) geom = geometry_of(G);
    }
    out.flow_mismatch = std::max(out.flow_mismatch, (G - fol.G(k + 1)).abs().maxCoeff());
    store(target, w);
  }
  check_slice(geometry_of(fol.G(fol.size() - 1)), fol.s(fol.size() - 1));

  // s max|u - 1| over the second half of the run should settle.
  const std::size_t n = out.decay.size();
  out.decay_constant = out.decay.back();
  if (n >= 4) {
    double lo = out.decay[n / 2], hi = out.decay[n / 2];
    for (std::size_t i = n / 2; i < n; ++i) {
      lo = std::min(lo, out.decay[i]);
      hi = std::max(hi, out.decay[i]);
    }
    out.decay_bounded = hi < 1e-12 || hi - lo <= 0.25 * hi;
  }
  return out;
}

double ScalarResidual::max() const {
  double m = 0.0;
  for (const double v : max_abs) m = std::max(m, v);
  return m;
}

ScalarResidual scalar_residual(const Foliation& fol, const UField& uf, bool include_T) {
  if (fol.size() < 3 || uf.u.size() != fol.size())
    throw Error(ErrorKind::InvalidArgument, "scalar residual needs at least 3 slices with u on each");
  const SphereGrid& grid = *fol.grid();
  ScalarResidual out;
  SurfaceGeometry g = fol.geometry(1, true);
  for (std::size_t k = 1; k + 1 < fol.size(); ++k) {
    if (k > 1) g = fol.geometry(k, true);
    const auto wts = three_point_weights(fol.s(k - 1), fol.s(k), fol.s(k + 1));
    const auto v = trajectory_velocity(g);
    const Field& u = uf.u[k];
    const Field w = u - 1.0;
    const Partials dw = grid.derivatives(w, 2);
    // du/ds along trajectories
    const Field du = wts.c0 * (uf.u[k - 1] - 1.0) + wts.c1 * w + wts.c2 * (uf.u[k + 1] - 1.0) + v[0] * dw(1, 0) +
                     v[1] * dw(0, 1);
    // first variation of H0 under the unit normal flow
    const Field dH0 = -g.normA0_sq - g.ric_nu;
    const Field H = g.H0 / u;
    const Field dH = dH0 / u - g.H0 * du / u.square();
    const Field lap = laplace_beltrami(g, dw);
    const Field R = 2.0 * g.K - 2.0 * dH / u - 2.0 * lap / u - H.square() - g.normA0_sq / u.square();
    Field target = g.Rbar;
    if (include_T) target += (1.0 / u.square() - 1.0) * g.T;
    Field res = R - target;
    out.slices.push_back(k);
    out.s.push_back(fol.s(k));
    out.max_abs.push_back(res.abs().maxCoeff());
    out.residual.push_back(std::move(res));
  }
  return out;
}

void write_u_csv(const UField& u, const ScalarResidual* residual, const std::filesystem::path& path) {
  CsvWriter out(path, {"s", "max_u_minus_1", "min_u", "max_residual"});
  std::size_t r = 0;
  for (std::size_t k = 0; k < u.s.size(); ++k) {
    std::string res;
    if (residual && r < residual->slices.size() && residual->slices[r] == k) res = format_number(residual->max_abs[r++]);
    out.row_text({format_number(u.s[k]), format_number(u.max_u_minus_1[k]), format_number(u.min_u[k]), res});
  }
}

}  // namespace qlp
