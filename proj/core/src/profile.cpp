#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qlp/csv.hpp"
#include "qlp/errors.hpp"
#include "qlp/refgeom.hpp"

namespace qlp {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

constexpr double kAbsTol = 1e-14;
constexpr double kRelTol = 1e-13;
// Node spacing in xi = ln(r - r_h).
constexpr double kNodeSpacing = 0.02;
// Closest approach to the horizon, relative to r_h.
constexpr double kHorizonOffset = 1e-10;
// Outer end of the table for analytic kinds, in units of the mass scale.
constexpr double kFarRadius = 1e9;

// Quintic Hermite basis on t in [0, 1] and its first derivative.
struct Hermite5 {
  double h0, h1, h2, h3, h4, h5;
};

Hermite5 hermite5(double t) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  return {1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
          t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
          0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
          10.0 * t3 - 15.0 * t4 + 6.0 * t5,
          -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
          0.5 * (t3 - 2.0 * t4 + t5)};
}

Hermite5 hermite5_prime(double t) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
  return {-30.0 * t2 + 60.0 * t3 - 30.0 * t4,
          1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
          0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
          30.0 * t2 - 60.0 * t3 + 30.0 * t4,
          -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
          0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4)};
}

}  // namespace

std::shared_ptr<const ConformalProfile> ConformalProfile::build(const ReferenceManifold& ref) {
  std::shared_ptr<ConformalProfile> p(new ConformalProfile(ref));
  const double rh = ref.r_horizon();
  const bool analytic = ref.kind() != ReferenceKind::Tabulated;
  const double scale = std::max({ref.mass(), std::abs(ref.charge()), 1.0});

  const double xi_lo = ref.has_horizon() ? std::log(kHorizonOffset * rh) : std::log(ref.r_inner());
  const double r_hi = analytic ? kFarRadius * scale : ref.r_max();
  const double xi_hi = std::log(r_hi - rh);

  // d ln(rho) / d xi = (r - r_h) / (r sqrt(phi)),  r = r_h + exp(xi)
  auto slope = [&](double xi) {
    const double dr = std::exp(xi);
    const double r = std::clamp(rh + dr, ref.r_inner(), ref.r_max());
    const auto j = ref.eval_closed(r);
    return dr / (r * std::sqrt(j.phi));
  };

  // ln(rho/r) at the outer end.
  double log_ratio_hi = 0.0;
  if (analytic) {
    // ln(rho/r)(R) = -int_0^{1/R} (1/sqrt(phi) - 1) / x dx with x = 1/r; the
    // integrand is regular at x = 0.
    const double m = ref.mass(), e2 = ref.charge() * ref.charge();
    auto tail = [&](const State&, State& dydx, double x) {
      const double phi = 1.0 - 2.0 * m * x + e2 * x * x;
      const double sp = std::sqrt(phi);
      dydx[0] = (2.0 * m - e2 * x) / (sp * (1.0 + sp));
    };
    State y{0.0};
    odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(kAbsTol, kRelTol), tail, y,
                               0.0, 1.0 / r_hi, 1e-3 / r_hi);
    log_ratio_hi = -y[0];
  }

  const auto n_nodes = static_cast<std::size_t>(std::ceil((xi_hi - xi_lo) / kNodeSpacing)) + 1;
  std::vector<double> xi(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k)
    xi[k] = xi_hi - (xi_hi - xi_lo) * double(k) / double(n_nodes - 1);  // decreasing

  std::vector<double> y_nodes;
  y_nodes.reserve(n_nodes);
  State y{std::log(r_hi) + log_ratio_hi};
  auto rhs = [&](const State&, State& dy, double x) { dy[0] = slope(x); };
  try {
    odeint::integrate_times(odeint::make_dense_output(kAbsTol, kRelTol, odeint::runge_kutta_dopri5<State>()), rhs, y,
                            xi.begin(), xi.end(), -kNodeSpacing,
                            [&](const State& s, double) { y_nodes.push_back(s[0]); });
  } catch (const std::exception& ex) {
    throw Error(ErrorKind::Tolerance, std::string("isothermal profile integration failed: ") + ex.what());
  }
  if (y_nodes.size() != n_nodes) throw Error(ErrorKind::Tolerance, "isothermal profile integration incomplete");

  // Store increasing in y. r(y) is smooth through the horizon:
  // dr/dy = r sqrt(phi),  d^2r/dy^2 = r phi + r^2 phi' / 2.
  auto push = [&](double yk, double r) {
    const auto j = ref.eval_closed(r);
    p->y_.push_back(yk);
    p->r_.push_back(r);
    p->dr_.push_back(r * std::sqrt(std::max(j.phi, 0.0)));
    p->d2r_.push_back(r * j.phi + 0.5 * r * r * j.dphi);
  };
  if (ref.has_horizon()) {
    // int_{-inf}^{xi_lo} slope = 2 slope(xi_lo) to O(exp(3 xi_lo / 2)).
    const double y_h = y_nodes.back() - 2.0 * slope(xi_lo);
    push(y_h, rh);
  }
  for (std::size_t k = n_nodes; k-- > 0;)
    push(y_nodes[k], std::clamp(rh + std::exp(xi[k]), ref.r_inner(), ref.r_max()));

  for (std::size_t k = 1; k < p->y_.size(); ++k)
    if (!(p->y_[k] > p->y_[k - 1])) throw Error(ErrorKind::Tolerance, "isothermal profile is not monotone");
  p->rho_lo_ = std::exp(p->y_.front());
  p->rho_hi_ = std::exp(p->y_.back());
  return p;
}

double ConformalProfile::r_of_rho(double rho) const {
  double y = std::log(rho);
  if (y < y_.front() && y > y_.front() - 1e-12) y = y_.front();
  if (!(y >= y_.front()) || y > y_.back())
    throw Error(ErrorKind::Domain, "rho = " + format_number(rho) + " outside the isothermal profile");
  const auto it = std::upper_bound(y_.begin(), y_.end(), y);
  const std::size_t k = it == y_.end() ? y_.size() - 2 : std::size_t(it - y_.begin()) - 1;
  const double h = y_[k + 1] - y_[k];
  const auto b = hermite5((y - y_[k]) / h);
  return b.h0 * r_[k] + h * b.h1 * dr_[k] + h * h * b.h2 * d2r_[k] + b.h3 * r_[k + 1] + h * b.h4 * dr_[k + 1] +
         h * h * b.h5 * d2r_[k + 1];
}

double ConformalProfile::rho_of_r(double r) const {
  if (!(r >= r_.front()) || r > r_.back())
    throw Error(ErrorKind::Domain, "r = " + format_number(r) + " outside the isothermal profile");
  const auto it = std::upper_bound(r_.begin(), r_.end(), r);
  const std::size_t k = it == r_.end() ? r_.size() - 2 : std::size_t(it - r_.begin()) - 1;
  const double h = y_[k + 1] - y_[k];
  // Newton on the Hermite interpolant within the bracketing interval.
  double t = (r - r_[k]) / (r_[k + 1] - r_[k]);
  for (int it_n = 0; it_n < 50; ++it_n) {
    const auto b = hermite5(t);
    const auto db = hermite5_prime(t);
    const double f = b.h0 * r_[k] + h * b.h1 * dr_[k] + h * h * b.h2 * d2r_[k] + b.h3 * r_[k + 1] +
                     h * b.h4 * dr_[k + 1] + h * h * b.h5 * d2r_[k + 1] - r;
    const double df = db.h0 * r_[k] + h * db.h1 * dr_[k] + h * h * db.h2 * d2r_[k] + db.h3 * r_[k + 1] +
                      h * db.h4 * dr_[k + 1] + h * h * db.h5 * d2r_[k + 1];
    if (df == 0.0) break;
    const double step = f / df;
    t = std::clamp(t - step, 0.0, 1.0);
    if (std::abs(step) < 1e-15) break;
  }
  return std::exp(y_[k] + t * h);
}

ConformalFactor ConformalProfile::factor(double rho) const {
  const double r = r_of_rho(rho);
  const auto j = ref_.eval_closed(r);
  const double F = std::sqrt(r / rho);
  const double w = std::sqrt(std::max(j.phi, 0.0));
  const double w_minus_one = j.phi_minus_one / (w + 1.0);
  // F' = F (w - 1) / (2 rho) and dw/drho = phi' r / (2 rho), w = sqrt(phi)
  const double dF = F * w_minus_one / (2.0 * rho);
  const double d2F = dF * w_minus_one / (2.0 * rho) + F * j.dphi * r / (4.0 * rho * rho) -
                     F * w_minus_one / (2.0 * rho * rho);
  return {rho, r, F, dF, d2F};
}

std::shared_ptr<const ConformalProfile> isothermal_profile(const ReferenceManifold& ref,
                                                           std::span<const double> r_grid) {
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > ref.r_inner()))
      throw Error(ErrorKind::Domain, "profile grid touches the horizon at r = " + format_number(r_grid[i]));
    if (r_grid[i] > ref.r_max() * (1.0 + 1e-12))
      throw Error(ErrorKind::Domain, "profile grid beyond r_max at r = " + format_number(r_grid[i]));
    if (i > 0 && !(r_grid[i] > r_grid[i - 1])) throw Error(ErrorKind::InvalidArgument, "profile grid not increasing");
  }
  return ConformalProfile::build(ref);
}

void write_profile_csv(const ConformalProfile& profile, std::span<const double> r_grid,
                       const std::filesystem::path& path) {
  CsvWriter out(path, {"r", "rho", "F"});
  for (const double r : r_grid) {
    const double rho = profile.rho_of_r(r);
    out.row({r, rho, std::sqrt(r / rho)});
  }
}

}  // namespace qlp
