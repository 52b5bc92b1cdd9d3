#include <algorithm>
#include <cmath>

#include "qlp/errors.hpp"
#include "qlp/flow.hpp"

namespace qlp {

namespace {

struct Fields {
  double c3, c4, c5;
};

// Normalized bound fields at one rho; each constant is the sup of its field.
Fields bound_fields(const ConformalProfile& profile, double rho) {
  const auto fac = profile.factor(rho);
  const auto& ref = profile.reference();
  const auto jet = ref.eval_closed(fac.r);
  const double F = fac.F, F2 = F * F, F3 = F2 * F;
  const double lam_r = -jet.dphi / fac.r;
  const double lam_t = -jet.dphi / (2.0 * fac.r) - jet.phi_minus_one / (fac.r * fac.r);
  const double rbar = std::max(0.0, lam_r + 2.0 * lam_t);

  // h = 1/F^2: h' = -2F'/F^3, h'' = -2F''/F^3 + 6F'^2/F^4
  const double h1 = -2.0 * fac.dF / F3;
  const double h2 = -2.0 * fac.d2F / F3 + 6.0 * fac.dF * fac.dF / (F2 * F2);
  // Euclidean Hessian of a radial function: eigenvalues h'' (radial), h'/rho (tangential)
  const double hess = std::max(std::abs(h2), std::abs(h1) / rho);
  return {std::abs(h1) * (F2 * rho * rho + 1.0), (2.0 * std::abs(fac.dF) / F + F2 * std::sqrt(rbar)) * (rho * rho + 1.0),
          hess * (rho * rho * rho * F2 + 1.0)};
}

}  // namespace

FlowConstants compute_constants(const ConformalProfile& profile, double rho_min) {
  const auto& ref = profile.reference();
  if (!(rho_min >= profile.rho_horizon() * (1.0 - 1e-12)))
    throw Error(ErrorKind::Domain, "rho_min must lie outside the horizon");
  const bool analytic = ref.kind() != ReferenceKind::Tabulated;
  const double scale = std::max({ref.mass(), std::abs(ref.charge()), rho_min, 1.0});
  const double rho_hi = analytic ? std::min(profile.rho_max(), 1e7 * scale) : profile.rho_max();

  FlowConstants c;
  constexpr int kSamples = 20000;
  Fields last{}, decade_before{};
  const int decade_index = int(kSamples * (1.0 - 1.0 / std::log10(rho_hi / rho_min)));
  for (int k = 0; k <= kSamples; ++k) {
    const double rho = std::min(rho_min * std::pow(rho_hi / rho_min, double(k) / kSamples), profile.rho_max());
    const auto f = bound_fields(profile, rho);
    if (f.c3 > c.C3) { c.C3 = f.c3; c.argmax_C3 = rho; }
    if (f.c4 > c.C4) { c.C4 = f.c4; c.argmax_C4 = rho; }
    if (f.c5 > c.C5) { c.C5 = f.c5; c.argmax_C5 = rho; }
    if (k == decade_index) decade_before = f;
    if (k == kSamples) last = f;
  }

  const double inf = std::numeric_limits<double>::infinity();
  if (analytic) {
    // rho -> infinity limits: F = 1 + m/(2 rho) + O(rho^-2), Rbar = 2 e^2 / r^4.
    const double m = ref.mass(), e = std::abs(ref.charge());
    if (m > c.C3) { c.C3 = m; c.argmax_C3 = inf; }
    if (m + std::sqrt(2.0) * e > c.C4) { c.C4 = m + std::sqrt(2.0) * e; c.argmax_C4 = inf; }
    if (2.0 * m > c.C5) { c.C5 = 2.0 * m; c.argmax_C5 = inf; }
  } else {
    // Tables end at a finite radius: the sup is stable if the fields have
    // settled over the last decade.
    auto settled = [](double a, double b) { return std::abs(a - b) <= 1e-3 * std::max({std::abs(a), std::abs(b), 1e-12}); };
    c.tail_stable = settled(last.c3, decade_before.c3) && settled(last.c4, decade_before.c4) &&
                    settled(last.c5, decade_before.c5);
  }

  c.max_angle = max_angle_threshold(profile, rho_min).value;
  c.max_angle_exterior = max_angle_threshold(profile, profile.rho_horizon()).value;
  c.C1 = std::sqrt(3.0) * std::max(c.C4, c.C5);
  auto c2 = [&](double g) {
    const double first = g < 1.0 ? c.C3 / std::sqrt(1.0 - g * g) : inf;
    return std::max({first, std::sqrt(3.0) * c.C4, std::sqrt(3.0) * c.C5});
  };
  c.C2 = c2(c.max_angle);
  c.C2_exterior = c2(c.max_angle_exterior);
  return c;
}

}  // namespace qlp
