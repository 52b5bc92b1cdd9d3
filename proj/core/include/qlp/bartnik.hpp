#pragma once

// The parabolic equation
//   H0 du/ds = u^2 Lap u + (u - u^3)(detA0 - Ric(nu, nu) + T/2)
// along a unit normal foliation, whose solution makes u^2 ds^2 + sigma_s have
// scalar curvature Rbar + (1/u^2 - 1) T.

#include <cstddef>
#include <filesystem>
#include <vector>

#include "qlp/flow.hpp"

namespace qlp {

struct SolverConfig {
  double stability = 0.5;      // fraction of the explicit RK4 stability limit
  double bound_tolerance = 1e-9;
  int max_halvings = 30;
  bool filter = true;
};

struct UField {
  std::vector<double> s;
  std::vector<Field> u;  // one per foliation slice
  double lower_bound = 1.0;  // min(1, min u0)
  double upper_bound = 1.0;  // max(1, max u0)

  std::vector<double> max_u_minus_1, min_u, max_u;
  std::vector<double> decay;  // s * max|u - 1|
  bool decay_bounded = true;
  double decay_constant = 0.0;

  bool bounds_held = true;             // every accepted step satisfied the bounds
  double worst_bound_excess = 0.0;     // largest excursion beyond the bounds (<= tolerance)
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double flow_mismatch = 0.0;  // max |G co-integrated - G stored| at slice boundaries
};

/// u0 = H0 / H, so that the slice mean curvature H0/u of u^2 ds^2 + sigma
/// equals the physical H on the boundary. Throws Hypothesis unless both are
/// positive everywhere.
Field initial_u(const Field& H_phys, const Field& H0);

/// c = detA0 - Ric(nu, nu) + T/2.
Field reaction_coefficient(const SurfaceGeometry& geometry);

/// Right-hand side of the equation along trajectories, du/ds, for w = u - 1.
Field u_rate(const SphereGrid& grid, const SurfaceGeometry& geometry, const Field& w);

/// Largest stable explicit step for the current slice and solution.
double stable_step(const SphereGrid& grid, const SurfaceGeometry& geometry, const Field& u, double stability = 0.5);

/// One RK4 step on a frozen slice geometry. Throws StepRejected if the result
/// leaves [min(1, min u), max(1, max u)].
Field advance_u(const SphereGrid& grid, const SurfaceGeometry& geometry, const Field& u, double ds,
                double bound_tolerance = 1e-9);

/// Integrates u along the foliation, co-evolving the slice with the flow
/// between stored slices. Requires detA0 + T/2 - Ric(nu, nu) > 0 and H0 > 0
/// on every slice.
UField solve_u(const Foliation& foliation, const Field& u0, const SolverConfig& config = {});

struct ScalarResidual {
  std::vector<std::size_t> slices;  // interior slice indices
  std::vector<double> s;
  std::vector<double> max_abs;
  std::vector<Field> residual;
  double max() const;
};

/// R(u^2 ds^2 + sigma_s) - [Rbar + (1/u^2 - 1) T] on interior slices, with the
/// slice-normal derivative of the mean curvature by centered differences along
/// trajectories. `include_T = false` drops the T term from the target.
ScalarResidual scalar_residual(const Foliation& foliation, const UField& u, bool include_T = true);

/// CSV `s,max_u_minus_1,min_u,max_residual` (the residual column is empty where
/// not computed).
void write_u_csv(const UField& u, const ScalarResidual* residual, const std::filesystem::path& path);

}  // namespace qlp
