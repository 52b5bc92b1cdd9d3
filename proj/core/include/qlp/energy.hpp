#pragma once

// Quasi-local energy E(s) = (1/8 pi) \int V (H0 - H0/u) dsigma along a solved
// foliation, its exact rate, the s -> infinity limit and the Penrose verdict.

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qlp/bartnik.hpp"
#include "qlp/oracle.hpp"

namespace qlp {

/// (1/8 pi) \int V H0 (1 - 1/u) dsigma. Throws InvalidArgument if u <= 0.
double quasilocal_energy(const SurfaceGeometry& geometry, const Field& u);

/// -(1/8 pi) \int (1/u)(u - 1)^2 [H0 dV/dnu + V (detA0 - T/2)] dsigma.
double energy_rate_formula(const SurfaceGeometry& geometry, const Field& u);

struct EnergyTrace {
  std::vector<double> s, E;
  std::vector<double> dEds_numeric;  // NaN at the two ends
  std::vector<double> dEds_formula;

  double max_discrepancy = 0.0;      // max |numeric - formula| over interior slices
  double max_rate = -std::numeric_limits<double>::infinity();  // max dE/ds (formula)
  double max_increase = 0.0;         // max (E_{k+1} - E_k), 0 if never increasing
  bool nonincreasing(double tolerance = 1e-8) const { return max_increase <= tolerance; }
};

EnergyTrace monotonicity_check(const Foliation& foliation, const UField& u);

struct AdmFit {
  double E_inf = 0.0;
  double a = 0.0, b = 0.0;  // E(s) ~ E_inf + a/s + b/s^2
  double rms_residual = 0.0;
  std::size_t samples = 0;
};

/// Least-squares fit of E_inf + a/s + b/s^2 over the last third of the trace.
/// Throws Tolerance with fewer than 10 samples or if the relative fit residual
/// exceeds `max_residual`.
AdmFit adm_extrapolate(const EnergyTrace& trace, double max_residual = 1e-6);

/// CSV `s,E,dEds_numeric,dEds_formula`.
void write_energy_csv(const EnergyTrace& trace, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Scenarios

enum class InnerKind { SchwarzschildInterior, ReissnerNordstromInterior, Custom };

std::string to_string(InnerKind kind);
InnerKind inner_kind_from_string(const std::string& name);

/// The inner manifold bounded by the surface. The closed-form kinds apply to
/// round boundaries only; custom data supplies H on the grid and the declared
/// horizon area.
struct InnerData {
  InnerKind kind = InnerKind::SchwarzschildInterior;
  double M = 0.0;
  double e = 0.0;
  Field H;                    // custom only
  double horizon_area = 0.0;  // custom only

  /// sqrt(A_h / 16 pi).
  double horizon_mass() const;
  /// Mean curvature of the boundary (area radius r0) in the inner data.
  Field boundary_mean_curvature(double r0, std::size_t points) const;
};

struct Scenario {
  std::string name;
  StarSurface boundary;
  InnerData inner;
  FlowConfig flow;
  SolverConfig solver;
  bool run_on_hypothesis_failure = true;
  bool scalar_residual = true;
};

struct HypothesisCheck {
  std::string name;
  double value;
  double threshold;
  bool pass;
  bool informational;
};

struct PenroseReport {
  std::string scenario;
  std::vector<HypothesisCheck> hypotheses;
  ConditionReport boundary_conditions;
  bool hypotheses_met = false;
  std::string failure;  // first failing hypothesis or pipeline error

  bool pipeline_ran = false;
  double E0 = std::numeric_limits<double>::quiet_NaN();
  double E_inf = std::numeric_limits<double>::quiet_NaN();
  double E_inf_fit_residual = std::numeric_limits<double>::quiet_NaN();
  double rhs = std::numeric_limits<double>::quiet_NaN();
  double margin = std::numeric_limits<double>::quiet_NaN();
  double monotonicity_margin = std::numeric_limits<double>::quiet_NaN();  // max dE/ds
  double monotonicity_discrepancy = std::numeric_limits<double>::quiet_NaN();
  double max_energy_increase = std::numeric_limits<double>::quiet_NaN();
  double scalar_residual = std::numeric_limits<double>::quiet_NaN();
  double gauss_residual = 0.0;
  double u_bound_excess = 0.0;
  bool decay_bounded = true;
  std::optional<oracle::ClosedFormScenario> closed_form;

  EnergyTrace trace;
  std::vector<double> u_s, max_u_minus_1, min_u;

  /// E(0) >= sqrt(A_h/16 pi) - m within `tolerance`.
  bool inequality_holds(double tolerance = 1e-10) const { return pipeline_ran && margin >= -tolerance; }
};

PenroseReport penrose_report(const Scenario& scenario);

}  // namespace qlp
