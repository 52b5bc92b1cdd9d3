#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qlp/energy.hpp"

namespace qlpen {

using json = nlohmann::ordered_json;

/// Schema or cross-field error in a run configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReferenceSpec {
  std::string kind = "schwarzschild";  // schwarzschild | reissner_nordstrom | tabulated | flat
  double m = 1.0;
  double e = 0.0;
  std::filesystem::path table;
};

struct SurfaceSpec {
  std::string type = "round";  // round | perturbed | csv
  std::optional<double> r0;    // area radius
  std::optional<double> rho0;  // isothermal radius
  std::vector<qlp::HarmonicMode> modes;
  std::filesystem::path path;
};

struct USpec {
  bool from_inner = false;  // u0 = H0 / H from the inner block
  double value = 1.0;
  std::vector<qlp::HarmonicMode> modes;  // u0 = value (1 + sum a_k Y_k)
};

struct InnerSpec {
  std::string type = "schwarzschild_interior";
  double M = 1.0;
  double e = 0.0;
  std::filesystem::path H_csv;  // custom: columns theta,phi,H in grid order
  double horizon_area = 0.0;
};

struct ProfileSpec {
  std::vector<double> r_values;  // explicit grid; otherwise r_min:r_step:r_max
  std::optional<double> r_min, r_max;
  double r_step = 0.5;
};

struct SweepSpec {
  std::vector<double> M, m, r0;
  bool pipeline = false;
  std::size_t resolution = 8;  // n_theta of the pipeline runs
};

struct RunConfig {
  std::string name = "run";
  bool normalized = false;
  ReferenceSpec reference;
  SurfaceSpec surface;
  qlp::FlowConfig flow;
  qlp::SolverConfig solver;
  USpec u0;
  std::optional<InnerSpec> inner;
  ProfileSpec profile;
  std::optional<double> rho_min;
  std::optional<SweepSpec> sweep;
  std::filesystem::path out_dir = ".";
  std::size_t dump_every = 0;
  std::string inject_fault;  // verify only: "t_sign"
  bool scalar_residual = true;

  /// Length scale applied to lengths when `normalized` is set.
  double length_scale() const { return normalized && reference.m > 0.0 ? reference.m : 1.0; }
};

json load_json(const std::filesystem::path& path);

/// Parses one configuration. Unknown keys and type mismatches are errors.
RunConfig parse_config(const json& document);

/// The `scenarios` array, each entry merged over the top-level document, or
/// the document itself.
std::vector<RunConfig> parse_batch(const json& document);

/// "32x64" -> (32, 64).
std::pair<std::size_t, std::size_t> parse_resolution(const std::string& text);

// Builders shared by the subcommands.
qlp::ReferenceManifold build_reference(const RunConfig& config);
std::shared_ptr<const qlp::SphereGrid> build_grid(const RunConfig& config);
qlp::StarSurface build_surface(const RunConfig& config, std::shared_ptr<const qlp::ConformalProfile> profile,
                               std::shared_ptr<const qlp::SphereGrid> grid);
qlp::InnerData build_inner(const RunConfig& config, const qlp::SphereGrid& grid);
qlp::Field build_u0(const RunConfig& config, const qlp::StarSurface& surface, const qlp::SurfaceGeometry& geometry);
std::vector<double> profile_grid(const RunConfig& config, const qlp::ReferenceManifold& ref);

}  // namespace qlpen
