#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qlp/csv.hpp"
#include "qlp/errors.hpp"

namespace qlpen {

namespace {

// Reads typed members of a JSON object and rejects members it was never asked about.
class Block {
 public:
  Block(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  ~Block() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }
  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    T v{};
    get(key, v);
    out = v;
  }
  void positive(const std::string& key, double& out) {
    get(key, out);
    if (!(out > 0.0)) throw ConfigError(where_ + "." + key + " must be positive");
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::vector<qlp::HarmonicMode> parse_modes(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of modes");
  std::vector<qlp::HarmonicMode> modes;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Block b(j[i], where + "[" + std::to_string(i) + "]");
    qlp::HarmonicMode mode;
    b.get("l", mode.l);
    b.get("m", mode.m);
    b.get("amplitude", mode.amplitude);
    if (mode.l < 0 || std::abs(mode.m) > mode.l) throw ConfigError(b.where() + ": need 0 <= |m| <= l");
    modes.push_back(mode);
  }
  return modes;
}

void parse_resolution_into(const std::string& text, qlp::FlowConfig& flow) {
  const auto [nt, np] = parse_resolution(text);
  flow.n_theta = nt;
  flow.n_phi = np;
}

}  // namespace

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw qlp::Error(qlp::ErrorKind::Io, "cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::pair<std::size_t, std::size_t> parse_resolution(const std::string& text) {
  const auto x = text.find('x');
  std::size_t nt = 0, np = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument("no x");
    std::size_t used = 0;
    nt = std::stoul(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("junk");
    np = std::stoul(text.substr(x + 1), &used);
    if (used != text.size() - x - 1) throw std::invalid_argument("junk");
  } catch (const std::exception&) {
    throw ConfigError("resolution must look like NxM, got '" + text + "'");
  }
  if (nt < 4 || np < 8) throw ConfigError("resolution too small: " + text);
  return {nt, np};
}

RunConfig parse_config(const json& doc) {
  RunConfig c;
  Block top(doc, "config");
  top.get("name", c.name);
  top.get("normalized", c.normalized);
  top.get("inject_fault", c.inject_fault);
  if (!c.inject_fault.empty() && c.inject_fault != "t_sign")
    throw ConfigError("config.inject_fault: only 't_sign' is supported");
  top.has("scenarios");

  if (top.has("reference")) {
    Block b(top.raw("reference"), "reference");
    b.get("kind", c.reference.kind);
    b.get("m", c.reference.m);
    b.get("e", c.reference.e);
    std::string table;
    b.get("table", table);
    c.reference.table = table;
  }
  if (top.has("surface")) {
    Block b(top.raw("surface"), "surface");
    b.get("type", c.surface.type);
    b.get("r0", c.surface.r0);
    b.get("rho0", c.surface.rho0);
    if (b.has("modes")) c.surface.modes = parse_modes(b.raw("modes"), "surface.modes");
    std::string path;
    b.get("path", path);
    c.surface.path = path;
    if (c.surface.type != "round" && c.surface.type != "perturbed" && c.surface.type != "csv")
      throw ConfigError("surface.type must be round, perturbed or csv");
    if (c.surface.type == "csv" && c.surface.path.empty()) throw ConfigError("surface.path is required for csv");
  }
  if (top.has("flow")) {
    Block b(top.raw("flow"), "flow");
    b.positive("ds", c.flow.ds);
    b.get("s_max", c.flow.s_max);
    b.positive("tolerance", c.flow.tolerance);
    b.get("margin", c.flow.margin);
    b.get("keep_every", c.flow.keep_every);
    b.get("abort_on_condition_failure", c.flow.abort_on_condition_failure);
    b.get("filter", c.flow.filter);
    std::string res;
    b.get("resolution", res);
    if (!res.empty()) parse_resolution_into(res, c.flow);
    if (!(c.flow.s_max >= 0.0)) throw ConfigError("flow.s_max must be nonnegative");
    if (c.flow.keep_every == 0) throw ConfigError("flow.keep_every must be positive");
  }
  if (top.has("solver")) {
    Block b(top.raw("solver"), "solver");
    b.positive("stability", c.solver.stability);
    b.positive("bound_tolerance", c.solver.bound_tolerance);
    b.get("max_halvings", c.solver.max_halvings);
    b.get("scalar_residual", c.scalar_residual);
    if (b.has("u0")) {
      const json& u = b.raw("u0");
      if (u.is_number()) {
        c.u0.value = u.get<double>();
      } else if (u.is_string()) {
        if (u.get<std::string>() != "inner") throw ConfigError("solver.u0: string form must be \"inner\"");
        c.u0.from_inner = true;
      } else {
        Block ub(u, "solver.u0");
        ub.get("value", c.u0.value);
        if (ub.has("modes")) c.u0.modes = parse_modes(ub.raw("modes"), "solver.u0.modes");
      }
      if (!c.u0.from_inner && !(c.u0.value > 0.0)) throw ConfigError("solver.u0 must be positive");
    }
  }
  if (top.has("inner")) {
    Block b(top.raw("inner"), "inner");
    InnerSpec in;
    b.get("type", in.type);
    b.get("M", in.M);
    b.get("e", in.e);
    std::string path;
    b.get("H_csv", path);
    in.H_csv = path;
    b.get("horizon_area", in.horizon_area);
    try {
      qlp::inner_kind_from_string(in.type);
    } catch (const qlp::Error& e) {
      throw ConfigError(std::string("inner.type: ") + e.what());
    }
    if (in.type == "custom" && in.H_csv.empty()) throw ConfigError("inner.H_csv is required for custom inner data");
    if (!(in.horizon_area >= 0.0)) throw ConfigError("inner.horizon_area must be nonnegative");
    c.inner = in;
  }
  if (top.has("profile")) {
    Block b(top.raw("profile"), "profile");
    b.get("r_values", c.profile.r_values);
    b.get("r_min", c.profile.r_min);
    b.get("r_max", c.profile.r_max);
    b.positive("r_step", c.profile.r_step);
  }
  if (top.has("constants")) {
    Block b(top.raw("constants"), "constants");
    b.get("rho_min", c.rho_min);
  }
  if (top.has("sweep")) {
    Block b(top.raw("sweep"), "sweep");
    SweepSpec s;
    b.get("M", s.M);
    b.get("m", s.m);
    b.get("r0", s.r0);
    b.get("pipeline", s.pipeline);
    b.get("resolution", s.resolution);
    if (s.M.empty() || s.m.empty() || s.r0.empty()) throw ConfigError("sweep needs nonempty M, m and r0 lists");
    c.sweep = s;
  }
  if (top.has("outputs")) {
    Block b(top.raw("outputs"), "outputs");
    std::string dir;
    b.get("directory", dir);
    if (!dir.empty()) c.out_dir = dir;
    b.get("dump_every", c.dump_every);
  }

  const double L = c.length_scale();
  if (L != 1.0) {
    if (c.surface.r0) *c.surface.r0 *= L;
    if (c.surface.rho0) *c.surface.rho0 *= L;
    c.flow.ds *= L;
    c.flow.s_max *= L;
    if (c.rho_min) *c.rho_min *= L;
    for (double& r : c.profile.r_values) r *= L;
    if (c.profile.r_min) *c.profile.r_min *= L;
    if (c.profile.r_max) *c.profile.r_max *= L;
    c.profile.r_step *= L;
    if (c.inner) {
      c.inner->M *= L;
      c.inner->e *= L;
      c.inner->horizon_area *= L * L;
    }
  }
  return c;
}

std::vector<RunConfig> parse_batch(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected an object");
  if (!doc.contains("scenarios")) return {parse_config(doc)};
  const json& list = doc.at("scenarios");
  if (!list.is_array() || list.empty()) throw ConfigError("config.scenarios must be a nonempty array");
  json base = doc;
  base.erase("scenarios");
  std::vector<RunConfig> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    json merged = base;
    merged.merge_patch(list[i]);
    RunConfig c = parse_config(merged);
    if (!list[i].contains("name")) c.name = c.name + "_" + std::to_string(i);
    out.push_back(std::move(c));
  }
  std::set<std::string> names;
  for (const auto& c : out)
    if (!names.insert(c.name).second) throw ConfigError("duplicate scenario name '" + c.name + "'");
  return out;
}

// ---------------------------------------------------------------------------

qlp::ReferenceManifold build_reference(const RunConfig& c) {
  const auto& r = c.reference;
  if (r.kind == "flat") return qlp::make_flat_reference();
  const auto kind = qlp::reference_kind_from_string(r.kind);
  if (kind == qlp::ReferenceKind::Tabulated) {
    if (r.table.empty()) throw ConfigError("reference.table is required for tabulated references");
    return qlp::make_reference(kind, r.m, 0.0, qlp::read_reference_csv(r.table));
  }
  if (kind == qlp::ReferenceKind::Schwarzschild && r.e != 0.0)
    throw ConfigError("reference.e must be 0 for schwarzschild");
  return qlp::make_reference(kind, r.m, r.e);
}

std::shared_ptr<const qlp::SphereGrid> build_grid(const RunConfig& c) {
  return std::make_shared<const qlp::SphereGrid>(c.flow.n_theta, c.flow.n_phi);
}

qlp::StarSurface build_surface(const RunConfig& c, std::shared_ptr<const qlp::ConformalProfile> profile,
                               std::shared_ptr<const qlp::SphereGrid> grid) {
  const auto& s = c.surface;
  if (s.type == "csv") {
    auto surface = qlp::read_surface_csv(s.path, profile);
    if (surface.grid().n_theta() != grid->n_theta() || surface.grid().n_phi() != grid->n_phi())
      throw ConfigError("surface csv grid does not match flow.resolution");
    return surface;
  }
  double rho0 = 0.0;
  if (s.rho0 && s.r0) throw ConfigError("surface: give r0 or rho0, not both");
  if (s.rho0) {
    rho0 = *s.rho0;
  } else {
    const double r0 = s.r0.value_or(4.0 * c.length_scale());
    if (!(r0 > profile->reference().r_inner())) throw ConfigError("surface.r0 must lie outside the horizon");
    rho0 = profile->rho_of_r(r0);
  }
  if (!(rho0 > profile->rho_horizon())) throw ConfigError("surface radius must lie outside the horizon");
  if (s.type == "round") {
    return qlp::StarSurface::round(profile, grid, rho0);
  }
  return qlp::perturbed_sphere(profile, grid, rho0, s.modes);
}

qlp::InnerData build_inner(const RunConfig& c, const qlp::SphereGrid& grid) {
  if (!c.inner) throw ConfigError("an inner block is required");
  qlp::InnerData d;
  d.kind = qlp::inner_kind_from_string(c.inner->type);
  d.M = c.inner->M;
  d.e = c.inner->e;
  if (d.kind == qlp::InnerKind::SchwarzschildInterior && d.e != 0.0)
    throw ConfigError("inner.e must be 0 for schwarzschild_interior");
  if (d.kind == qlp::InnerKind::Custom) {
    const auto table = qlp::read_csv(c.inner->H_csv);
    const auto ih = table.column("H");
    if (table.rows.size() != grid.size()) throw ConfigError("inner.H_csv does not match the grid");
    d.H.resize(Eigen::Index(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) d.H[Eigen::Index(i)] = table.rows[i][ih];
    d.horizon_area = c.inner->horizon_area;
  }
  return d;
}

qlp::Field build_u0(const RunConfig& c, const qlp::StarSurface& surface, const qlp::SurfaceGeometry& geometry) {
  const auto& grid = surface.grid();
  if (c.u0.from_inner) {
    const auto inner = build_inner(c, grid);
    return qlp::initial_u(inner.boundary_mean_curvature(geometry.r.mean(), grid.size()), geometry.H0);
  }
  qlp::Field u = qlp::Field::Constant(Eigen::Index(grid.size()), c.u0.value);
  for (std::size_t i = 0; i < grid.n_theta(); ++i)
    for (std::size_t j = 0; j < grid.n_phi(); ++j) {
      double bump = 1.0;
      for (const auto& m : c.u0.modes) bump += m.amplitude * qlp::peak_harmonic(m.l, m.m, grid.theta(i), grid.phi(j));
      u[Eigen::Index(grid.index(i, j))] *= bump;
    }
  if (!(u.minCoeff() > 0.0)) throw ConfigError("solver.u0 is not positive everywhere");
  return u;
}

std::vector<double> profile_grid(const RunConfig& c, const qlp::ReferenceManifold& ref) {
  if (!c.profile.r_values.empty()) return c.profile.r_values;
  const double scale = std::max(ref.mass(), 1.0);
  const double step = c.profile.r_step;
  const double lo = c.profile.r_min.value_or(step * std::ceil(1.25 * ref.r_inner() / step));
  const double hi = c.profile.r_max.value_or(std::min(100.0 * scale, ref.r_max()));
  std::vector<double> r;
  for (std::size_t k = 0;; ++k) {
    const double x = lo + double(k) * step;
    if (x > hi * (1.0 + 1e-12)) break;
    r.push_back(std::min(x, ref.r_max()));
  }
  if (r.empty()) throw ConfigError("profile grid is empty");
  return r;
}

}  // namespace qlpen
