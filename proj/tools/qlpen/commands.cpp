#include "commands.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "qlp/csv.hpp"
#include "qlp/errors.hpp"

namespace qlpen {

using namespace qlp;

// ---------------------------------------------------------------------------
// Helpers

std::vector<RunConfig> load_configs(const Options& o, bool allow_default) {
  std::vector<RunConfig> configs;
  if (o.config.empty()) {
    if (!allow_default) throw ConfigError("--config is required for this command");
    configs.push_back(parse_config(json::object()));
  } else {
    configs = parse_batch(load_json(o.config));
    // Input files are looked up next to the configuration.
    const auto base = o.config.parent_path();
    auto anchor = [&](std::filesystem::path& p) {
      if (!p.empty() && p.is_relative()) p = base / p;
    };
    for (auto& c : configs) {
      anchor(c.reference.table);
      anchor(c.surface.path);
      if (c.inner) anchor(c.inner->H_csv);
    }
  }
  if (!o.inject_fault.empty() && o.inject_fault != "t_sign")
    throw ConfigError("--inject-fault: only 't_sign' is supported");
  for (auto& c : configs) {
    if (!o.out.empty()) c.out_dir = o.out;
    if (!o.inject_fault.empty()) c.inject_fault = o.inject_fault;
    if (!o.resolution.empty()) {
      const auto [nt, np] = parse_resolution(o.resolution);
      c.flow.n_theta = nt;
      c.flow.n_phi = np;
    }
  }
  return configs;
}

void write_json(const json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void say(const Options& o, const std::string& line) {
  if (!o.quiet) std::cout << line << '\n';
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

std::filesystem::path out_path(const RunConfig& c, const std::string& file) {
  std::filesystem::create_directories(c.out_dir);
  return c.out_dir / file;
}

struct Setup {
  std::shared_ptr<const ConformalProfile> profile;
  std::shared_ptr<const SphereGrid> grid;
  StarSurface surface;
};

Setup setup(const RunConfig& c) {
  auto profile = ConformalProfile::build(build_reference(c));
  auto grid = build_grid(c);
  auto surface = build_surface(c, profile, grid);
  return {profile, grid, std::move(surface)};
}

json conditions_json(const ConditionReport& report) {
  json out = json::array();
  for (const auto& e : report.entries)
    out.push_back({{"name", e.name},
                   {"min", number(e.min_value)},
                   {"pass", e.pass},
                   {"informational", e.informational},
                   {"theta", e.theta},
                   {"phi", e.phi}});
  return out;
}

// Per-monitor minima over all slices.
json run_conditions_json(const Foliation& fol, bool& all_ok) {
  std::map<std::string, std::pair<double, bool>> worst;
  std::vector<std::string> order;
  all_ok = true;
  for (std::size_t k = 0; k < fol.size(); ++k) {
    const auto& rep = fol.diagnostics(k).conditions;
    for (const auto& e : rep.entries) {
      auto [it, fresh] = worst.try_emplace(e.name, e.min_value, e.informational);
      if (fresh) order.push_back(e.name);
      it->second.first = std::min(it->second.first, e.min_value);
    }
    if (!rep.all_pass()) all_ok = false;
  }
  json out = json::object();
  for (const auto& name : order) out[name] = number(worst[name].first);
  return out;
}

json evolution_json(const Foliation& fol) {
  if (fol.size() < 3) return nullptr;
  const auto ev = evolution_diagnostics(fol);
  return {{"slices_checked", ev.slices_checked},
          {"rho_law", number(ev.rho_law)},
          {"flat_mean_curvature_law", number(ev.flat_mean_curvature_law)},
          {"flat_gauss_curvature_law", number(ev.flat_gauss_curvature_law)},
          {"curved_mean_curvature_law", number(ev.curved_mean_curvature_law)},
          {"scalar_curvature_reconstruction", number(ev.scalar_curvature_reconstruction)},
          {"cos_theta_margin", number(ev.cos_theta_margin)},
          {"kappa_rho2_margin", number(ev.kappa_rho2_margin)},
          {"kappa_rho2_margin_weak", number(ev.kappa_rho2_margin_weak)}};
}

void dump_surfaces(const RunConfig& c, const Foliation& fol) {
  if (c.dump_every == 0) return;
  for (std::size_t k = 0; k < fol.size(); k += c.dump_every)
    write_surface_csv(fol.surface(k), out_path(c, "surface_" + std::to_string(k) + ".csv"));
}

void dump_u(const RunConfig& c, const SphereGrid& grid, const UField& u) {
  if (c.dump_every == 0) return;
  for (std::size_t k = 0; k < u.u.size(); k += c.dump_every) {
    CsvWriter out(out_path(c, "u_" + std::to_string(k) + ".csv"), {"theta", "phi", "u"});
    for (std::size_t i = 0; i < grid.n_theta(); ++i)
      for (std::size_t j = 0; j < grid.n_phi(); ++j)
        out.row({grid.theta(i), grid.phi(j), u.u[k][Eigen::Index(grid.index(i, j))]});
  }
}

json flow_summary(const RunConfig& c, const Foliation& fol, bool& ok) {
  bool conditions_ok = true;
  json j = {{"name", c.name},
            {"slices", fol.size()},
            {"s_final", fol.s(fol.size() - 1)},
            {"halted", fol.halted()},
            {"halt_reason", fol.halt_reason()}};
  j["condition_minima"] = run_conditions_json(fol, conditions_ok);
  j["conditions_ok"] = conditions_ok;
  j["final"] = {{"min_rho", fol.diagnostics(fol.size() - 1).min_rho},
                {"max_rho", fol.diagnostics(fol.size() - 1).max_rho},
                {"roundness", fol.diagnostics(fol.size() - 1).roundness}};
  j["evolution"] = evolution_json(fol);
  ok = conditions_ok && !fol.halted();
  return j;
}

json report_json(const PenroseReport& r) {
  json checks = json::array();
  for (const auto& h : r.hypotheses)
    checks.push_back({{"name", h.name},
                      {"value", number(h.value)},
                      {"threshold", number(h.threshold)},
                      {"pass", h.pass},
                      {"informational", h.informational}});
  json j = {{"scenario", r.scenario},
            {"hypotheses",
             {{"met", r.hypotheses_met},
              {"failure", r.failure},
              {"checks", checks},
              {"boundary_conditions", conditions_json(r.boundary_conditions)}}},
            {"E0", number(r.E0)},
            {"E_inf", number(r.E_inf)},
            {"E_inf_fit_residual", number(r.E_inf_fit_residual)},
            {"rhs", number(r.rhs)},
            {"margin", number(r.margin)},
            {"monotonicity_margin", number(r.monotonicity_margin)},
            {"holds", r.inequality_holds()},
            {"residuals",
             {{"monotonicity_identity", number(r.monotonicity_discrepancy)},
              {"max_energy_increase", number(r.max_energy_increase)},
              {"scalar_curvature", number(r.scalar_residual)},
              {"gauss", number(r.gauss_residual)},
              {"u_bound_excess", number(r.u_bound_excess)}}},
            {"decay_bounded", r.decay_bounded}};
  if (r.closed_form)
    j["closed_form"] = {{"LHS", r.closed_form->lhs}, {"RHS", r.closed_form->rhs}, {"margin", r.closed_form->margin()}};
  else
    j["closed_form"] = nullptr;
  return j;
}

int report_exit(const PenroseReport& r) {
  if (!r.hypotheses_met) return kHypotheses;
  if (!r.pipeline_ran) return kViolated;
  return r.inequality_holds() ? kOk : kViolated;
}

Scenario make_scenario(const RunConfig& c) {
  auto s = setup(c);
  Scenario sc{c.name, s.surface, build_inner(c, *s.grid), c.flow, c.solver};
  sc.scalar_residual = c.scalar_residual;
  return sc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Subcommands

int cmd_profile(const Options& o) {
  const auto configs = load_configs(o, false);
  for (const auto& c : configs) {
    const auto profile = ConformalProfile::build(build_reference(c));
    const auto grid = profile_grid(c, profile->reference());
    const auto path = out_path(c, configs.size() > 1 ? c.name + "_profile.csv" : "profile.csv");
    write_profile_csv(*profile, grid, path);
    say(o, "profile: " + std::to_string(grid.size()) + " rows -> " + path.string());
  }
  return kOk;
}

int cmd_flow(const Options& o) {
  const auto configs = load_configs(o, false);
  std::vector<json> summaries(configs.size());
  std::vector<char> ok(configs.size());
  parallel_for(configs.size(), o.jobs, [&](std::size_t i) {
    const auto& c = configs[i];
    auto s = setup(c);
    const Foliation fol = run_flow(s.surface, c.flow);
    write_flow_csv(fol, out_path(c, "flow.csv"));
    write_surface_csv(fol.surface(fol.size() - 1), out_path(c, "surface_final.csv"));
    dump_surfaces(c, fol);
    bool good = true;
    summaries[i] = flow_summary(c, fol, good);
    ok[i] = good;
    write_json(summaries[i], out_path(c, "flow.json"));
  });
  int code = kOk;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    say(o, "flow " + configs[i].name + ": " + std::to_string(summaries[i]["slices"].get<std::size_t>()) +
               " slices, conditions " + (ok[i] ? "ok" : "FAILED"));
    if (!ok[i]) code = kHypotheses;
  }
  return code;
}

int cmd_solve(const Options& o) {
  const auto configs = load_configs(o, false);
  std::vector<int> codes(configs.size(), kOk);
  std::vector<std::string> lines(configs.size());
  parallel_for(configs.size(), o.jobs, [&](std::size_t i) {
    const auto& c = configs[i];
    auto s = setup(c);
    const Foliation fol = run_flow(s.surface, c.flow);
    write_flow_csv(fol, out_path(c, "flow.csv"));
    bool flow_ok = true;
    json j = flow_summary(c, fol, flow_ok);
    const auto g0 = surface_geometry(s.surface, false);
    try {
      const Field u0 = build_u0(c, s.surface, g0);
      const UField u = solve_u(fol, u0, c.solver);
      std::optional<ScalarResidual> res;
      if (c.scalar_residual && fol.size() >= 3) res = scalar_residual(fol, u);
      write_u_csv(u, res ? &*res : nullptr, out_path(c, "u.csv"));
      dump_u(c, *s.grid, u);
      json uj = {{"lower_bound", u.lower_bound},
                 {"upper_bound", u.upper_bound},
                 {"worst_bound_excess", u.worst_bound_excess},
                 {"accepted_steps", u.accepted_steps},
                 {"rejected_steps", u.rejected_steps},
                 {"flow_mismatch", u.flow_mismatch},
                 {"final_max_u_minus_1", u.max_u_minus_1.back()},
                 {"decay_constant", u.decay_constant},
                 {"decay_bounded", u.decay_bounded},
                 {"scalar_residual", res ? number(res->max()) : json(nullptr)}};
      j["u"] = uj;
      if (fol.size() >= 3) {
        const auto trace = monotonicity_check(fol, u);
        write_energy_csv(trace, out_path(c, "energy.csv"));
        json ej = {{"E0", trace.E.front()},
                   {"E_final", trace.E.back()},
                   {"monotonicity_identity", trace.max_discrepancy},
                   {"max_dEds", number(trace.max_rate)},
                   {"max_energy_increase", trace.max_increase},
                   {"nonincreasing", trace.nonincreasing()}};
        try {
          const auto fit = adm_extrapolate(trace);
          ej["E_inf"] = fit.E_inf;
          ej["E_inf_fit_residual"] = fit.rms_residual;
        } catch (const Error& e) {
          ej["E_inf"] = nullptr;
          ej["E_inf_note"] = e.what();
        }
        j["energy"] = ej;
        if (!trace.nonincreasing()) codes[i] = kViolated;
      }
      lines[i] = "solve " + c.name + ": final max|u-1| = " + format_number(u.max_u_minus_1.back());
    } catch (const Error& e) {
      j["error"] = e.what();
      codes[i] = e.kind() == ErrorKind::Hypothesis ? kHypotheses : kViolated;
      lines[i] = "solve " + c.name + ": " + e.what();
    }
    write_json(j, out_path(c, "solve.json"));
  });
  int code = kOk;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    say(o, lines[i]);
    code = std::max(code, codes[i]);
  }
  return code;
}

namespace {

int scenario_sweep(const Options& o, const RunConfig& c) {
  const auto& sw = *c.sweep;
  const auto rows = oracle::closed_form_sweep(sw.M, sw.m, sw.r0);
  oracle::write_sweep_csv(rows, out_path(c, "sweep.csv"));
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) worst = std::min(worst, r.margin());
  say(o, "sweep: " + std::to_string(rows.size()) + " closed-form samples, min margin " + format_number(worst));
  int code = worst >= -1e-10 ? kOk : kViolated;
  if (!sw.pipeline) return code;

  std::vector<PenroseReport> reports(rows.size());
  parallel_for(rows.size(), o.jobs, [&](std::size_t i) {
    RunConfig ci = c;
    ci.reference = {"schwarzschild", rows[i].m, 0.0, {}};
    ci.surface = {};
    ci.surface.r0 = rows[i].r0;
    ci.flow.n_theta = sw.resolution;
    ci.flow.n_phi = 2 * sw.resolution;
    ci.inner = InnerSpec{"schwarzschild_interior", rows[i].M, 0.0, {}, 0.0};
    auto sc = make_scenario(ci);
    sc.name = "M" + format_number(rows[i].M) + "_m" + format_number(rows[i].m) + "_r" + format_number(rows[i].r0);
    reports[i] = penrose_report(sc);
  });
  CsvWriter out(out_path(c, "sweep_pipeline.csv"), {"M", "m", "r0", "E0", "E_inf", "RHS", "margin", "LHS_closed_form"});
  double worst_pipeline = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = reports[i];
    out.row({rows[i].M, rows[i].m, rows[i].r0, r.E0, r.E_inf, r.rhs, r.margin, rows[i].lhs});
    worst_pipeline = std::min(worst_pipeline, r.margin);
    code = std::max(code, report_exit(r));
  }
  say(o, "sweep: pipeline min margin " + format_number(worst_pipeline));
  return code;
}

}  // namespace

int cmd_scenario(const Options& o) {
  const auto configs = load_configs(o, false);
  if (configs.size() == 1 && configs[0].sweep) return scenario_sweep(o, configs[0]);

  std::vector<PenroseReport> reports(configs.size());
  parallel_for(configs.size(), o.jobs, [&](std::size_t i) { reports[i] = penrose_report(make_scenario(configs[i])); });

  bool any_hypothesis = false, any_violation = false;
  json batch = json::array();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    const auto& r = reports[i];
    const std::string prefix = configs.size() > 1 ? c.name + "_" : "";
    const json j = report_json(r);
    write_json(j, out_path(c, prefix + "scenario.json"));
    if (r.pipeline_ran) write_energy_csv(r.trace, out_path(c, prefix + "energy.csv"));
    batch.push_back(j);
    const int code = report_exit(r);
    any_hypothesis |= code == kHypotheses;
    any_violation |= code == kViolated;
    std::string line = "scenario " + c.name + ": E0 = " + format_number(r.E0) + ", rhs = " + format_number(r.rhs) +
                       ", margin = " + format_number(r.margin);
    if (!r.hypotheses_met) line += " [hypotheses not met: " + r.failure + "]";
    say(o, line);
  }
  if (configs.size() > 1) write_json(batch, out_path(configs[0], "scenarios.json"));
  return any_hypothesis ? kHypotheses : any_violation ? kViolated : kOk;
}

int cmd_constants(const Options& o) {
  const auto configs = load_configs(o, true);
  for (const auto& c : configs) {
    auto s = setup(c);
    const double rho_min = c.rho_min.value_or(s.surface.G().minCoeff());
    const auto k = compute_constants(*s.profile, rho_min);
    auto at = [](double rho) { return std::isinf(rho) ? json("infinity") : json(rho); };
    const json j = {{"name", c.name},
                    {"rho_min", rho_min},
                    {"C1", k.C1},
                    {"C2", number(k.C2)},
                    {"C2_exterior", number(k.C2_exterior)},
                    {"C3", k.C3},
                    {"C4", k.C4},
                    {"C5", k.C5},
                    {"argmax_C3", at(k.argmax_C3)},
                    {"argmax_C4", at(k.argmax_C4)},
                    {"argmax_C5", at(k.argmax_C5)},
                    {"max_angle", k.max_angle},
                    {"max_angle_exterior", k.max_angle_exterior},
                    {"tail_stable", k.tail_stable}};
    const auto path = out_path(c, configs.size() > 1 ? c.name + "_constants.json" : "constants.json");
    write_json(j, path);
    say(o, "constants " + c.name + ": C1 = " + format_number(k.C1) + ", C2 = " + format_number(k.C2) +
               ", C3 = " + format_number(k.C3) + " -> " + path.string());
    if (!k.tail_stable) say(o, "warning: bound fields have not settled at the end of the table");
  }
  return kOk;
}

}  // namespace qlpen
