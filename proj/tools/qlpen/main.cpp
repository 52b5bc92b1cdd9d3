#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qlp/errors.hpp"

namespace {

int exit_code_for(const qlp::Error& e) {
  switch (e.kind()) {
    case qlp::ErrorKind::InvalidArgument:
    case qlp::ErrorKind::ExtremalViolation:
    case qlp::ErrorKind::BadTable:
    case qlp::ErrorKind::Domain:
    case qlp::ErrorKind::Io:
      return qlpen::kUsage;
    case qlp::ErrorKind::Hypothesis:
    case qlp::ErrorKind::StarShape:
    case qlp::ErrorKind::Degenerate:
      return qlpen::kHypotheses;
    default:
      return qlpen::kViolated;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qlpen: quasi-local Penrose inequality laboratory"};
  app.require_subcommand(1);
  qlpen::Options options;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config, "JSON run configuration");
    sub->add_option("--out", options.out, "output directory (overrides outputs.directory)");
    sub->add_option("--jobs", options.jobs, "worker threads for independent scenarios")->check(CLI::PositiveNumber);
    sub->add_option("--resolution", options.resolution, "grid resolution NxM (overrides flow.resolution)");
    sub->add_flag("--quiet", options.quiet, "suppress progress lines");
  };

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const qlpen::Options&);
  };
  const Entry entries[] = {
      {"profile", "write the isothermal profile r, rho, F", qlpen::cmd_profile},
      {"flow", "run the unit normal flow and its condition monitors", qlpen::cmd_flow},
      {"solve", "flow, solve for u and trace the energy", qlpen::cmd_solve},
      {"verify", "run the invariant suite", qlpen::cmd_verify},
      {"scenario", "Penrose inequality report (or closed-form sweep)", qlpen::cmd_scenario},
      {"constants", "flow constants C1..C5 on [rho_min, infinity)", qlpen::cmd_constants},
  };
  int (*selected)(const qlpen::Options&) = nullptr;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    common(sub);
    if (std::string(e.name) == "verify")
      sub->add_option("--inject-fault", options.inject_fault, "mutation test: t_sign flips the sign of T");
    sub->callback([&selected, run = e.run] { selected = run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return qlpen::kUsage;
  }

  try {
    return selected(options);
  } catch (const qlpen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return qlpen::kUsage;
  } catch (const qlp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return qlpen::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qlpen::kViolated;
  }
}
