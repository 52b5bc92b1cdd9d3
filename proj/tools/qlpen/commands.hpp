#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "config.hpp"

namespace qlpen {

enum ExitCode : int { kOk = 0, kViolated = 1, kUsage = 2, kHypotheses = 3 };

struct Options {
  std::filesystem::path config;
  std::filesystem::path out;  // overrides outputs.directory when set
  std::size_t jobs = 1;
  std::string resolution;     // overrides flow.resolution when set
  std::string inject_fault;   // verify only
  bool quiet = false;
};

int cmd_profile(const Options& options);
int cmd_flow(const Options& options);
int cmd_solve(const Options& options);
int cmd_verify(const Options& options);
int cmd_scenario(const Options& options);
int cmd_constants(const Options& options);

// Shared helpers.

/// Loads the configuration (or the defaults when no path is given) and applies
/// the command-line overrides.
std::vector<RunConfig> load_configs(const Options& options, bool allow_default);
void write_json(const json& j, const std::filesystem::path& path);
json number(double value);  // null for NaN and infinities
void say(const Options& options, const std::string& line);

/// Runs body(i) for i in [0, n) on up to `jobs` threads; the first exception
/// (in index order) is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& body);

}  // namespace qlpen
