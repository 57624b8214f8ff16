#pragma once

// Experiment runner: config -> solve -> spectral -> coupling -> reflection ->
// symmetry, with one artifact directory per initial guess.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopsym/grid.hpp"
#include "coopsym/solver.hpp"
#include "coopsym/symmetry.hpp"

namespace coopsym {

struct GuessConfig {
  std::string label;
  GuessSpec spec;
  /// Shooting pattern for from_radial_profile guesses.
  SignPattern pattern = SignPattern::Positive;
  bool nodal_candidate = false;
};

struct PipelineToggles {
  bool spectral = true;
  bool coupling = true;
  bool reflection = true;
  bool symmetry = true;
  bool rotating_plane = true;
};

struct ExperimentConfig {
  std::string name;
  std::string problem;
  std::map<std::string, double> params;
  Domain domain;
  int nr = 32;
  int ntheta = 64;
  std::vector<GuessConfig> guesses;
  PipelineToggles toggles;
  NewtonOptions newton;
  SymmetryTolerances symmetry;
  int quad_nodes = 8;
  int eigenvalues = 4;
  double pos_tol_rel = 1e-8;
  double coupling_tol = 1e-12;
  /// Relative bound for the pairwise coupling identity on nonradial solutions.
  double identity_tol = 1e-4;
  std::uint64_t seed = 0;
  std::string output;
  /// Effective document after overrides; hashed for provenance.
  nlohmann::json document;
};

/// Throws ConfigError on malformed or unresolvable configs.
ExperimentConfig parse_config(const nlohmann::json& document);

/// Sets a dotted path ("grid.nr", "guesses.0.amplitude") to a JSON-parsed
/// value, or to the raw string when it does not parse.
void apply_override(nlohmann::json& document, const std::string& assignment);

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// SHA-256 of the compact dump of the effective config.
std::string config_hash(const nlohmann::json& document);

enum ExitStatus : int { kExitOk = 0, kExitPipelineError = 1, kExitAlarm = 2, kExitConfigError = 64 };

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json summary;
};

/// Runs every guess (as a parallel map over `workers` threads) and writes the
/// artifact tree under `out`.
RunResult run(const ExperimentConfig& config, const std::filesystem::path& out, int workers = 1);

struct DiffEntry {
  enum class Kind { Changed, Added, Removed } kind = Kind::Changed;
  std::string path;
  std::string a;
  std::string b;
  /// Numeric leaves only.
  std::optional<double> abs_drift;
  std::optional<double> rel_drift;
};

/// Field-level comparison of two summary.json files; numbers within
/// atol + rtol max(|a|, |b|) compare equal.
std::vector<DiffEntry> report_diff(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                                   double rtol = 1e-12, double atol = 0.0);
std::string format_diff(const std::vector<DiffEntry>& diff);

}  // namespace coopsym
