#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coopsym/error.hpp"
#include "coopsym/io.hpp"
#include "coopsym/pipeline.hpp"
#include "coopsym/problems.hpp"

namespace fs = std::filesystem;

namespace {

int default_workers() {
  if (const char* env = std::getenv("COOPSYM_WORKERS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "ignoring malformed COOPSYM_WORKERS='" << env << "'\n";
    }
  }
  return 1;
}

std::vector<fs::path> config_dirs() {
  std::vector<fs::path> dirs{"configs"};
#ifdef COOPSYM_CONFIG_DIR
  dirs.emplace_back(COOPSYM_CONFIG_DIR);
#endif
  return dirs;
}

int cmd_run(const std::string& config, const std::string& out_flag, int workers, const std::vector<std::string>& overrides) {
  coopsym::ExperimentConfig cfg;
  try {
    cfg = coopsym::load_config(config, overrides);
  } catch (const coopsym::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return coopsym::kExitConfigError;
  }
  fs::path out = !out_flag.empty() ? fs::path(out_flag) : !cfg.output.empty() ? fs::path(cfg.output) : fs::path("runs") / cfg.name;
  try {
    const coopsym::RunResult res = coopsym::run(cfg, out, workers);
    for (const auto& g : res.summary.at("guesses")) {
      std::cout << g.at("label").get<std::string>() << ": " << g.at("status").get<std::string>();
      if (g.contains("spectral")) std::cout << "  morse=" << g["spectral"]["morse_index"];
      if (g.contains("symmetry")) std::cout << "  " << g["symmetry"]["classification"].get<std::string>();
      if (g.contains("reflection")) std::cout << "  scan=" << g["reflection"]["verdict"].get<std::string>();
      if (g.value("alarm", false)) std::cout << "  ALARM";
      std::cout << '\n';
    }
    std::cout << "artifacts: " << out.string() << '\n';
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "pipeline error: " << e.what() << '\n';
    return coopsym::kExitPipelineError;
  }
}

int cmd_diff(const std::string& a, const std::string& b, double rtol, double atol) {
  try {
    std::cout << coopsym::format_diff(coopsym::report_diff(a, b, rtol, atol));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "diff error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_catalog() {
  std::cout << "problems:\n";
  for (const auto& entry : coopsym::catalog()) {
    std::cout << "  " << entry.name << " (";
    for (size_t i = 0; i < entry.parameters.size(); ++i) std::cout << (i ? ", " : "") << entry.parameters[i];
    std::cout << ")  " << entry.description << '\n';
  }
  std::cout << "configs:\n";
  for (const auto& dir : config_dirs()) {
    if (!fs::is_directory(dir)) continue;
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir))
      if (f.path().extension() == ".json") files.push_back(f.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) std::cout << "  " << f.string() << '\n';
    break;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coopsym: symmetry experiments for cooperative elliptic systems"};
  app.require_subcommand(1);

  std::string config, out;
  int workers = default_workers();
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "run the pipeline for a config");
  run->add_option("config", config, "config JSON")->required();
  run->add_option("--out", out, "artifact directory");
  run->add_option("--workers", workers, "parallel guesses (default $COOPSYM_WORKERS or 1)")->check(CLI::PositiveNumber);
  run->add_option("--override", overrides, "key=value with a dotted key, repeatable");

  std::string dir_a, dir_b;
  double rtol = 1e-12, atol = 0.0;
  auto* diff = app.add_subcommand("diff", "compare two run summaries");
  diff->add_option("dirA", dir_a)->required();
  diff->add_option("dirB", dir_b)->required();
  diff->add_option("--rtol", rtol, "relative tolerance for numbers");
  diff->add_option("--atol", atol, "absolute tolerance for numbers");

  auto* cat = app.add_subcommand("catalog", "list problems and shipped configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : coopsym::kExitConfigError;
  }
  if (*run) return cmd_run(config, out, workers, overrides);
  if (*diff) return cmd_diff(dir_a, dir_b, rtol, atol);
  if (*cat) return cmd_catalog();
  return 0;
}
