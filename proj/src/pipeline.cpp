#include "coopsym/pipeline.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "coopsym/coupling.hpp"
#include "coopsym/error.hpp"
#include "coopsym/io.hpp"
#include "coopsym/kernels.hpp"
#include "coopsym/problems.hpp"
#include "coopsym/reflection.hpp"
#include "coopsym/spectral.hpp"

namespace coopsym {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

const json& object_at(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ConfigError("missing '" + key + "'");
  const json& v = doc.at(key);
  if (!v.is_object()) throw ConfigError("'" + key + "' must be an object");
  return v;
}

GuessConfig parse_guess(const json& g, size_t index, std::uint64_t seed) {
  if (!g.is_object()) throw ConfigError("every guess must be an object");
  reject_unknown(g, {"label", "kind", "amplitude", "components", "angle", "seed", "pattern", "nodal_candidate"},
                 "guess");
  GuessConfig out;
  out.label = g.value("label", "guess" + std::to_string(index));
  if (out.label.empty() || out.label.find_first_of("/\\") != std::string::npos || out.label == "." || out.label == "..")
    throw ConfigError("guess label '" + out.label + "' is not a valid directory name");
  try {
    out.spec.kind = guess_kind_from_string(g.value("kind", std::string("radial_bump")));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  out.spec.amplitude = g.value("amplitude", 1.0);
  out.spec.component_scale = g.value("components", std::vector<double>{});
  out.spec.angle = g.value("angle", 0.0);
  out.spec.seed = g.value("seed", seed + index);
  const std::string pattern = g.value("pattern", std::string("positive"));
  if (pattern == "positive")
    out.pattern = SignPattern::Positive;
  else if (pattern == "one-node")
    out.pattern = SignPattern::OneNode;
  else
    throw ConfigError("unknown sign pattern '" + pattern + "'");
  out.nodal_candidate = g.value("nodal_candidate", out.spec.kind == GuessKind::NodalAngular);
  return out;
}

}  // namespace

ExperimentConfig parse_config(const json& document) {
  try {
    if (!document.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(document, {"name", "problem", "domain", "grid", "guesses", "pipeline", "tolerances", "seed", "output"},
                   "config");
    ExperimentConfig cfg;
    cfg.document = document;
    cfg.name = document.value("name", std::string("experiment"));
    cfg.seed = document.value("seed", std::uint64_t{0});
    cfg.output = document.value("output", std::string());

    const json& problem = object_at(document, "problem");
    reject_unknown(problem, {"name", "params"}, "problem");
    cfg.problem = problem.at("name").get<std::string>();
    cfg.params = problem.value("params", std::map<std::string, double>{});
    try {
      make_problem(cfg.problem, cfg.params);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("problem: ") + e.what());
    }

    const json& domain = object_at(document, "domain");
    reject_unknown(domain, {"kind", "r_inner", "r_outer"}, "domain");
    const json& grid = object_at(document, "grid");
    reject_unknown(grid, {"nr", "ntheta"}, "grid");
    try {
      cfg.domain = io::domain_from_json(domain);
      cfg.nr = grid.at("nr").get<int>();
      cfg.ntheta = grid.at("ntheta").get<int>();
      build_grid(cfg.domain, cfg.nr, cfg.ntheta);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }

    if (!document.contains("guesses") || !document.at("guesses").is_array() || document.at("guesses").empty())
      throw ConfigError("'guesses' must be a nonempty array");
    std::set<std::string> labels;
    size_t index = 0;
    for (const auto& g : document.at("guesses")) {
      cfg.guesses.push_back(parse_guess(g, index++, cfg.seed));
      if (!labels.insert(cfg.guesses.back().label).second)
        throw ConfigError("duplicate guess label '" + cfg.guesses.back().label + "'");
    }

    if (document.contains("pipeline")) {
      const json& p = object_at(document, "pipeline");
      reject_unknown(p, {"spectral", "coupling", "reflection", "symmetry", "rotating_plane"}, "pipeline");
      cfg.toggles.spectral = p.value("spectral", true);
      cfg.toggles.coupling = p.value("coupling", true);
      cfg.toggles.reflection = p.value("reflection", true);
      cfg.toggles.symmetry = p.value("symmetry", true);
      cfg.toggles.rotating_plane = p.value("rotating_plane", true);
    }
    if (document.contains("tolerances")) {
      const json& t = object_at(document, "tolerances");
      reject_unknown(t,
                     {"newton_tol", "newton_max_iters", "rad_tol", "mono_tol", "axis_tol", "quad_nodes", "eigenvalues",
                      "pos_tol_rel", "coupling_tol", "identity_tol"},
                     "tolerances");
      cfg.newton.tol = t.value("newton_tol", cfg.newton.tol);
      cfg.newton.max_iters = t.value("newton_max_iters", cfg.newton.max_iters);
      cfg.symmetry.rad_tol = t.value("rad_tol", cfg.symmetry.rad_tol);
      cfg.symmetry.mono_tol = t.value("mono_tol", cfg.symmetry.mono_tol);
      cfg.symmetry.axis_tol = t.value("axis_tol", cfg.symmetry.axis_tol);
      cfg.quad_nodes = t.value("quad_nodes", cfg.quad_nodes);
      cfg.eigenvalues = t.value("eigenvalues", cfg.eigenvalues);
      cfg.pos_tol_rel = t.value("pos_tol_rel", cfg.pos_tol_rel);
      cfg.coupling_tol = t.value("coupling_tol", cfg.coupling_tol);
      cfg.identity_tol = t.value("identity_tol", cfg.identity_tol);
    }
    if (cfg.quad_nodes < 2) throw ConfigError("quad_nodes must be at least 2");
    if (cfg.eigenvalues < 1 || cfg.eigenvalues > 12) throw ConfigError("eigenvalues must be in [1, 12]");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

void apply_override(json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &document;
  std::stringstream parts(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(parts, key, '.')) keys.push_back(key);
  for (size_t k = 0; k < keys.size(); ++k) {
    const std::string& part = keys[k];
    json* next = nullptr;
    if (node->is_array()) {
      size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ConfigError("override path '" + path + "' indexes an array with '" + part + "'");
      }
      if (idx >= node->size()) throw ConfigError("override index out of range in '" + path + "'");
      next = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ConfigError("override path '" + path + "' crosses a scalar");
      next = &(*node)[part];
    }
    node = next;
  }
  *node = value;
}

ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = io::read_json(path);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

std::string config_hash(const json& document) {
  return io::sha256_hex(document.dump());
}

namespace {

struct GuessOutcome {
  json entry;
  bool alarm = false;
  bool error = false;
};

json tolerance_block(const ExperimentConfig& cfg, double tol_eig) {
  return {{"newton_tol", cfg.newton.tol},
          {"tol_eig", tol_eig},
          {"rad_tol", cfg.symmetry.rad_tol},
          {"mono_tol", cfg.symmetry.mono_tol},
          {"axis_tol", cfg.symmetry.axis_tol},
          {"quad_nodes", cfg.quad_nodes},
          {"pos_tol_rel", cfg.pos_tol_rel},
          {"coupling_tol", cfg.coupling_tol},
          {"identity_tol", cfg.identity_tol}};
}

double jacobian_norm(const Solution& s) {
  const MatrixField j = kernels::parallel::jacobian(s.problem, s.field);
  const Grid& g = s.field.grid();
  double acc = 0.0;
  for (int n = 0; n < g.node_count(); ++n) {
    double f = 0.0;
    for (double v : j.at(n)) f += v * v;
    acc += g.cell_weights[n] * f;
  }
  return std::sqrt(acc);
}

GuessOutcome run_guess(const ExperimentConfig& cfg, const Problem& problem, const GridPtr& grid,
                       const GuessConfig& gc, const fs::path& dir, const json& provenance) {
  GuessOutcome out;
  json& e = out.entry;
  e["label"] = gc.label;
  e["kind"] = to_string(gc.spec.kind);
  e["nodal_candidate"] = gc.nodal_candidate;
  if (gc.nodal_candidate) e["note"] = "nodal candidate";

  std::optional<Solution> sol;
  try {
    GuessSpec spec = gc.spec;
    if (spec.kind == GuessKind::FromRadialProfile) {
      spec.profile = radial_shoot(problem, cfg.domain, gc.pattern);
      e["pattern"] = to_string(gc.pattern);
      e["shooting_free_value"] = std::vector<double>(spec.profile->free_value.data(),
                                                      spec.profile->free_value.data() + spec.profile->free_value.size());
    }
    const VectorField guess = initial_guess(grid, problem.components(), spec);
    sol = newton_solve(problem, guess, cfg.newton, gc.label);
  } catch (const SolverError& err) {
    e["status"] = "not_converged";
    e["error"] = err.what();
    return out;
  } catch (const BracketNotFound& err) {
    e["status"] = "not_converged";
    e["error"] = err.what();
    return out;
  } catch (const std::exception& err) {
    e["status"] = "error";
    e["error"] = err.what();
    out.error = true;
    return out;
  }

  try {
    const Solution& s = *sol;
    e["status"] = "converged";
    e["solve"] = {{"residual_inf", s.residual_inf},
                  {"residual_floor", s.residual_floor},
                  {"newton_iters", s.newton_iters},
                  {"trivial", s.trivial},
                  {"max_abs", s.field.max_abs()}};
    json snap = io::solution_snapshot(s);
    snap["provenance"] = provenance;
    io::write_json(dir / "solution.json", snap);
    io::write_text(dir / "solution.svg", io::field_svg(s.field, cfg.name + " / " + gc.label));

    MorseResult morse;
    bool have_morse = false;
    if (cfg.toggles.spectral) {
      const SpectralReport rep = spectral_report(s, cfg.eigenvalues);
      morse = rep.morse;
      have_morse = true;
      json j = io::to_json(rep);
      j["provenance"] = provenance;
      io::write_json(dir / "spectral.json", j);
      json fields = json::array();
      for (const auto& f : rep.eigenfields) fields.push_back(io::field_snapshot(f));
      io::write_json(dir / "eigenfields.json", {{"provenance", provenance}, {"eigenfields", fields}});
      e["spectral"] = {{"eigenvalues", rep.eigenvalues},
                       {"morse_index", rep.morse.index},
                       {"inconclusive", rep.morse.inconclusive},
                       {"inertia_index", rep.morse.inertia_index ? json(*rep.morse.inertia_index) : json(nullptr)},
                       {"principal_eigenvalue",
                        rep.principal_eigenvalue ? json(*rep.principal_eigenvalue) : json(nullptr)}};
    }

    CouplingReport coupling;
    if (cfg.toggles.coupling) {
      CouplingOptions co;
      co.tol = cfg.coupling_tol;
      coupling = check_coupling(s, Region::full(s.field.grid()), co);
      json j = io::to_json(coupling);
      j["provenance"] = provenance;
      io::write_json(dir / "coupling.json", j);
      e["coupling"] = {{"weakly_coupled", coupling.weakly_coupled}, {"fully_coupled", coupling.fully_coupled}};
    } else {
      coupling.fully_coupled = false;
    }

    if (cfg.toggles.reflection) {
      DirectionScanOptions so;
      so.quad_nodes = cfg.quad_nodes;
      const DirectionScan scan = direction_scan(s, so);
      const ChainSummary chain = chain_summary(s, cfg.quad_nodes);
      double odd_err = 0.0;
      int failed = 0;
      for (const auto& row : scan.rows) {
        if (!row.error.empty() && !row.lambda_sym_bs) ++failed;
        if (row.odd_q_full && row.odd_q_cap)
          odd_err = std::max(odd_err, std::abs(*row.odd_q_full - 2.0 * *row.odd_q_cap) / std::max(1.0, std::abs(*row.odd_q_cap)));
      }
      json chain_j = {{"max_abs_q_e", chain.max_abs_q_e},
                      {"max_q_excess", chain.max_q_excess},
                      {"max_qes_minus_qe", chain.max_qes_minus_qe},
                      {"max_difference_residual", chain.max_difference_residual},
                      {"min_coefficient_gap", chain.min_coefficient_gap},
                      {"strict_failures", chain.strict_failures},
                      {"max_skipped_fraction", chain.max_skipped_fraction}};
      json j = io::to_json(scan);
      j["chain"] = chain_j;
      j["provenance"] = provenance;
      io::write_json(dir / "direction_scan.json", j);
      io::write_text(dir / "direction_scan.csv", io::direction_scan_csv(scan));
      e["reflection"] = {{"verdict", scan.verdict},
                         {"best_direction", scan.best_direction.angle_index},
                         {"best_value", scan.best_value},
                         {"tol_eig", scan.tol_eig},
                         {"odd_extension_error", odd_err},
                         {"failed_directions", failed},
                         {"chain", chain_j}};
    }

    SymmetryReport sym;
    if (cfg.toggles.symmetry) {
      if (!have_morse) morse.inconclusive = true;
      sym = classify(s, morse, coupling, cfg.symmetry);
      json j = io::to_json(sym);
      j["provenance"] = provenance;
      io::write_json(dir / "symmetry.json", j);
      e["symmetry"] = {{"classification", to_string(sym.classification)},
                       {"axis_angle", sym.axis_angle ? json(*sym.axis_angle) : json(nullptr)},
                       {"radiality_deficit", sym.radiality_deficit},
                       {"monotonicity_violation", sym.monotonicity_violation},
                       {"hypotheses_hold", sym.hypotheses.all()},
                       {"alarm", sym.alarm}};
      out.alarm = sym.alarm;
    }

    if (cfg.toggles.rotating_plane) {
      const Grid& g = s.field.grid();
      Direction base{0};
      if (sym.axis_angle) base.angle_index = g.wrap(static_cast<int>(std::lround(*sym.axis_angle / g.dtheta)));
      const RotatingPlaneScan rp = rotating_plane_scan(s, base, cfg.pos_tol_rel);
      json j = io::to_json(rp);
      j["provenance"] = provenance;
      io::write_json(dir / "rotating_plane.json", j);
      io::write_text(dir / "rotating_plane.csv", io::rotating_plane_csv(rp));
      e["rotating_plane"] = {{"base_direction", rp.base.angle_index},
                             {"identically_symmetric", rp.identically_symmetric},
                             {"theta0_estimate", rp.theta0_estimate ? json(*rp.theta0_estimate) : json(nullptr)},
                             {"principal_at_theta0",
                              rp.principal_at_theta0 ? json(*rp.principal_at_theta0) : json(nullptr)}};
    }

    // Pairwise coupling identity for nonradial solutions within the hypotheses.
    if (problem.components() == 2 && cfg.toggles.coupling && coupling.identity) {
      const double jn = jacobian_norm(s);
      const double rel = jn > 0 ? coupling.identity->pair_l2 / jn : 0.0;
      const bool applicable = cfg.toggles.symmetry && sym.classification != Classification::Radial && sym.hypotheses.all();
      std::string verdict = "not_applicable";
      if (applicable) verdict = rel <= cfg.identity_tol ? "pass" : "fail";
      e["identity"] = {{"pair_l2", coupling.identity->pair_l2},
                       {"jacobian_l2", jn},
                       {"pair_relative", rel},
                       {"transport_l2", coupling.identity->l2_norm},
                       {"check", verdict}};
      if (verdict == "fail") out.alarm = true;
    }
    e["alarm"] = out.alarm;
  } catch (const std::exception& err) {
    e["status"] = "error";
    e["error"] = err.what();
    out.error = true;
  }
  return out;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg, const fs::path& out, int workers) {
  const Problem problem = make_problem(cfg.problem, cfg.params);
  const GridPtr grid = std::make_shared<const Grid>(build_grid(cfg.domain, cfg.nr, cfg.ntheta));
  const double tol_eig = default_tol_eig(*grid);
  const std::string hash = config_hash(cfg.document);
  const json tolerances = tolerance_block(cfg, tol_eig);
  const json provenance = {{"config", cfg.name}, {"config_hash", hash}, {"tolerances", tolerances}};

  fs::create_directories(out);
  io::write_json(out / "config.json", cfg.document);

  const int n = static_cast<int>(cfg.guesses.size());
  std::vector<GuessOutcome> outcomes(n);
  workers = std::max(1, workers);
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
  for (int k = 0; k < n; ++k)
    outcomes[k] = run_guess(cfg, problem, grid, cfg.guesses[k], out / cfg.guesses[k].label, provenance);

  RunResult res;
  json guesses = json::array();
  int alarms = 0, errors = 0;
  for (const auto& o : outcomes) {
    guesses.push_back(o.entry);
    alarms += o.alarm;
    errors += o.error;
  }
  std::vector<std::string> tags;
  for (Tag t : problem.tags()) tags.push_back(to_string(t));
  res.exit_code = alarms > 0 ? kExitAlarm : errors > 0 ? kExitPipelineError : kExitOk;
  res.summary = {{"config", cfg.name},
                 {"config_hash", hash},
                 {"problem", {{"name", problem.name()}, {"params", problem.params()}, {"tags", tags}, {"notes", problem.notes()}}},
                 {"grid", io::grid_json(*grid)},
                 {"tolerances", tolerances},
                 {"seed", cfg.seed},
                 {"guesses", guesses},
                 {"alarms", alarms},
                 {"errors", errors},
                 {"exit_status", res.exit_code}};
  io::write_json(out / "summary.json", res.summary);
  return res;
}

namespace {

std::string show(const json& v) {
  return v.dump();
}

void diff_json(const json& a, const json& b, const std::string& path, double rtol, double atol,
               std::vector<DiffEntry>& out) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    const double d = std::abs(x - y);
    if (d > atol + rtol * std::max(std::abs(x), std::abs(y)) || (std::isnan(x) != std::isnan(y))) {
      DiffEntry e{DiffEntry::Kind::Changed, path, show(a), show(b), d, d / std::max(std::abs(x), std::abs(y))};
      out.push_back(e);
    }
    return;
  }
  if (a.is_object() && b.is_object()) {
    for (const auto& [k, v] : a.items()) {
      const std::string p = path.empty() ? k : path + "." + k;
      if (!b.contains(k))
        out.push_back({DiffEntry::Kind::Removed, p, show(v), "", {}, {}});
      else
        diff_json(v, b.at(k), p, rtol, atol, out);
    }
    for (const auto& [k, v] : b.items())
      if (!a.contains(k)) out.push_back({DiffEntry::Kind::Added, path.empty() ? k : path + "." + k, "", show(v), {}, {}});
    return;
  }
  if (a.is_array() && b.is_array()) {
    const size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) diff_json(a[i], b[i], path + "[" + std::to_string(i) + "]", rtol, atol, out);
    for (size_t i = n; i < a.size(); ++i)
      out.push_back({DiffEntry::Kind::Removed, path + "[" + std::to_string(i) + "]", show(a[i]), "", {}, {}});
    for (size_t i = n; i < b.size(); ++i)
      out.push_back({DiffEntry::Kind::Added, path + "[" + std::to_string(i) + "]", "", show(b[i]), {}, {}});
    return;
  }
  if (a != b) out.push_back({DiffEntry::Kind::Changed, path, show(a), show(b), {}, {}});
}

}  // namespace

std::vector<DiffEntry> report_diff(const fs::path& run_a, const fs::path& run_b, double rtol, double atol) {
  for (const auto& p : {run_a, run_b})
    if (!fs::exists(p / "summary.json")) throw Error("missing artifact: " + (p / "summary.json").string());
  std::vector<DiffEntry> out;
  diff_json(io::read_json(run_a / "summary.json"), io::read_json(run_b / "summary.json"), "", rtol, atol, out);
  return out;
}

std::string format_diff(const std::vector<DiffEntry>& diff) {
  std::ostringstream s;
  s.precision(3);
  for (const auto& d : diff) {
    switch (d.kind) {
      case DiffEntry::Kind::Changed:
        s << "~ " << d.path << ": " << d.a << " -> " << d.b;
        if (d.abs_drift) s << "  (abs " << *d.abs_drift << ", rel " << *d.rel_drift << ")";
        break;
      case DiffEntry::Kind::Added: s << "+ " << d.path << ": " << d.b; break;
      case DiffEntry::Kind::Removed: s << "- " << d.path << ": " << d.a; break;
    }
    s << '\n';
  }
  return s.str();
}

}  // namespace coopsym
