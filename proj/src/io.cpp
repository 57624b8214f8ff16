#include "coopsym/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

#include "coopsym/error.hpp"
#include "coopsym/problems.hpp"

namespace coopsym::io {

static_assert(std::endian::native == std::endian::little, "snapshots assume a little-endian host");

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(n);
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw InvalidArgument("base64 length is not a multiple of 4");
  std::vector<unsigned char> out(3 * text.size() / 4 + 1);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw InvalidArgument("invalid base64 data");
  size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<size_t>(n) - pad);
  return out;
}

std::string encode_doubles(const std::vector<double>& values) {
  std::vector<unsigned char> bytes(values.size() * sizeof(double));
  if (!values.empty()) std::memcpy(bytes.data(), values.data(), bytes.size());
  return base64_encode(bytes);
}

std::vector<double> decode_doubles(const std::string& text) {
  const auto bytes = base64_decode(text);
  if (bytes.size() % sizeof(double) != 0) throw InvalidArgument("payload is not a whole number of doubles");
  std::vector<double> values(bytes.size() / sizeof(double));
  if (!values.empty()) std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

json to_json(const Domain& d) {
  return {{"kind", to_string(d.kind)}, {"r_inner", d.r_inner}, {"r_outer", d.r_outer}};
}

Domain domain_from_json(const json& j) {
  Domain d;
  d.kind = domain_kind_from_string(j.at("kind").get<std::string>());
  d.r_inner = j.value("r_inner", 0.0);
  d.r_outer = j.value("r_outer", 1.0);
  d.validate();
  return d;
}

json grid_json(const Grid& g) {
  return {{"domain", to_json(g.domain)}, {"nr", g.nr}, {"ntheta", g.ntheta}};
}

json field_snapshot(const VectorField& f, const json& header) {
  json j = header;
  j["grid"] = grid_json(f.grid());
  j["components"] = f.components();
  j["layout"] = "component-major, radial-major";
  j["encoding"] = "base64 float64 little-endian";
  j["values"] = encode_doubles(f.values());
  return j;
}

VectorField field_from_snapshot(const json& j) {
  const json& g = j.at("grid");
  auto grid = std::make_shared<const Grid>(
      build_grid(domain_from_json(g.at("domain")), g.at("nr").get<int>(), g.at("ntheta").get<int>()));
  return VectorField(grid, j.at("components").get<int>(), decode_doubles(j.at("values").get<std::string>()));
}

json solution_snapshot(const Solution& s) {
  json header = {{"problem", s.problem.name()},
                 {"params", s.problem.params()},
                 {"residual_inf", s.residual_inf},
                 {"residual_floor", s.residual_floor},
                 {"newton_iters", s.newton_iters},
                 {"guess_label", s.guess_label},
                 {"trivial", s.trivial}};
  return field_snapshot(s.field, header);
}

LoadedSolution solution_from_snapshot(const json& j) {
  const auto params = j.at("params").get<std::map<std::string, double>>();
  Problem problem = make_problem(j.at("problem").get<std::string>(), params);
  VectorField field = field_from_snapshot(j);
  Solution sol{std::move(field),
               std::move(problem),
               j.value("residual_inf", 0.0),
               j.value("residual_floor", 0.0),
               j.value("newton_iters", 0),
               j.value("guess_label", std::string()),
               j.value("trivial", false)};
  json header = j;
  header.erase("values");
  return LoadedSolution{std::move(sol), std::move(header)};
}

namespace {

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const SymmetricSpectrum& s) {
  return {{"region", s.region}, {"eigenvalues", s.eigenvalues}, {"iterations", s.iterations}, {"dense", s.dense}};
}

json to_json(const MorseResult& m) {
  json j = {{"index", m.index},
            {"inconclusive", m.inconclusive},
            {"eigenvalues", m.eigenvalues},
            {"tol_eig", m.tol_eig},
            {"inertia_index", m.inertia_index ? json(*m.inertia_index) : json(nullptr)}};
  if (m.inconclusive) j["ambiguous_value"] = m.ambiguous_value;
  return j;
}

json to_json(const SpectralReport& r) {
  json j = {{"region", r.region},
            {"eigenvalues", r.eigenvalues},
            {"morse_index", r.morse.index},
            {"morse", to_json(r.morse)},
            {"principal_eigenvalue", optional_number(r.principal_eigenvalue)},
            {"tolerances", {{"tol_eig", r.tol_eig}}}};
  if (!r.principal_note.empty()) j["principal_note"] = r.principal_note;
  return j;
}

json to_json(const Digraph& g) {
  json rows = json::array();
  for (const auto& row : g.adjacency) {
    json r = json::array();
    for (char c : row) r.push_back(c != 0);
    rows.push_back(r);
  }
  return rows;
}

json to_json(const CouplingReport& r) {
  json j = {{"weakly_coupled", r.weakly_coupled},
            {"worst_offdiagonal", r.worst_offdiagonal},
            {"fully_coupled", r.fully_coupled},
            {"digraph", to_json(r.digraph)},
            {"tol", r.tol},
            {"weight_tol", r.weight_tol}};
  if (r.identity) {
    j["identity_residual"] = {{"max", r.identity->max_norm}, {"l2", r.identity->l2_norm}};
    if (r.identity->pair_field) j["pair_residual"] = {{"max", r.identity->pair_max}, {"l2", r.identity->pair_l2}};
  }
  return j;
}

json to_json(const DirectionScan& s) {
  json rows = json::array();
  for (const auto& r : s.rows) {
    json row = {{"direction", r.direction.angle_index},
                {"angle", r.angle},
                {"lambda_sym_bs", optional_number(r.lambda_sym_bs)},
                {"lambda_sym_b", optional_number(r.lambda_sym_b)},
                {"lambda_principal_b", optional_number(r.lambda_principal_b)},
                {"odd_q_full", optional_number(r.odd_q_full)},
                {"odd_q_cap", optional_number(r.odd_q_cap)},
                {"w_min", r.w_min},
                {"w_max", r.w_max}};
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(row);
  }
  return {{"verdict", s.verdict},
          {"exists_nonnegative", s.exists_nonnegative},
          {"best_direction", s.best_direction.angle_index},
          {"best_value", s.best_value},
          {"tol_eig", s.tol_eig},
          {"rows", rows}};
}

json to_json(const RotatingPlaneScan& s) {
  json rows = json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"direction", r.direction.angle_index},
                    {"angle", r.angle},
                    {"min", r.min},
                    {"max", r.max},
                    {"positive_mass", r.positive_mass},
                    {"negative_mass", r.negative_mass},
                    {"strictly_positive", r.strictly_positive},
                    {"vanishing", r.vanishing}});
  json j = {{"base_direction", s.base.angle_index},
            {"identically_symmetric", s.identically_symmetric},
            {"last_positive_theta", optional_number(s.last_positive_theta)},
            {"theta0_estimate", optional_number(s.theta0_estimate)},
            {"principal_at_theta0", optional_number(s.principal_at_theta0)},
            {"pos_tol_rel", s.pos_tol_rel},
            {"rows", rows}};
  if (s.identically_symmetric) j["note"] = "identically symmetric";
  return j;
}

json to_json(const SymmetryReport& r) {
  json j = {{"axis_angle", optional_number(r.axis_angle)},
            {"radiality_deficit", r.radiality_deficit},
            {"monotonicity_violation", r.monotonicity_violation},
            {"strict_fraction", r.strict_fraction},
            {"axis_on_grid", r.axis_on_grid},
            {"classification", to_string(r.classification)},
            {"alarm", r.alarm},
            {"hypothesis_ledger",
             {{"full_coupling", r.hypotheses.full_coupling},
              {"convex_derivatives", r.hypotheses.convex_derivatives},
              {"morse_index_at_most_one", r.hypotheses.morse_at_most_one}}},
            {"tolerances",
             {{"rad_tol", r.tolerances.rad_tol}, {"mono_tol", r.tolerances.mono_tol}, {"axis_tol", r.tolerances.axis_tol}}}};
  if (r.axis) {
    j["axis_component"] = r.axis->component;
    j["axis_magnitudes"] = r.axis->magnitudes;
    j["axis_disagreement"] = r.axis->disagreement;
  }
  return j;
}

namespace {

std::string num(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(17) << *v;
  return s.str();
}

std::string num(double v) {
  return num(std::optional<double>(v));
}

}  // namespace

std::string direction_scan_csv(const DirectionScan& s) {
  std::ostringstream out;
  out << "direction,angle,lambda_sym_bs,lambda_sym_b,lambda_principal_b,odd_q_full,odd_q_cap,w_min,w_max\n";
  for (const auto& r : s.rows)
    out << r.direction.angle_index << ',' << num(r.angle) << ',' << num(r.lambda_sym_bs) << ',' << num(r.lambda_sym_b)
        << ',' << num(r.lambda_principal_b) << ',' << num(r.odd_q_full) << ',' << num(r.odd_q_cap) << ','
        << num(r.w_min) << ',' << num(r.w_max) << '\n';
  return out.str();
}

std::string rotating_plane_csv(const RotatingPlaneScan& s) {
  std::ostringstream out;
  const size_t m = s.rows.empty() ? 0 : s.rows.front().min.size();
  out << "direction,angle";
  for (size_t c = 0; c < m; ++c) out << ",min_" << c << ",max_" << c;
  out << ",positive_mass,negative_mass,strictly_positive,vanishing\n";
  for (const auto& r : s.rows) {
    out << r.direction.angle_index << ',' << num(r.angle);
    for (size_t c = 0; c < m; ++c) out << ',' << num(r.min[c]) << ',' << num(r.max[c]);
    out << ',' << num(r.positive_mass) << ',' << num(r.negative_mass) << ',' << (r.strictly_positive ? 1 : 0) << ','
        << (r.vanishing ? 1 : 0) << '\n';
  }
  return out.str();
}

namespace {

// Diverging blue-white-red map on [-1, 1].
std::string color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r, g, b;
  if (t >= 0) {
    r = 255;
    g = b = static_cast<int>(std::lround(255 * (1 - t)));
  } else {
    b = 255;
    r = g = static_cast<int>(std::lround(255 * (1 + t)));
  }
  std::ostringstream s;
  s << '#' << std::hex << std::setfill('0') << std::setw(2) << r << std::setw(2) << g << std::setw(2) << b;
  return s.str();
}

}  // namespace

std::string field_svg(const VectorField& f, const std::string& title) {
  const Grid& g = f.grid();
  const int m = f.components();
  const double panel = 260.0, pad = 20.0, radius = 110.0;
  const double width = pad + m * (panel + pad);
  const double height = 2 * panel + 3 * pad;
  const double scale = std::max(f.max_abs(), 1e-300);
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<text x=\"" << pad << "\" y=\"14\" font-size=\"12\" font-family=\"sans-serif\">" << title << "</text>\n";
  for (int c = 0; c < m; ++c) {
    const double cx = pad + c * (panel + pad) + panel / 2, cy = pad + panel / 2;
    const double k = radius / g.domain.r_outer;
    out << "<g stroke=\"none\">\n";
    for (int i = 0; i < g.nr; ++i) {
      const double r0 = (g.domain.r_inner + i * g.dr) * k, r1 = (g.domain.r_inner + (i + 1) * g.dr) * k;
      for (int j = 0; j < g.ntheta; ++j) {
        const double a0 = g.theta_nodes[j] - 0.5 * g.dtheta, a1 = a0 + g.dtheta;
        auto px = [&](double r, double a) { return cx + r * std::cos(a); };
        auto py = [&](double r, double a) { return cy - r * std::sin(a); };
        out << "<path d=\"M" << px(r0, a0) << ',' << py(r0, a0) << "L" << px(r1, a0) << ',' << py(r1, a0) << "L"
            << px(r1, a1) << ',' << py(r1, a1) << "L" << px(r0, a1) << ',' << py(r0, a1) << "Z\" fill=\""
            << color(f.at(c, g.node(i, j)) / scale) << "\"/>\n";
      }
    }
    out << "</g>\n";
    out << "<text x=\"" << cx - 20 << "\" y=\"" << cy + radius + 20 << "\" font-size=\"11\" font-family=\"sans-serif\">u"
        << c + 1 << "</text>\n";

    // Angular profiles at three radii.
    const double top = 2 * pad + panel, left = pad + c * (panel + pad);
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << panel << "\" height=\"" << panel
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    const char* strokes[] = {"#1b9e77", "#d95f02", "#7570b3"};
    for (int q = 0; q < 3; ++q) {
      const int ring = std::min(g.nr - 1, (q + 1) * g.nr / 4);
      out << "<polyline fill=\"none\" stroke=\"" << strokes[q] << "\" points=\"";
      for (int j = 0; j <= g.ntheta; ++j) {
        const double x = left + panel * j / g.ntheta;
        const double y = top + panel / 2 - 0.45 * panel * f.at(c, g.node(ring, g.wrap(j))) / scale;
        out << x << ',' << y << ' ';
      }
      out << "\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return json::parse(in);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace coopsym::io
