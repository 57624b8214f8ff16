#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopsym/coupling.hpp"
#include "coopsym/field.hpp"
#include "coopsym/grid.hpp"
#include "coopsym/reflection.hpp"
#include "coopsym/solver.hpp"
#include "coopsym/spectral.hpp"
#include "coopsym/symmetry.hpp"

namespace coopsym::io {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes);
std::string base64_encode(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

/// Little-endian IEEE doubles, base64 encoded.
std::string encode_doubles(const std::vector<double>& values);
std::vector<double> decode_doubles(const std::string& text);

json to_json(const Domain& d);
Domain domain_from_json(const json& j);
json grid_json(const Grid& g);

/// Snapshot: JSON header plus component-major, radial-major node values.
json field_snapshot(const VectorField& f, const json& header = json::object());
VectorField field_from_snapshot(const json& j);

json solution_snapshot(const Solution& s);

struct LoadedSolution {
  Solution solution;
  json header;
};
LoadedSolution solution_from_snapshot(const json& j);

json to_json(const SymmetricSpectrum& s);
json to_json(const MorseResult& m);
json to_json(const SpectralReport& r);
json to_json(const Digraph& g);
json to_json(const CouplingReport& r);
json to_json(const DirectionScan& s);
json to_json(const RotatingPlaneScan& s);
json to_json(const SymmetryReport& r);

std::string direction_scan_csv(const DirectionScan& s);
std::string rotating_plane_csv(const RotatingPlaneScan& s);

/// Polar heatmap of every component and angular profiles at three radii.
std::string field_svg(const VectorField& f, const std::string& title);

json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace coopsym::io
