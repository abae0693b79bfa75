#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "toricost/costs.hpp"
#include "toricost/toricity.hpp"
#include "toricost/transport.hpp"

namespace toricost
{

using Json = nlohmann::ordered_json;

/// Floats with 17 significant digits, the form used in every output file.
std::string format_double(double x);

/// Serialize with format_double for floating-point values; keys keep their
/// insertion order. indent < 0 gives a single line.
std::string dump_json(const Json& j, int indent = 2);

/// Write to a sibling temporary file and rename it over `path`, so a failed
/// command never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

Json to_json(const CostEstimate& e, const std::string& system, const std::string& cost);

/// Header t_1,...,t_n,value,std_error then one row per grid point in
/// lexicographic grid order.
std::string scan_csv(const ScanResult& r);

Json scan_sidecar(const ScanResult& r, const std::string& system, const std::string& cost,
                  std::size_t n_samples, std::uint64_t seed);

/// {points: [[...]], weights: [...]}
DiscreteMeasure measure_from_json(const Json& j);
Json measure_to_json(const DiscreteMeasure& mu);

/// One matrix row per line.
std::string matrix_csv(const Matrix& m);

/// Parsed scan CSV: grid coordinates and values.
struct ScanTable
{
    std::size_t n = 0;
    std::vector<std::vector<double>> times;
    std::vector<double> values;
    std::vector<double> std_errors;
};

/// Throws ValidationError for a missing header, ragged rows or no rows.
ScanTable parse_scan_csv(const std::string& text);

/// n = 1: line plot with one polyline vertex per row. n = 2: heatmap with
/// one rect per grid cell. Output depends only on the table.
std::string render_svg(const ScanTable& table);

}  // namespace toricost
