#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rareq/demo.hpp"
#include "rareq/diagnostics.hpp"
#include "rareq/quantizer.hpp"
#include "rareq/types.hpp"

namespace rareq {

/// Insertion-ordered JSON keeps emitted files readable (prototypes before
/// the bulky assignment array).
using Json = nlohmann::ordered_json;

/// Shortest exact decimal form of v (round-trips to the same double).
std::string format_double(Scalar v);

/// Reads a rectangular CSV of doubles, one point per row. Row/column
/// problems raise input_error naming the 1-based line.
Matrix read_csv_matrix(const std::filesystem::path& path, bool header = false);

/// Writes values with enough digits that reading them back restores every
/// double bit-exactly. Optional header row.
void write_csv_matrix(const std::filesystem::path& path, CRef<Matrix> values,
                      const std::vector<std::string>& columns = {});

Vector read_csv_vector(const std::filesystem::path& path, bool header = false);

Json quantization_to_json(const QuantizationResult& result);
QuantizationResult quantization_from_json(const Json& j);
void save_quantization(const std::filesystem::path& path,
                       const QuantizationResult& result);
QuantizationResult load_quantization(const std::filesystem::path& path);

Json std_report_to_json(const CentroidStdReport& report);
CentroidStdReport std_report_from_json(const Json& j);
void save_std_report(const std::filesystem::path& path,
                     const CentroidStdReport& report);

struct RunManifest {
  std::string command;
  Json config;  // every resolved parameter, including seed
  std::vector<std::string> input_files;
  std::vector<std::string> output_files;
  std::string version;
  std::string created_utc;
};

void save_manifest(const std::filesystem::path& path, const RunManifest& m);

/// Scatter of output points with their weights and cell labels
/// (columns y1,...,yd,weight,cell), plus a prototypes table.
void write_scatter_csv(const std::filesystem::path& path, CRef<Matrix> points,
                       CRef<Vector> weights, const IndexVector& cells);
void write_prototypes_csv(const std::filesystem::path& path,
                          const Codebook& cb, CRef<Vector> masses);

/// Standalone SVG of the weighted scatter (area encodes weight, color the
/// cell) with the prototypes drawn as crosses. Pure function of its inputs.
void write_scatter_svg(const std::filesystem::path& path, CRef<Matrix> points,
                       CRef<Vector> weights, const IndexVector& cells,
                       const Codebook& cb);

std::string iso8601_utc_now();

}  // namespace rareq
