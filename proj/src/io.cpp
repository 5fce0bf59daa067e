#include "rareq/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace rareq {

namespace {

using json = Json;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw input_error("cannot open file for reading: " + path.string());
  }
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw input_error("cannot open file for writing: " + path.string());
  }
  return out;
}

Scalar parse_field(const std::string& field, size_t line_no) {
  const char* first = field.data();
  const char* last = first + field.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' ||
                          last[-1] == '\r')) {
    --last;
  }
  Scalar value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    std::ostringstream os;
    os << "malformed CSV value '" << field << "' at line " << line_no;
    throw input_error(os.str());
  }
  return value;
}

std::vector<Scalar> parse_row(const std::string& line, size_t line_no) {
  std::vector<Scalar> row;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    const std::string field = comma == std::string::npos
                                  ? line.substr(start)
                                  : line.substr(start, comma - start);
    row.push_back(parse_field(field, line_no));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return row;
}

json vector_to_json(CRef<Vector> v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  Index i = 0;
  for (const auto& x : arr) v[i++] = x.get<Scalar>();
  return v;
}

json matrix_to_json(CRef<Matrix> m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  const Index nr = static_cast<Index>(rows.size());
  if (nr == 0) return Matrix(0, 0);
  const Index nc = static_cast<Index>(rows.front().size());
  Matrix m(nr, nc);
  Index r = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != nc) {
      throw input_error("ragged matrix in JSON");
    }
    Index c = 0;
    for (const auto& x : row) m(r, c++) = x.get<Scalar>();
    ++r;
  }
  return m;
}

json parse_json_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw input_error("invalid JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void dump_json_file(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string svg_num(Scalar v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.3f", v);
  return buf.data();
}

const char* cell_color(Index cell) {
  static constexpr std::array<const char*, 8> palette = {
      "#4878cf", "#d65f5f", "#6acc65", "#b47cc7",
      "#c4ad66", "#77bedb", "#e08040", "#8c8c8c"};
  return palette[static_cast<size_t>(cell) % palette.size()];
}

}  // namespace

std::string format_double(Scalar v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw numeric_error("format_double failed");
  return std::string(buf.data(), ptr);
}

Matrix read_csv_matrix(const std::filesystem::path& path, bool header) {
  auto in = open_in(path);
  std::string line;
  size_t line_no = 0;
  std::vector<std::vector<Scalar>> rows;
  Index cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) continue;
    if (line.empty() || line == "\r") continue;
    auto row = parse_row(line, line_no);
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
    } else if (static_cast<Index>(row.size()) != cols) {
      std::ostringstream os;
      os << "CSV row at line " << line_no << " has " << row.size()
         << " fields, expected " << cols;
      throw input_error(os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw input_error("CSV file has no data rows: " + path.string());
  }
  Matrix m(static_cast<Index>(rows.size()), cols);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
    }
  }
  return m;
}

void write_csv_matrix(const std::filesystem::path& path, CRef<Matrix> values,
                      const std::vector<std::string>& columns) {
  auto out = open_out(path);
  if (!columns.empty()) {
    if (static_cast<Index>(columns.size()) != values.cols()) {
      throw input_error("write_csv_matrix: header width mismatch");
    }
    for (size_t c = 0; c < columns.size(); ++c) {
      out << (c ? "," : "") << columns[c];
    }
    out << '\n';
  }
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      out << (c ? "," : "") << format_double(values(r, c));
    }
    out << '\n';
  }
}

Vector read_csv_vector(const std::filesystem::path& path, bool header) {
  const Matrix m = read_csv_matrix(path, header);
  if (m.cols() != 1) {
    std::ostringstream os;
    os << "expected a single-column CSV in " << path.string() << ", got "
       << m.cols() << " columns";
    throw input_error(os.str());
  }
  return m.col(0);
}

Json quantization_to_json(const QuantizationResult& result) {
  json j;
  j["prototypes"] = matrix_to_json(result.codebook.prototypes);
  j["masses"] = vector_to_json(result.masses);
  j["distortion"] = result.distortion;
  j["iterations"] = result.iterations;
  j["winning_start"] = result.winning_start;
  j["converged"] = result.converged;
  json trace = json::array();
  for (const auto& stat : result.trace) {
    trace.push_back({{"distortion", stat.distortion},
                     {"empty_recoveries", stat.empty_recoveries}});
  }
  j["trace"] = std::move(trace);
  json assignment = json::array();
  for (Index k = 0; k < result.assignment.size(); ++k) {
    assignment.push_back(result.assignment[k]);
  }
  j["assignment"] = std::move(assignment);
  return j;
}

QuantizationResult quantization_from_json(const Json& j) {
  QuantizationResult result;
  result.codebook.prototypes = matrix_from_json(j.at("prototypes"));
  result.masses = vector_from_json(j.at("masses"));
  result.distortion = j.at("distortion").get<Scalar>();
  result.iterations = j.at("iterations").get<std::vector<int>>();
  result.winning_start = j.at("winning_start").get<int>();
  result.converged = j.at("converged").get<bool>();
  for (const auto& stat : j.at("trace")) {
    result.trace.push_back({stat.at("distortion").get<Scalar>(),
                            stat.at("empty_recoveries").get<int>()});
  }
  const auto& assignment = j.at("assignment");
  result.assignment.resize(static_cast<Index>(assignment.size()));
  Index k = 0;
  for (const auto& cell : assignment) {
    result.assignment[k++] = cell.get<Index>();
  }
  return result;
}

void save_quantization(const std::filesystem::path& path,
                       const QuantizationResult& result) {
  dump_json_file(path, quantization_to_json(result));
}

QuantizationResult load_quantization(const std::filesystem::path& path) {
  try {
    return quantization_from_json(parse_json_file(path));
  } catch (const json::exception& e) {
    throw input_error("invalid quantization JSON in " + path.string() + ": " +
                      e.what());
  }
}

Json std_report_to_json(const CentroidStdReport& report) {
  json j;
  j["nv"] = report.nv;
  j["batches"] = report.batches;
  json codebooks = json::array();
  for (const auto& rows : report.codebooks) {
    json cells = json::array();
    for (const auto& entry : rows) {
      json cell;
      cell["cell"] = entry.cell;
      cell["present"] = entry.present;
      cell["effective_batches"] = entry.effective_batches;
      if (entry.present) cell["std"] = vector_to_json(entry.std);
      cells.push_back(std::move(cell));
    }
    codebooks.push_back({{"cells", std::move(cells)}});
  }
  j["codebooks"] = std::move(codebooks);
  return j;
}

CentroidStdReport std_report_from_json(const Json& j) {
  CentroidStdReport report;
  report.nv = j.at("nv").get<Index>();
  report.batches = j.at("batches").get<Index>();
  for (const auto& cb : j.at("codebooks")) {
    std::vector<CellStd> rows;
    for (const auto& cell : cb.at("cells")) {
      CellStd entry;
      entry.cell = cell.at("cell").get<Index>();
      entry.present = cell.at("present").get<bool>();
      entry.effective_batches = cell.at("effective_batches").get<Index>();
      if (entry.present) entry.std = vector_from_json(cell.at("std"));
      rows.push_back(std::move(entry));
    }
    report.codebooks.push_back(std::move(rows));
  }
  return report;
}

void save_std_report(const std::filesystem::path& path,
                     const CentroidStdReport& report) {
  dump_json_file(path, std_report_to_json(report));
}

void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["input_files"] = m.input_files;
  j["output_files"] = m.output_files;
  j["version"] = m.version;
  j["created_utc"] = m.created_utc;
  dump_json_file(path, j);
}

void write_scatter_csv(const std::filesystem::path& path, CRef<Matrix> points,
                       CRef<Vector> weights, const IndexVector& cells) {
  if (weights.size() != points.rows() || cells.size() != points.rows()) {
    throw input_error("write_scatter_csv: length mismatch");
  }
  auto out = open_out(path);
  for (Index c = 0; c < points.cols(); ++c) out << "y" << (c + 1) << ",";
  out << "weight,cell\n";
  for (Index k = 0; k < points.rows(); ++k) {
    for (Index c = 0; c < points.cols(); ++c) {
      out << format_double(points(k, c)) << ',';
    }
    out << format_double(weights[k]) << ',' << cells[k] << '\n';
  }
}

void write_prototypes_csv(const std::filesystem::path& path,
                          const Codebook& cb, CRef<Vector> masses) {
  if (masses.size() != cb.size()) {
    throw input_error("write_prototypes_csv: length mismatch");
  }
  auto out = open_out(path);
  out << "cell,";
  for (Index c = 0; c < cb.dim(); ++c) out << "y" << (c + 1) << ",";
  out << "mass\n";
  for (Index j = 0; j < cb.size(); ++j) {
    out << j << ',';
    for (Index c = 0; c < cb.dim(); ++c) {
      out << format_double(cb.prototypes(j, c)) << ',';
    }
    out << format_double(masses[j]) << '\n';
  }
}

void write_scatter_svg(const std::filesystem::path& path, CRef<Matrix> points,
                       CRef<Vector> weights, const IndexVector& cells,
                       const Codebook& cb) {
  if (points.cols() < 2 || cb.dim() != points.cols()) {
    throw input_error("write_scatter_svg: need 2-D points and codebook");
  }
  if (weights.size() != points.rows() || cells.size() != points.rows()) {
    throw input_error("write_scatter_svg: length mismatch");
  }
  const Scalar xmin = std::min(points.col(0).minCoeff(),
                               cb.prototypes.col(0).minCoeff());
  const Scalar xmax = std::max(points.col(0).maxCoeff(),
                               cb.prototypes.col(0).maxCoeff());
  const Scalar ymin = std::min(points.col(1).minCoeff(),
                               cb.prototypes.col(1).minCoeff());
  const Scalar ymax = std::max(points.col(1).maxCoeff(),
                               cb.prototypes.col(1).maxCoeff());
  const Scalar xpad = std::max(1e-9, 0.05 * (xmax - xmin));
  const Scalar ypad = std::max(1e-9, 0.05 * (ymax - ymin));
  const Scalar wmax = std::max(weights.maxCoeff(), 1e-300);

  constexpr Scalar kSize = 640.0, kMargin = 46.0;
  const auto sx = [&](Scalar x) {
    return kMargin +
           (x - (xmin - xpad)) / ((xmax + xpad) - (xmin - xpad)) *
               (kSize - 2 * kMargin);
  };
  const auto sy = [&](Scalar y) {
    return kSize - kMargin -
           (y - (ymin - ypad)) / ((ymax + ypad) - (ymin - ypad)) *
               (kSize - 2 * kMargin);
  };

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"640\" viewBox=\"0 0 640 640\">\n";
  out << "<rect x=\"" << svg_num(kMargin) << "\" y=\"" << svg_num(kMargin)
      << "\" width=\"" << svg_num(kSize - 2 * kMargin) << "\" height=\""
      << svg_num(kSize - 2 * kMargin)
      << "\" fill=\"white\" stroke=\"#444444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const Scalar fx = xmin - xpad + t * ((xmax + xpad) - (xmin - xpad)) / 4.0;
    const Scalar fy = ymin - ypad + t * ((ymax + ypad) - (ymin - ypad)) / 4.0;
    out << "<text x=\"" << svg_num(sx(fx)) << "\" y=\""
        << svg_num(kSize - kMargin + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333333\">"
        << svg_num(fx) << "</text>\n";
    out << "<text x=\"" << svg_num(kMargin - 8) << "\" y=\""
        << svg_num(sy(fy) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333333\">"
        << svg_num(fy) << "</text>\n";
  }
  for (Index k = 0; k < points.rows(); ++k) {
    const Scalar r = 1.2 + 6.0 * std::sqrt(weights[k] / wmax);
    out << "<circle cx=\"" << svg_num(sx(points(k, 0))) << "\" cy=\""
        << svg_num(sy(points(k, 1))) << "\" r=\"" << svg_num(r)
        << "\" fill=\"" << cell_color(cells[k])
        << "\" fill-opacity=\"0.55\"/>\n";
  }
  for (Index j = 0; j < cb.size(); ++j) {
    const Scalar cx = sx(cb.prototypes(j, 0));
    const Scalar cy = sy(cb.prototypes(j, 1));
    constexpr Scalar s = 7.0;
    out << "<path d=\"M " << svg_num(cx - s) << ' ' << svg_num(cy - s)
        << " L " << svg_num(cx + s) << ' ' << svg_num(cy + s) << " M "
        << svg_num(cx - s) << ' ' << svg_num(cy + s) << " L "
        << svg_num(cx + s) << ' ' << svg_num(cy - s)
        << "\" stroke=\"black\" stroke-width=\"2.5\" fill=\"none\"/>\n";
  }
  out << "</svg>\n";
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace rareq
