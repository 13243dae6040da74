#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "psmc/datagen.hpp"

namespace psmc {

namespace {

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(delimiter, start);
    cells.push_back(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

IngestResult ingest_csv(const TabularSource& source, int n_features, Eigen::Index n_rows) {
  if (n_features < 1) throw PreconditionError("ingest: n_features must be >= 1");
  if (n_rows < 1) throw PreconditionError("ingest: n_rows must be >= 1");
  std::ifstream in(source.path);
  if (!in) throw IoError("cannot open " + source.path.string());

  RowMatrix rows(n_rows, n_features + 1);
  Eigen::Index filled = 0;
  std::string line;
  std::size_t lineno = 0;
  std::optional<bool> header = source.has_header;
  std::size_t width = 0;

  while (filled < n_rows && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, source.delimiter);
    if (!header) header = !parse_number(cells.front()).has_value();
    if (lineno == 1 && *header) continue;
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                       std::to_string(cells.size()),
                       lineno);
    }
    const int label_col = source.label_column >= 0
                              ? source.label_column
                              : static_cast<int>(cells.size()) + source.label_column;
    if (label_col < 0 || label_col >= static_cast<int>(cells.size())) {
      throw ParseError("label column out of range", lineno);
    }
    if (n_features > static_cast<int>(cells.size())) {
      throw ParseError("row has fewer than " + std::to_string(n_features) + " columns", lineno);
    }
    for (int j = 0; j < n_features; ++j) {
      const auto v = parse_number(cells[static_cast<std::size_t>(j)]);
      if (!v) {
        throw ParseError("column " + std::to_string(j + 1) + " is not a finite number", lineno);
      }
      rows(filled, j) = *v;
    }
    const auto label = parse_number(cells[static_cast<std::size_t>(label_col)]);
    if (!label) throw ParseError("label is not a finite number", lineno);
    rows(filled, n_features) = *label == source.positive_label ? 1.0 : 0.0;
    ++filled;
  }
  if (filled < n_rows) {
    throw InsufficientRows("requested " + std::to_string(n_rows) + " rows but " +
                           source.path.string() + " has " + std::to_string(filled));
  }

  IngestResult result;
  for (int j = 0; j < n_features; ++j) {
    auto col = rows.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().mean());
    if (!(sd > 0.0)) {
      throw DegenerateSample("feature column " + std::to_string(j + 1) + " is constant");
    }
    col = (col.array() - mean) / sd;
    // second pass removes the rounding left by the first
    const double residual = col.mean();
    col.array() -= residual;
    result.report.feature_means.push_back(mean);
    result.report.feature_sds.push_back(sd);
  }
  for (int j = 1; j <= n_features; ++j) result.data.columns.push_back("x" + std::to_string(j));
  result.data.columns.push_back("y");
  result.report.rows = n_rows;
  result.report.positive_fraction = rows.col(n_features).mean();
  std::ostringstream rule;
  rule << "y = 1 iff column " << source.label_column << " == " << source.positive_label;
  result.report.label_rule = rule.str();
  result.data.rows = std::move(rows);
  return result;
}

}  // namespace psmc
