#include "adaclust/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "adaclust/error.hpp"

namespace adaclust {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cell += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool is_integer(double v) { return std::fabs(v - std::round(v)) < 1e-9; }

}  // namespace

Dataset read_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty; a header row is required");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  std::size_t label_idx = header.size();
  if (options.label_col) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == *options.label_col) label_idx = c;
    if (label_idx == header.size())
      throw ParseError("label column '" + *options.label_col + "' not found in '" + path + "'");
  }

  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_idx) data.names.push_back(header[c]);
  const std::size_t J = data.names.size();

  std::vector<double> flat;
  std::vector<int> labels;
  std::map<std::string, int> label_ids;
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ParseError("row " + std::to_string(row + 1) + " (line " + std::to_string(line_no) +
                       ") has " + std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (c == label_idx) {
        auto [it, inserted] = label_ids.try_emplace(cell, static_cast<int>(label_ids.size()));
        labels.push_back(it->second);
        continue;
      }
      double v;
      if (!parse_double(cell, v))
        throw ParseError("non-numeric cell '" + cell + "' at row " + std::to_string(row + 1) +
                         ", column '" + header[c] + "'");
      flat.push_back(v);
    }
    ++row;
  }
  if (row == 0) throw ParseError("'" + path + "' has no data rows");

  data.values = Matrix(row, J);
  std::copy(flat.begin(), flat.end(), data.values.flat().begin());
  data.kinds = detect_kinds(data.values);
  if (options.label_col) data.labels = std::move(labels);
  return data;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < data.cols(); ++j) {
    if (j) out << ',';
    out << (j < data.names.size() ? data.names[j] : "x" + std::to_string(j));
  }
  if (data.labels) out << ",label";
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (j) out << ',';
      out << data.values(i, j);
    }
    if (data.labels) out << ',' << (*data.labels)[i];
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

AttributeKind detect_kind(const std::vector<double>& column) {
  bool discrete = true;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : column) {
    discrete = discrete && is_integer(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (discrete) {
    if (lo > 0.0) return AttributeKind::PositiveDiscrete;
    if (lo >= 0.0) return AttributeKind::NonNegativeDiscrete;
    return AttributeKind::RealContinuous;
  }
  if (lo > 0.0 && hi < 1.0) return AttributeKind::UnitInterval;
  if (lo > 0.0) return AttributeKind::PositiveContinuous;
  if (lo >= 0.0) return AttributeKind::NonNegativeContinuous;
  return AttributeKind::RealContinuous;
}

std::vector<AttributeKind> detect_kinds(const Matrix& values) {
  std::vector<AttributeKind> kinds;
  for (std::size_t j = 0; j < values.cols(); ++j) kinds.push_back(detect_kind(values.col(j)));
  return kinds;
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("logit needs a value strictly inside (0, 1)");
  return std::log(p) - std::log1p(-p);
}

double inverse_logit(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

std::vector<double> logit(const std::vector<double>& p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = logit(p[i]);
  return out;
}

std::vector<double> inverse_logit(const std::vector<double>& z) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = inverse_logit(z[i]);
  return out;
}

ModelData to_model_domain(const Dataset& data) {
  ModelData m{data.values, {}, std::vector<bool>(data.cols(), false)};
  for (std::size_t j = 0; j < data.cols(); ++j) {
    AttributeKind kind = data.kinds.at(j);
    if (kind == AttributeKind::UnitInterval) {
      for (std::size_t i = 0; i < m.X.rows(); ++i) m.X(i, j) = logit(m.X(i, j));
      m.logit_columns[j] = true;
      kind = AttributeKind::RealContinuous;
    }
    m.families.push_back(FamilySpec::for_kind(kind));
  }
  return m;
}

}  // namespace adaclust
