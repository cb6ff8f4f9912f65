#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adaclust/edm.hpp"
#include "adaclust/matrix.hpp"

namespace adaclust {

struct Dataset {
  Matrix values;
  std::vector<AttributeKind> kinds;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> names;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
};

struct CsvOptions {
  // Column holding ground-truth labels; excluded from the attributes.
  std::optional<std::string> label_col;
};

// Header row required. Numeric cells only, except in the label column, whose
// values are mapped to 0, 1, ... in order of first appearance.
Dataset read_csv(const std::string& path, const CsvOptions& options = {});
// Labels, when present, are written as a trailing "label" column.
void write_csv(const std::string& path, const Dataset& data);

AttributeKind detect_kind(const std::vector<double>& column);
std::vector<AttributeKind> detect_kinds(const Matrix& values);

double logit(double p);
double inverse_logit(double z);
std::vector<double> logit(const std::vector<double>& p);
std::vector<double> inverse_logit(const std::vector<double>& z);

// Data in the domain the models work on: unit-interval columns are
// logit-transformed and every column gets its family.
struct ModelData {
  Matrix X;
  std::vector<FamilySpec> families;
  std::vector<bool> logit_columns;
};
ModelData to_model_domain(const Dataset& data);

}  // namespace adaclust
