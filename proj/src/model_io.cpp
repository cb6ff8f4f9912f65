#include "adaclust/model_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "adaclust/dataset.hpp"
#include "adaclust/error.hpp"

namespace adaclust {
namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("model document lacks '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model field '") + key + "': " + e.what());
  }
}

}  // namespace

Json model_to_json(const ModelDocument& doc) {
  const MixtureParams& p = doc.params;
  Json j;
  Json fams = Json::array();
  for (std::size_t c = 0; c < p.J(); ++c) {
    Json f;
    f["class"] = std::string(to_string(p.families[c].family_class()));
    f["support"] = std::string(to_string(p.families[c].support()));
    f["logit"] = c < doc.logit_columns.size() && doc.logit_columns[c];
    fams.push_back(std::move(f));
  }
  j["families"] = std::move(fams);
  j["alpha"] = Json::array();
  for (double a : p.alpha) j["alpha"].push_back(number(a));
  j["kappa"] = Json::array();
  for (double k : p.kappa) j["kappa"].push_back(number(k));
  j["pi"] = Json::array();
  for (double w : p.pi) j["pi"].push_back(number(w));
  j["mu"] = Json::array();
  for (std::size_t h = 0; h < p.K(); ++h) {
    Json row = Json::array();
    for (std::size_t c = 0; c < p.J(); ++c) row.push_back(number(p.mu(h, c)));
    j["mu"].push_back(std::move(row));
  }
  j["quasi_loglik"] = doc.quasi_loglik ? number(*doc.quasi_loglik) : Json(nullptr);
  j["config"] = doc.config;
  j["seed"] = doc.seed;
  return j;
}

ModelDocument model_from_json(const Json& j) {
  ModelDocument doc;
  MixtureParams& p = doc.params;
  for (const auto& f : field<Json>(j, "families")) {
    const auto cls = family_class_from_string(f.at("class").get<std::string>());
    const auto support = attribute_kind_from_string(f.at("support").get<std::string>());
    FamilySpec spec = FamilySpec::for_kind(support);
    if (spec.family_class() != cls) throw ParseError("family class does not match its support");
    p.families.push_back(spec);
    doc.logit_columns.push_back(f.value("logit", false));
  }
  p.alpha = field<std::vector<double>>(j, "alpha");
  p.kappa = field<std::vector<double>>(j, "kappa");
  p.pi = field<std::vector<double>>(j, "pi");
  const auto mu = field<std::vector<std::vector<double>>>(j, "mu");
  p.mu = Matrix(mu.size(), p.J());
  for (std::size_t h = 0; h < mu.size(); ++h) {
    if (mu[h].size() != p.J()) throw ParseError("mu row length differs from attribute count");
    for (std::size_t c = 0; c < p.J(); ++c) p.mu(h, c) = mu[h][c];
  }
  if (j.contains("quasi_loglik") && j["quasi_loglik"].is_number())
    doc.quasi_loglik = j["quasi_loglik"].get<double>();
  if (j.contains("config")) doc.config = j["config"];
  if (j.contains("seed")) doc.seed = j["seed"].get<std::uint64_t>();
  p.validate();
  return doc;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

void write_model(const std::string& path, const ModelDocument& doc) {
  write_text(path, model_to_json(doc).dump(2) + "\n");
}

ModelDocument read_model(const std::string& path) {
  try {
    return model_from_json(read_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

void write_assignments(const std::string& path, const std::vector<int>& assign,
                       const Responsibilities* r) {
  if (r && r->rows() != assign.size()) throw LengthMismatch("responsibilities and assignments differ in length");
  std::ostringstream out;
  out << "row_index,cluster";
  if (r)
    for (std::size_t h = 0; h < r->cols(); ++h) out << ",r_" << h;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < assign.size(); ++i) {
    out << i << ',' << assign[i];
    if (r)
      for (std::size_t h = 0; h < r->cols(); ++h) out << ',' << (*r)(i, h);
    out << '\n';
  }
  write_text(path, out.str());
}

std::vector<int> read_assignments(const std::string& path) {
  const Dataset d = read_csv(path);
  std::size_t col = d.names.size();
  for (std::size_t c = 0; c < d.names.size(); ++c)
    if (d.names[c] == "cluster") col = c;
  if (col == d.names.size()) throw ParseError("'" + path + "' has no 'cluster' column");
  std::vector<int> out;
  for (std::size_t i = 0; i < d.rows(); ++i) out.push_back(static_cast<int>(d.values(i, col)));
  return out;
}

}  // namespace adaclust
