#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "adaclust/dataset.hpp"
#include "adaclust/error.hpp"
#include "adaclust/evaluation.hpp"
#include "adaclust/generator.hpp"
#include "adaclust/model_io.hpp"
#include "adaclust/pipeline.hpp"
#include "adaclust/simd.hpp"

namespace fs = std::filesystem;
using namespace adaclust;

namespace {

constexpr int kDataError = 1;
constexpr int kUsageError = 2;

int report(std::string_view kind, const std::string& message, int code) {
  Json j;
  j["error"] = std::string(kind);
  j["message"] = message;
  j["exit_code"] = code;
  std::cerr << j.dump() << "\n";
  return code;
}

Json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? Json(*v) : Json(nullptr);
}

int resolve_threads(int t) {
  if (t > 0) return t;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::optional<std::string> opt_string(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

// detect ---------------------------------------------------------------------

struct DetectArgs {
  std::string input;
  std::string label_col;
};

int cmd_detect(const DetectArgs& a) {
  const Dataset d = read_csv(a.input, {opt_string(a.label_col)});
  const ModelData md = to_model_domain(d);
  Json out;
  out["n"] = d.rows();
  out["columns"] = Json::array();
  for (std::size_t j = 0; j < d.cols(); ++j) {
    Json c;
    c["name"] = d.names[j];
    c["kind"] = std::string(to_string(d.kinds[j]));
    c["family"] = std::string(to_string(md.families[j].family_class()));
    c["logit"] = static_cast<bool>(md.logit_columns[j]);
    out["columns"].push_back(c);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// fit ------------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string algo = "adacluster";
  std::size_t k = 2;
  std::size_t restarts = 1000;
  int max_iter = 1000;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::string label_col;
  std::string mode;
  std::string out = ".";
  int threads = 0;
  std::optional<double> prior_b_mu, prior_a_kappa, prior_b_kappa;
};

int cmd_fit(const FitArgs& a) {
  RunConfig cfg;
  cfg.algo = algo_from_string(a.algo);
  cfg.K = a.k;
  cfg.restarts = a.restarts;
  cfg.max_iter = a.max_iter;
  cfg.tol = a.tol;
  cfg.seed = a.seed;
  cfg.threads = resolve_threads(a.threads);
  if (a.mode == "ml") cfg.mode = FitMode::ML;
  if (a.mode == "map") cfg.mode = FitMode::MAP;
  cfg.prior_b_mu = a.prior_b_mu;
  cfg.prior_a_kappa = a.prior_a_kappa;
  cfg.prior_b_kappa = a.prior_b_kappa;
  if (cfg.K < 1) throw ConfigError("--k must be at least 1");
  if (cfg.max_iter < 1) throw ConfigError("--max-iter must be at least 1");

  const auto t0 = std::chrono::steady_clock::now();
  const Dataset d = read_csv(a.input, {opt_string(a.label_col)});
  const ModelData md = to_model_domain(d);
  const RunResult res = run(md, cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(a.out);
  const fs::path dir(a.out);

  ModelDocument doc;
  doc.params = res.params;
  doc.logit_columns = md.logit_columns;
  doc.quasi_loglik = res.quasi_loglik;
  doc.config = run_config_json(cfg);
  doc.seed = cfg.seed;
  write_model((dir / "model.json").string(), doc);
  write_assignments((dir / "assignments.csv").string(), res.assign,
                    res.r ? &*res.r : nullptr);

  std::map<std::string, std::size_t> failures;
  for (const auto& r : res.records)
    if (!r.ok) ++failures[r.error_kind];

  Json s;
  s["algo"] = std::string(to_string(cfg.algo));
  s["k"] = cfg.K;
  s["n"] = d.rows();
  s["j"] = d.cols();
  s["mode"] = cfg.effective_mode() == FitMode::ML ? "ml" : "map";
  s["seed"] = cfg.seed;
  s["restarts"] = cfg.restarts;
  s["winning_restart"] = res.best_index;
  s["failed_restarts"] = Json::object();
  for (const auto& [k, v] : failures) s["failed_restarts"][k] = v;
  s["iterations"] = res.iterations;
  s["total_iterations"] = res.total_iterations;
  s["stop_reason"] = res.stop_reason;
  s["quasi_loglik"] = optional_number(res.quasi_loglik);
  s["per_sample_quasi_loglik"] =
      res.quasi_loglik ? optional_number(per_sample(*res.quasi_loglik, d.rows())) : Json(nullptr);
  s["objective"] = optional_number(res.objective);
  s["inertia"] = res.inertia;
  s["nmi"] = d.labels ? Json(nmi(*d.labels, res.assign)) : Json(nullptr);
  s["kinds"] = Json::array();
  for (auto k : d.kinds) s["kinds"].push_back(std::string(to_string(k)));
  s["alpha"] = res.params.alpha;
  write_text((dir / "summary.json").string(), s.dump(2) + "\n");

  Json t;
  t["wall_seconds"] = wall;
  t["threads"] = cfg.threads;
  t["simd"] = std::string(simd::isa_name(simd::active_isa()));
  write_text((dir / "timing.json").string(), t.dump(2) + "\n");

  std::cout << s.dump(2) << "\n";
  return 0;
}

// generate -------------------------------------------------------------------

struct GenerateArgs {
  std::string spec;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

template <class T>
void read_field(const Json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

int cmd_generate(const GenerateArgs& a) {
  Json js = a.spec.empty() ? Json::object() : read_json(a.spec);
  GeneratorSpec spec;
  std::string layout = "heterogeneous";
  std::string member;
  try {
    read_field(js, "N", spec.N);
    read_field(js, "J", spec.J);
    read_field(js, "K", spec.K);
    read_field(js, "dirichlet_concentration", spec.dirichlet_concentration);
    read_field(js, "kappa_shape", spec.kappa_shape);
    read_field(js, "kappa_scale", spec.kappa_scale);
    read_field(js, "separation", spec.separation);
    read_field(js, "max_proposals", spec.max_proposals);
    read_field(js, "redraw_after", spec.redraw_after);
    read_field(js, "seed", spec.seed);
    read_field(js, "layout", layout);
    read_field(js, "member", member);
    if (js.contains("members"))
      for (const auto& m : js.at("members")) spec.members.push_back(member_from_string(m.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("generator spec: " + std::string(e.what()));
  }
  if (a.seed) spec.seed = *a.seed;

  GeneratedData g;
  if (layout == "heterogeneous") {
    g = generate_heterogeneous(spec);
  } else if (layout == "homogeneous_1d") {
    if (member.empty()) throw ConfigError("homogeneous_1d layout needs a member");
    Rng rng(spec.seed);
    g = generate_homogeneous_1d(member_from_string(member), spec.K, spec.N, rng, spec.separation);
  } else {
    throw ConfigError("unknown layout '" + layout + "'");
  }

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  write_csv((dir / "data.csv").string(), g.data);

  ModelDocument doc;
  doc.params = g.truth;
  doc.logit_columns.assign(g.truth.J(), false);
  Json cfg;
  cfg["layout"] = layout;
  cfg["N"] = spec.N;
  cfg["J"] = g.truth.J();
  cfg["K"] = g.truth.K();
  cfg["separation"] = spec.separation;
  cfg["members"] = Json::array();
  for (auto m : g.members) cfg["members"].push_back(std::string(to_string(m)));
  cfg["kinds"] = Json::array();
  for (auto k : g.data.kinds) cfg["kinds"].push_back(std::string(to_string(k)));
  doc.config = cfg;
  doc.seed = spec.seed;
  write_model((dir / "truth.json").string(), doc);
  std::cout << cfg.dump(2) << "\n";
  return 0;
}

// eval -----------------------------------------------------------------------

struct EvalArgs {
  std::string assignments;
  std::string truth;
  std::string label_col = "label";
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const auto pred = read_assignments(a.assignments);
  const Dataset t = read_csv(a.truth, {a.label_col});
  if (!t.labels) throw ParseError("no labels in " + a.truth);
  const auto table = ContingencyTable::build(*t.labels, pred);
  Json out;
  out["n"] = table.total;
  out["classes"] = table.n_true();
  out["clusters"] = table.n_pred();
  out["nmi"] = nmi(*t.labels, pred);
  if (!a.out.empty()) write_text(a.out, out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return 0;
}

// qq -------------------------------------------------------------------------

struct QqArgs {
  std::string data;
  std::string model;
  std::size_t column = 0;
  std::size_t q = 100;
  std::uint64_t seed = 0;
  std::string label_col;
  std::string out;
};

int cmd_qq(const QqArgs& a) {
  const Dataset d = read_csv(a.data, {opt_string(a.label_col)});
  const ModelData md = to_model_domain(d);
  const ModelDocument doc = read_model(a.model);
  const std::size_t j = a.column;
  if (j >= md.X.cols() || j >= doc.params.J())
    throw ConfigError("--column " + std::to_string(j) + " is out of range");

  MixtureParams p;
  p.pi = doc.params.pi;
  p.mu = Matrix(p.pi.size(), 1);
  for (std::size_t h = 0; h < p.pi.size(); ++h) p.mu(h, 0) = doc.params.mu(h, j);
  p.kappa = {doc.params.kappa[j]};
  p.alpha = {doc.params.alpha[j]};
  p.families = {doc.params.families[j]};
  const auto member = named_member(p.families[0], p.alpha[0]);
  if (!member)
    throw ConfigError("column " + std::to_string(j) + " has no named member to sample from (alpha " +
                      std::to_string(p.alpha[0]) + ")");

  Rng rng(a.seed);
  const Matrix sim = sample_mixture(p, {*member}, md.X.rows(), rng);
  std::vector<double> x(md.X.rows());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = md.X(i, j);
  const auto pairs = qq_quantiles(x, std::vector<double>(sim.flat().begin(), sim.flat().end()), a.q);

  std::ostringstream os;
  os << std::setprecision(17) << "index,prob,data,model\n";
  for (std::size_t k = 0; k < pairs.size(); ++k)
    os << k << "," << static_cast<double>(k) / static_cast<double>(a.q - 1) << ","
       << pairs[k].first << "," << pairs[k].second << "\n";
  if (a.out.empty())
    std::cout << os.str();
  else
    write_text(a.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering of heterogeneous data with adaptive exponential-family topologies"};
  app.require_subcommand(1);

  DetectArgs detect;
  auto* sd = app.add_subcommand("detect", "Report the attribute kind and family of each column");
  sd->add_option("input", detect.input, "CSV file")->required();
  sd->add_option("--label-col", detect.label_col, "Column holding ground-truth labels");

  FitArgs fit;
  auto* sf = app.add_subcommand("fit", "Cluster a CSV file");
  sf->add_option("input", fit.input, "CSV file")->required();
  sf->add_option("--algo", fit.algo)
      ->check(CLI::IsMember({"adacluster", "bregman-soft", "gmm", "kmeans", "gmom-hc", "gmom-light"}))
      ->capture_default_str();
  sf->add_option("--k", fit.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  sf->add_option("--restarts", fit.restarts)->check(CLI::PositiveNumber)->capture_default_str();
  sf->add_option("--max-iter", fit.max_iter)->check(CLI::PositiveNumber)->capture_default_str();
  sf->add_option("--tol", fit.tol)->check(CLI::NonNegativeNumber)->capture_default_str();
  sf->add_option("--seed", fit.seed)->capture_default_str();
  sf->add_option("--label-col", fit.label_col, "Column holding ground-truth labels");
  sf->add_option("--mode", fit.mode, "ml or map; default depends on the algorithm")
      ->check(CLI::IsMember({"ml", "map"}));
  sf->add_option("--out", fit.out, "Output directory")->capture_default_str();
  sf->add_option("--threads", fit.threads, "Worker threads, 0 for all cores")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sf->add_option("--prior-b-mu", fit.prior_b_mu, "Pseudo-count of the mean prior")
      ->check(CLI::NonNegativeNumber);
  sf->add_option("--prior-a-kappa", fit.prior_a_kappa, "Shape of the dispersion prior")
      ->check(CLI::NonNegativeNumber);
  sf->add_option("--prior-b-kappa", fit.prior_b_kappa, "Scale of the dispersion prior")
      ->check(CLI::NonNegativeNumber);

  GenerateArgs gen;
  std::uint64_t gen_seed = 0;
  auto* sg = app.add_subcommand("generate", "Write a synthetic mixture and its true parameters");
  sg->add_option("spec", gen.spec, "Generator spec JSON (defaults when omitted)");
  sg->add_option("--out", gen.out, "Output directory")->capture_default_str();
  auto* seed_opt = sg->add_option("--seed", gen_seed, "Overrides the spec seed");

  EvalArgs ev;
  auto* se = app.add_subcommand("eval", "Score assignments against ground truth");
  se->add_option("assignments", ev.assignments, "assignments.csv from fit")->required();
  se->add_option("--truth", ev.truth, "CSV with a label column")->required();
  se->add_option("--label-col", ev.label_col)->capture_default_str();
  se->add_option("--out", ev.out, "Write the metrics JSON here as well");

  QqArgs qq;
  auto* sq = app.add_subcommand("qq", "Quantile pairs of data against samples from a model");
  sq->add_option("data", qq.data, "CSV file")->required();
  sq->add_option("--model", qq.model, "model.json from fit")->required();
  sq->add_option("--column", qq.column)->capture_default_str();
  sq->add_option("--q", qq.q, "Number of quantiles")->capture_default_str();
  sq->add_option("--seed", qq.seed)->capture_default_str();
  sq->add_option("--label-col", qq.label_col);
  sq->add_option("--out", qq.out, "CSV output; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("UsageError", e.what(), kUsageError);
  }

  try {
    if (*sd) return cmd_detect(detect);
    if (*sf) return cmd_fit(fit);
    if (*sg) {
      if (*seed_opt) gen.seed = gen_seed;
      return cmd_generate(gen);
    }
    if (*se) return cmd_eval(ev);
    if (*sq) return cmd_qq(qq);
  } catch (const ConfigError& e) {
    return report(e.kind(), e.what(), kUsageError);
  } catch (const Error& e) {
    return report(e.kind(), e.what(), kDataError);
  } catch (const fs::filesystem_error& e) {
    return report("IoError", e.what(), kDataError);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), kDataError);
  }
  return kUsageError;
}
