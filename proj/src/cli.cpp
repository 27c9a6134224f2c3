#include "sglpath/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "sglpath/cv.hpp"
#include "sglpath/io.hpp"
#include "sglpath/model.hpp"
#include "sglpath/penalty.hpp"
#include "sglpath/risk.hpp"
#include "sglpath/solver.hpp"

namespace sgl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class NotConverged : public Error {
 public:
  using Error::Error;
};

struct ProblemArgs {
  std::string x;
  std::string x_format = "auto";
  std::string y;
  std::string groups;
  std::string group_weights;
  std::string feature_weights;
  std::string bounds_file;
  std::string lambda_file;
  std::string family = "gaussian";
  double alpha = 0.95;
  Index nlambda = 100;
  double lambda_min_ratio = 0.0;
  bool has_lambda_min_ratio = false;
  double tol = 1e-8;
  Index max_visits = 3'000'000;
  bool no_intercept = false;
  bool standardize = false;
  bool no_screening = false;
  bool strict = false;
  std::string out;
};

struct CvArgs {
  Index nfolds = 10;
  std::string loss;
  std::uint64_t seed = 1;
  unsigned jobs = 0;
};

struct RiskArgs {
  std::string fit;
  std::string x;
  std::string x_format = "auto";
  std::string y;
  bool approx_df = false;
  std::string out;
};

struct PredictArgs {
  std::string fit;
  std::string x;
  std::string x_format = "auto";
  std::vector<std::string> s;
  std::string type = "link";
  std::string cv;
  std::string out;
};

struct LoadedProblem {
  DesignMatrix x;
  std::vector<double> y;
  GroupStructure groups;
  FitConfig config;
  json manifest;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json file_entry(const fs::path& file) {
  return {{"path", file.string()}, {"digest", io::file_digest(file)}};
}

void add_problem_options(CLI::App& cmd, ProblemArgs& a) {
  cmd.add_option("--x", a.x, "Design matrix (dense CSV with header, or MatrixMarket)")->required();
  cmd.add_option("--x-format", a.x_format, "auto, csv or mtx");
  cmd.add_option("--y", a.y, "Response, one value per line")->required();
  cmd.add_option("--groups", a.groups, "Group id per feature, or size:k")->required();
  cmd.add_option("--group-weights", a.group_weights, "One weight per group");
  cmd.add_option("--feature-weights", a.feature_weights, "One l1 weight per feature");
  cmd.add_option("--bounds-file", a.bounds_file, "lower,upper per feature");
  cmd.add_option("--alpha", a.alpha, "Mixing parameter in [0, 1]");
  cmd.add_option("--nlambda", a.nlambda, "Number of lambda values");
  cmd.add_option("--lambda-min-ratio", a.lambda_min_ratio, "Smallest lambda as a fraction of lambda_max");
  cmd.add_option("--lambda-file", a.lambda_file, "Decreasing lambda values, one per line");
  cmd.add_option("--family", a.family, "gaussian or binomial");
  cmd.add_option("--tol", a.tol, "Convergence tolerance");
  cmd.add_option("--max-visits", a.max_visits, "Group update budget per lambda");
  cmd.add_flag("--no-intercept", a.no_intercept, "Do not fit an intercept");
  cmd.add_flag("--standardize", a.standardize, "Scale columns to unit variance before fitting");
  cmd.add_flag("--no-screening", a.no_screening, "Visit every group in every sweep");
  cmd.add_flag("--strict", a.strict, "Exit 3 if any lambda fails to converge");
  cmd.add_option("--out", a.out, "Output directory")->required();
}

std::vector<double> read_sized(const std::string& file, Index expected, const std::string& what) {
  auto v = io::read_vector(file);
  if (static_cast<Index>(v.size()) != expected) {
    throw io::InputError(file, 0, "has " + std::to_string(v.size()) + " values but " +
                                      std::to_string(expected) + " " + what + " are expected");
  }
  return v;
}

LoadedProblem load_problem(const ProblemArgs& a, CLI::App& cmd) {
  LoadedProblem lp;
  lp.x = io::read_design(a.x, io::parse_design_format(a.x_format));
  const Index n = lp.x.rows();
  const Index p = lp.x.cols();
  lp.y = read_sized(a.y, n, "rows of the design");
  lp.groups = io::read_groups(a.groups, p);

  auto& c = lp.config;
  c.family = parse_family(a.family);
  try {
    prepare_response(lp.y, c.family);
  } catch (const io::InputError&) {
    throw;
  } catch (const Error& e) {
    throw io::InputError(a.y, 0, e.what());
  }
  c.alpha = a.alpha;
  c.nlambda = a.nlambda;
  if (cmd.count("--lambda-min-ratio") > 0) c.lambda_min_ratio = a.lambda_min_ratio;
  c.tol = a.tol;
  c.max_group_visits = a.max_visits;
  c.intercept = !a.no_intercept;
  c.standardize = a.standardize;
  c.screening = a.no_screening ? Screening::kNone : Screening::kStrongRule;

  json inputs{{"x", file_entry(a.x)}, {"y", file_entry(a.y)}};
  inputs["x"]["format"] = a.x_format;
  if (a.groups.rfind("size:", 0) == 0) {
    inputs["groups"] = {{"spec", a.groups}};
  } else {
    inputs["groups"] = file_entry(a.groups);
  }
  if (!a.group_weights.empty()) {
    c.group_weights = read_sized(a.group_weights, lp.groups.n_groups(), "groups");
    inputs["group_weights"] = file_entry(a.group_weights);
  }
  if (!a.feature_weights.empty()) {
    c.feature_weights = read_sized(a.feature_weights, p, "features");
    inputs["feature_weights"] = file_entry(a.feature_weights);
  }
  if (!a.bounds_file.empty()) {
    auto [lo, hi] = io::read_bounds(a.bounds_file);
    if (static_cast<Index>(lo.size()) != p) {
      throw io::InputError(a.bounds_file, 0, "has " + std::to_string(lo.size()) +
                                                 " rows but the design has " + std::to_string(p) +
                                                 " columns");
    }
    c.lower_bounds = std::move(lo);
    c.upper_bounds = std::move(hi);
    inputs["bounds"] = file_entry(a.bounds_file);
  }
  if (!a.lambda_file.empty()) {
    c.lambdas = io::read_vector(a.lambda_file);
    inputs["lambdas"] = file_entry(a.lambda_file);
  }
  c.validate();

  lp.manifest = {
      {"tool", "sglpath"},
      {"version", kVersion},
      {"inputs", inputs},
      {"n", n},
      {"p", p},
      {"n_groups", lp.groups.n_groups()},
      {"config",
       {{"family", std::string(family_name(c.family))},
        {"alpha", c.alpha},
        {"nlambda", c.lambdas.empty() ? c.nlambda : static_cast<Index>(c.lambdas.size())},
        {"lambda_min_ratio", c.lambda_min_ratio ? json(*c.lambda_min_ratio) : json(nullptr)},
        {"tol", c.tol},
        {"max_group_visits", c.max_group_visits},
        {"intercept", c.intercept},
        {"standardize", c.standardize},
        {"screening", a.no_screening ? "none" : "strong"},
        {"kkt_slack", c.kkt_slack},
        {"strict", a.strict}}},
  };
  return lp;
}

void write_lines(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
}

void write_summary(const fs::path& dir, const SolutionPath& path) {
  const auto summary = path_summary(path);
  std::string rows = "lambda,index,nnzero,active_grps\n";
  for (const auto& r : summary.rows) {
    rows += io::format_double(r.lambda) + "," + std::to_string(r.index) + "," +
            std::to_string(r.nnzero) + "," + std::to_string(r.active_groups) + "\n";
  }
  write_lines(dir / "summary.csv", rows);
  std::string quant = "stat,lambda,index,nnzero,active_grps\n";
  for (const auto& r : summary.quantiles) {
    quant += r.label + "," + io::format_double(r.lambda) + "," + std::to_string(r.index) + "," +
             std::to_string(r.nnzero) + "," + std::to_string(r.active_groups) + "\n";
  }
  write_lines(dir / "summary_quantiles.csv", quant);
}

// Plot data: every feature (group) that is non-zero somewhere on the path, at every lambda.
void write_traces(const fs::path& dir, const SolutionPath& path) {
  const Index p = path.n_features();
  const Index m = path.size();
  const auto& groups = path.groups;
  std::vector<char> ever(static_cast<std::size_t>(p), 0);
  for (Index j : path.coefficients.row_idx()) ever[j] = 1;

  PenaltyParams unit;
  unit.alpha = path.alpha;
  unit.lambda = 1.0;
  unit.group_weights = path.group_weights;
  unit.feature_weights = path.feature_weights;

  std::ofstream coef(dir / "coef_trace.csv", std::ios::binary | std::ios::trunc);
  std::ofstream norms(dir / "group_norms.csv", std::ios::binary | std::ios::trunc);
  if (!coef || !norms) throw Error("cannot write trace files in " + dir.string());
  coef << "lambda_index,lambda,penalty,feature,group,value\n";
  norms << "lambda_index,lambda,penalty,group,norm\n";
  for (Index k = 0; k < m; ++k) {
    const auto beta = path.beta(k);
    const std::string lam = io::format_double(path.lambdas[k]);
    const std::string pen = io::format_double(penalty_value(beta, unit, groups));
    for (Index g = 0; g < groups.n_groups(); ++g) {
      const auto cols = groups.range(g);
      bool show = false;
      double ss = 0.0;
      for (Index j = cols.begin; j < cols.end; ++j) {
        if (!ever[j]) continue;
        show = true;
        ss += beta[j] * beta[j];
        coef << k + 1 << ',' << lam << ',' << pen << ',' << j + 1 << ',' << g + 1 << ','
             << io::format_double(beta[j]) << '\n';
      }
      if (show) {
        norms << k + 1 << ',' << lam << ',' << pen << ',' << g + 1 << ','
              << io::format_double(std::sqrt(ss)) << '\n';
      }
    }
  }
}

void write_fit_outputs(const fs::path& dir, const SolutionPath& path, const json& manifest) {
  io::write_path(dir, path, manifest);
  write_summary(dir, path);
  write_traces(dir, path);
}

void write_timing(const fs::path& dir, const std::string& started,
                  std::chrono::steady_clock::time_point t0) {
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json timing{{"started", started}, {"finished", utc_now()}, {"elapsed_seconds", secs}};
  write_lines(dir / "timing.json", timing.dump(2) + "\n");
}

void report_convergence(const SolutionPath& path, bool strict) {
  if (path.all_converged() && !path.truncated) return;
  Index bad = 0;
  for (Index k = 0; k < static_cast<Index>(path.diagnostics.size()); ++k) {
    if (!path.diagnostics[k].converged) {
      bad = k + 1;
      break;
    }
  }
  const std::string msg = "lambda index " + std::to_string(bad) +
                          " did not converge; the path was truncated after " +
                          std::to_string(path.size()) + " values";
  if (strict) throw NotConverged(msg);
  std::cerr << "sglpath: warning: " << msg << "\n";
}

int cmd_fit(const ProblemArgs& a, CLI::App& cmd) {
  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  auto lp = load_problem(a, cmd);
  lp.manifest["command"] = "fit";
  const auto path = fit_path(lp.x, lp.y, lp.groups, lp.config);
  write_fit_outputs(a.out, path, lp.manifest);
  write_timing(a.out, started, t0);
  report_convergence(path, a.strict);
  return kExitOk;
}

unsigned default_jobs() {
  if (const char* env = std::getenv("SGL_PATH_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw Error(std::string("SGL_PATH_JOBS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_cv(const ProblemArgs& a, const CvArgs& c, CLI::App& cmd) {
  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  auto lp = load_problem(a, cmd);
  CvOptions opts;
  opts.nfolds = c.nfolds;
  opts.seed = c.seed;
  opts.jobs = c.jobs > 0 ? c.jobs : default_jobs();
  opts.loss = c.loss.empty() ? (lp.config.family == Family::kGaussian ? CvLoss::kMse : CvLoss::kDeviance)
                             : parse_cv_loss(c.loss);
  check_loss_family(opts.loss, lp.config.family);

  lp.manifest["command"] = "cv";
  lp.manifest["cv"] = {{"nfolds", opts.nfolds}, {"loss", std::string(cv_loss_name(opts.loss))}, {"seed", opts.seed}};
  const auto res = cross_validate(lp.x, lp.y, lp.groups, lp.config, opts);
  write_fit_outputs(a.out, res.full_fit, lp.manifest);

  std::string table = "lambda,mean,se\n";
  for (std::size_t k = 0; k < res.lambdas.size(); ++k) {
    table += io::format_double(res.lambdas[k]) + "," + io::format_double(res.mean[k]) + "," +
             io::format_double(res.se[k]) + "\n";
  }
  write_lines(fs::path(a.out) / "cv.csv", table);
  const json selection{{"lambda_min", res.lambda_min},
                       {"lambda_1se", res.lambda_1se},
                       {"index_min", res.index_min + 1},
                       {"index_1se", res.index_1se + 1},
                       {"loss", std::string(cv_loss_name(res.loss))},
                       {"nfolds", opts.nfolds},
                       {"seed", opts.seed},
                       {"fits", res.fits},
                       {"diagnostics", res.diagnostics}};
  write_lines(fs::path(a.out) / "selection.json", selection.dump(2) + "\n");
  write_timing(a.out, started, t0);
  for (const auto& d : res.diagnostics) std::cerr << "sglpath: warning: " << d << "\n";
  report_convergence(res.full_fit, a.strict);
  return kExitOk;
}

std::string manifest_input(const json& manifest, const char* key) {
  try {
    return manifest.at("inputs").at(key).at("path").get<std::string>();
  } catch (const json::exception&) {
    return {};
  }
}

// Re-expresses a standardized fit on the scale the solver worked in.
std::pair<DesignMatrix, SolutionPath> standardized_problem(const DesignMatrix& x, SolutionPath path) {
  const Index n = x.rows();
  const Index p = x.cols();
  std::vector<double> scale(static_cast<std::size_t>(p), 1.0);
  std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  for (Index j = 0; j < p; ++j) {
    const double mean = path.intercept ? x.column_dot(j, ones) / static_cast<double>(n) : 0.0;
    const double var = x.column_squared_norm(j) / static_cast<double>(n) - mean * mean;
    if (var > 0.0) scale[j] = 1.0 / std::sqrt(var);
  }
  std::vector<Triplet> t;
  for (Index k = 0; k < path.size(); ++k) {
    const auto rows = path.coefficients.column_rows(k);
    const auto vals = path.coefficients.column_values(k);
    for (std::size_t e = 0; e < rows.size(); ++e) t.push_back({rows[e], k, vals[e] / scale[rows[e]]});
  }
  path.coefficients = SparseColumnMatrix::from_triplets(p, path.size(), t);
  return {x.scale_columns(scale), std::move(path)};
}

int cmd_risk(const RiskArgs& a) {
  const auto stored = io::read_path(a.fit);
  const auto& path = stored.path;
  if (path.family != Family::kGaussian) {
    throw io::InputError(fs::path(a.fit) / "path.json", 0, "risk estimation is gaussian only");
  }
  const std::string x_file = a.x.empty() ? manifest_input(stored.manifest, "x") : a.x;
  const std::string y_file = a.y.empty() ? manifest_input(stored.manifest, "y") : a.y;
  if (x_file.empty() || y_file.empty()) throw Error("--x and --y are required (not recorded in the fit)");
  const auto x = io::read_design(x_file, io::parse_design_format(a.x_format));
  if (x.cols() != path.n_features()) {
    throw io::InputError(x_file, 0, "has " + std::to_string(x.cols()) + " columns but the fit has " +
                                        std::to_string(path.n_features()) + " features");
  }
  const auto y = read_sized(y_file, x.rows(), "rows of the design");

  const bool standardized = stored.manifest.value("config", json::object()).value("standardize", false);
  RiskEstimates risk;
  if (standardized) {
    const auto [xs, ps] = standardized_problem(x, path);
    risk = estimate_risk(ps, xs, y, a.approx_df);
  } else {
    risk = estimate_risk(path, x, y, a.approx_df);
  }

  const fs::path out = a.out.empty() ? fs::path(a.fit) : fs::path(a.out);
  fs::create_directories(out);
  std::string table = "lambda,df,aic,bic,gcv,mse\n";
  for (std::size_t k = 0; k < risk.lambdas.size(); ++k) {
    table += io::format_double(risk.lambdas[k]) + "," + io::format_double(risk.df[k]) + "," +
             io::format_double(risk.aic[k]) + "," + io::format_double(risk.bic[k]) + "," +
             io::format_double(risk.gcv[k]) + "," + io::format_double(risk.mse[k]) + "\n";
  }
  write_lines(out / "risk.csv", table);
  json minima{{"df", a.approx_df ? "approx" : "exact"}, {"warnings", risk.warnings}};
  for (const char* c : {"aic", "bic", "gcv"}) {
    const Index k = risk.argmin(c);
    minima[c] = {{"lambda", risk.lambdas[k]}, {"index", k + 1}};
  }
  write_lines(out / "minima.json", minima.dump(2) + "\n");
  for (const auto& w : risk.warnings) std::cerr << "sglpath: warning: " << w << "\n";
  return kExitOk;
}

int cmd_predict(const PredictArgs& a) {
  const auto stored = io::read_path(a.fit);
  const auto& path = stored.path;
  const auto x = io::read_design(a.x, io::parse_design_format(a.x_format));
  if (x.cols() != path.n_features()) {
    throw io::InputError(a.x, 0, "has " + std::to_string(x.cols()) + " columns but the fit has " +
                                     std::to_string(path.n_features()) + " features");
  }
  std::optional<json> selection;
  std::vector<double> s;
  for (const auto& token : a.s) {
    if (token == "lambda.min" || token == "lambda.1se") {
      if (!selection) {
        const fs::path file = fs::path(a.cv.empty() ? a.fit : a.cv) / "selection.json";
        std::ifstream in(file);
        if (!in) throw io::InputError(file, 0, token + " needs a cv directory (--cv)");
        try {
          selection = json::parse(in);
        } catch (const json::exception& e) {
          throw io::InputError(file, 0, std::string("invalid JSON: ") + e.what());
        }
      }
      s.push_back(selection->at(token == "lambda.min" ? "lambda_min" : "lambda_1se").get<double>());
      continue;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      s.push_back(v);
    } catch (const std::exception&) {
      throw Error("--s value '" + token + "' is neither a number nor lambda.min/lambda.1se");
    }
  }
  if (s.empty()) throw Error("--s needs at least one value");
  const auto pred = predict(path, x, s, parse_predict_kind(a.type));

  const fs::path out = a.out.empty() ? fs::path(a.fit) : fs::path(a.out);
  fs::create_directories(out);
  std::ofstream file(out / "predictions.csv", std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write " + (out / "predictions.csv").string());
  for (std::size_t k = 0; k < s.size(); ++k) file << (k ? "," : "") << "s" << k + 1;
  file << '\n';
  for (Index i = 0; i < pred.rows(); ++i) {
    for (Index k = 0; k < pred.cols(); ++k) file << (k ? "," : "") << io::format_double(pred(i, k));
    file << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Sparse group lasso regularization paths"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ProblemArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a regularization path");
  add_problem_options(*fit, fit_args);

  ProblemArgs cv_args;
  CvArgs cv_opts;
  auto* cv = app.add_subcommand("cv", "Cross-validate the path");
  add_problem_options(*cv, cv_args);
  cv->add_option("--nfolds", cv_opts.nfolds, "Number of folds");
  cv->add_option("--loss", cv_opts.loss, "mse, mae, deviance or misclass");
  cv->add_option("--seed", cv_opts.seed, "Fold assignment seed");
  cv->add_option("--jobs", cv_opts.jobs, "Worker threads (default: SGL_PATH_JOBS or all cores)");

  RiskArgs risk_args;
  auto* risk = app.add_subcommand("risk", "Information criteria along a fitted Gaussian path");
  risk->add_option("--fit", risk_args.fit, "Fit directory")->required();
  risk->add_option("--x", risk_args.x, "Design (default: the one recorded in the fit)");
  risk->add_option("--x-format", risk_args.x_format, "auto, csv or mtx");
  risk->add_option("--y", risk_args.y, "Response (default: the one recorded in the fit)");
  risk->add_flag("--approx-df", risk_args.approx_df, "Use the number of non-zero coefficients as df");
  risk->add_option("--out", risk_args.out, "Output directory (default: the fit directory)");

  PredictArgs pred_args;
  auto* pred = app.add_subcommand("predict", "Predict from a fitted path");
  pred->add_option("--fit", pred_args.fit, "Fit directory")->required();
  pred->add_option("--x", pred_args.x, "New design")->required();
  pred->add_option("--x-format", pred_args.x_format, "auto, csv or mtx");
  pred->add_option("--s", pred_args.s, "Penalty values, or lambda.min / lambda.1se")->required();
  pred->add_option("--type", pred_args.type, "link, response or class");
  pred->add_option("--cv", pred_args.cv, "cv output directory for lambda.min / lambda.1se");
  pred->add_option("--out", pred_args.out, "Output directory (default: the fit directory)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit) return cmd_fit(fit_args, *fit);
    if (*cv) return cmd_cv(cv_args, cv_opts, *cv);
    if (*risk) return cmd_risk(risk_args);
    if (*pred) return cmd_predict(pred_args);
  } catch (const NotConverged& e) {
    std::cerr << "sglpath: error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "sglpath: error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace sgl::cli
