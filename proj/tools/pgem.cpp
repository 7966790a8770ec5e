// Command-line front end: simulation, fitting, solution paths, benchmarks,
// and prediction over the CSV/JSON formats described in the README.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "pgem/benchmark.hpp"
#include "pgem/io.hpp"
#include "pgem/multinomial.hpp"
#include "pgem/online.hpp"
#include "pgem/simulate.hpp"
#include "pgem/sparse.hpp"
#include "pgem/vb.hpp"

namespace {

using nlohmann::json;

// Columns that are identically 1 are treated as intercepts and exempted
// from penalties by default.
std::vector<bool> intercept_mask(const pgem::Matrix& X) {
  std::vector<bool> mask(static_cast<std::size_t>(X.cols()), false);
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    if (X.rows() > 0 && (X.col(j).array() == 1.0).all())
      mask[static_cast<std::size_t>(j)] = true;
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
    mask.clear();
  return mask;
}

struct CommonArgs {
  std::string data_path;
  std::string out_path = "report.json";
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iter = 10000;
  double lambda = 0.0;
  double alpha = 0.5;
  std::string penalty = "none";
  int batch_size = 0;
  int passes = 3;
  double rate_c = 0.52;
  double rate_t0 = 0.0;
  int pr_burn = -1;
  double prior_precision = 1e-5;
};

pgem::PenaltySpec make_penalty(const CommonArgs& args, const pgem::Matrix& X) {
  pgem::PenaltySpec p;
  if (args.penalty == "lasso")
    p.family = pgem::PenaltyFamily::lasso;
  else if (args.penalty == "bridge")
    p.family = pgem::PenaltyFamily::bridge;
  else if (args.penalty == "none")
    p.family = pgem::PenaltyFamily::none;
  else
    throw CLI::ValidationError("--penalty must be none, lasso, or bridge");
  p.lambda = args.lambda;
  p.alpha = args.alpha;
  p.exempt = intercept_mask(X);
  return p;
}

json config_json(const std::string& command, const CommonArgs& args,
                 const std::string& algorithm) {
  return json{{"command", command},
              {"algorithm", algorithm},
              {"data", args.data_path},
              {"seed", args.seed},
              {"tol", args.tol},
              {"max_iter", args.max_iter},
              {"lambda", args.lambda},
              {"alpha", args.alpha},
              {"penalty", args.penalty},
              {"batch_size", args.batch_size},
              {"passes", args.passes},
              {"rate_c", args.rate_c},
              {"rate_t0", args.rate_t0},
              {"pr_burn", args.pr_burn},
              {"prior_precision", args.prior_precision}};
}

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--data", args.data_path, "input CSV")->required();
  cmd->add_option("--out", args.out_path, "output path");
  cmd->add_option("--seed", args.seed, "RNG seed");
  cmd->add_option("--tol", args.tol, "convergence tolerance");
  cmd->add_option("--max-iter", args.max_iter, "iteration cap");
  cmd->add_option("--lambda", args.lambda, "penalty strength");
  cmd->add_option("--alpha", args.alpha, "bridge exponent");
  cmd->add_option("--penalty", args.penalty, "none | lasso | bridge");
  cmd->add_option("--batch-size", args.batch_size, "online mini-batch size");
  cmd->add_option("--passes", args.passes, "data passes (online/sgd)");
  cmd->add_option("--rate-c", args.rate_c, "learning-rate exponent c");
  cmd->add_option("--rate-t0", args.rate_t0, "learning-rate offset t0");
  cmd->add_option("--pr-burn", args.pr_burn, "Polyak-Ruppert burn-in steps");
  cmd->add_option("--prior-precision", args.prior_precision,
                  "diagonal prior precision");
}

int run_fit(const CommonArgs& args, const std::string& algorithm) {
  const json config = config_json("fit", args, algorithm);

  if (algorithm == "ecm" || algorithm == "partial-irls") {
    const pgem::MultiDataset data = pgem::read_multi_csv(args.data_path);
    pgem::PenaltySpec penalty = make_penalty(args, data.X);
    if (penalty.family == pgem::PenaltyFamily::none && args.lambda > 0.0)
      penalty.family = pgem::PenaltyFamily::lasso;
    pgem::EcmOptions opts;
    opts.tol = args.tol;
    opts.max_iter = args.max_iter;
    const pgem::MultiFitResult fit =
        algorithm == "ecm" ? pgem::fit_ecm(data, penalty, opts)
                           : pgem::fit_partial_irls(data, penalty, opts);
    json out;
    out["algorithm"] = algorithm;
    out["converged"] = fit.converged;
    out["diverged"] = fit.diverged;
    out["iterations"] = fit.iterations;
    std::vector<std::vector<double>> coef;
    for (Eigen::Index k = 0; k < fit.coef.B.cols(); ++k)
      coef.emplace_back(fit.coef.B.col(k).data(),
                        fit.coef.B.col(k).data() + fit.coef.B.rows());
    out["coefficients"] = coef;
    json trace = json::array();
    for (const auto& p : fit.trace)
      trace.push_back({{"iteration", p.iteration},
                       {"objective", p.objective},
                       {"step_norm", p.step_norm}});
    out["trace"] = trace;
    out["config"] = config;
    std::ofstream os(args.out_path);
    if (!os) throw std::runtime_error("cannot write " + args.out_path);
    os << out.dump(2) << "\n";
    return 0;
  }

  const pgem::Dataset data = pgem::read_dataset_csv(args.data_path);
  const pgem::GaussianPrior prior =
      pgem::GaussianPrior::vague(data.dim(), args.prior_precision);
  const pgem::Vector beta0 = pgem::Vector::Zero(data.dim());
  pgem::FitReport report;

  if (algorithm == "em" || algorithm == "qnem") {
    pgem::EmOptions opts;
    opts.tol = args.tol;
    opts.max_iter = args.max_iter;
    report = algorithm == "em" ? pgem::fit_em(data, prior, beta0, opts)
                               : pgem::fit_qnem(data, prior, beta0, opts);
  } else if (algorithm == "vb") {
    pgem::VbOptions opts;
    opts.tol = args.tol;
    opts.max_iter = args.max_iter;
    report = pgem::fit_vb(data, prior, opts);
  } else if (algorithm == "online-em") {
    pgem::OnlineFitOptions opts;
    opts.batch_size = args.batch_size;
    opts.passes = args.passes;
    opts.pr_burn = args.pr_burn;
    report = pgem::fit_online(data, prior, pgem::LearnRate(args.rate_c, args.rate_t0),
                              args.seed, opts);
  } else if (algorithm == "sgd") {
    pgem::SgdOptions opts;
    opts.passes = args.passes;
    report = pgem::fit_sgd(data, prior, pgem::LearnRate(args.rate_c, args.rate_t0),
                           args.seed, opts);
  } else if (algorithm == "da-cd" || algorithm == "da-cg" ||
             algorithm == "irls-cd" || algorithm == "bridge") {
    CommonArgs a = args;
    if (a.penalty == "none") a.penalty = algorithm == "bridge" ? "bridge" : "lasso";
    const pgem::PenaltySpec penalty = make_penalty(a, data.X);
    pgem::SparseOptions opts;
    opts.tol = args.tol;
    opts.max_iter = args.max_iter;
    if (algorithm == "bridge") {
      report = pgem::fit_bridge_em(data, penalty, opts);
    } else if (algorithm == "irls-cd") {
      report = pgem::fit_irls_cd(data, penalty, opts);
    } else {
      opts.solver = algorithm == "da-cd" ? pgem::SparseSolver::cd
                                         : pgem::SparseSolver::cg;
      report = pgem::fit_lasso_em(data, penalty, opts);
    }
  } else {
    throw CLI::ValidationError("unknown --algorithm " + algorithm);
  }
  pgem::emit_report(report, args.out_path, config);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polya-Gamma EM / VB solvers for logistic-family regression"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  std::string design = "appendixA";
  std::string sim_out = "data.csv";
  std::uint64_t sim_seed = 0;
  long long sim_n = -1, sim_d = -1, sim_factors = -1;
  sim->add_option("--design", design, "appendixA | figure1 | appendixB | custom");
  sim->add_option("--out", sim_out, "output CSV (truth written to <out>.truth.csv)");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--n", sim_n, "override observation count");
  sim->add_option("--d", sim_d, "override dimension");
  sim->add_option("--factors", sim_factors, "override factor count (figure1)");

  // --- fit ---
  auto* fit = app.add_subcommand("fit", "fit one algorithm to a dataset");
  CommonArgs fit_args;
  std::string algorithm = "em";
  fit->add_option("--algorithm", algorithm,
                  "em | qnem | vb | online-em | sgd | irls-cd | da-cd | da-cg |"
                  " bridge | ecm | partial-irls");
  add_common_flags(fit, fit_args);

  // --- path ---
  auto* path = app.add_subcommand("path", "lasso/bridge solution path");
  CommonArgs path_args;
  std::string path_algorithm = "da-cd";
  int grid_points = 100;
  double grid_ratio = 1e-3;
  bool cold_start = false;
  path->add_option("--algorithm", path_algorithm,
                   "da-cd | da-cg | irls-cd | bridge");
  path->add_option("--grid", grid_points, "number of lambda grid points");
  path->add_option("--grid-ratio", grid_ratio, "lambda_min / lambda_max");
  path->add_flag("--cold-start", cold_start, "disable warm starts");
  add_common_flags(path, path_args);

  // --- benchmark ---
  auto* bench = app.add_subcommand("benchmark", "compare algorithms on one split");
  CommonArgs bench_args;
  std::string bench_algorithms = "em,qnem,online-em,sgd";
  double holdout_frac = 0.2;
  int replicates = 50;
  int sgd_passes = 50;
  bench->add_option("--algorithm", bench_algorithms, "comma-separated arms");
  bench->add_option("--holdout-frac", holdout_frac, "test fraction");
  bench->add_option("--replicates", replicates, "unused by single-split runs");
  bench->add_option("--sgd-passes", sgd_passes, "passes for the sgd arm");
  add_common_flags(bench, bench_args);

  // --- predict ---
  auto* pred = app.add_subcommand("predict", "apply a fitted model to data");
  std::string model_path, pred_data, pred_out = "predictions.csv";
  pred->add_option("--model", model_path, "fit report JSON")->required();
  pred->add_option("--data", pred_data, "input CSV")->required();
  pred->add_option("--out", pred_out, "output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      pgem::SimulateOverrides ov;
      if (sim_n > 0) ov.n = sim_n;
      if (sim_d > 0) ov.d = sim_d;
      if (sim_factors > 0) ov.factors = sim_factors;
      const pgem::SimulateResult result =
          pgem::simulate(pgem::design_from_name(design), sim_seed, ov);
      pgem::write_dataset_csv(sim_out, result.data);
      pgem::write_vector_csv(sim_out + ".truth.csv", result.beta_true);
      json meta{{"command", "simulate"}, {"design", design},
                {"seed", sim_seed},     {"n", result.data.n()},
                {"d", result.data.dim()}, {"out", sim_out}};
      std::ofstream ms(sim_out + ".meta.json");
      ms << meta.dump(2) << "\n";
      std::cout << "wrote " << sim_out << " (N=" << result.data.n()
                << ", d=" << result.data.dim() << ")\n";
      return 0;
    }
    if (fit->parsed()) return run_fit(fit_args, algorithm);
    if (path->parsed()) {
      const pgem::Dataset data = pgem::read_dataset_csv(path_args.data_path);
      CommonArgs a = path_args;
      if (a.penalty == "none")
        a.penalty = path_algorithm == "bridge" ? "bridge" : "lasso";
      const pgem::PenaltySpec base = make_penalty(a, data.X);
      const std::vector<double> grid =
          pgem::default_lambda_grid(data, base, grid_points, grid_ratio);
      pgem::PathMethod method;
      if (path_algorithm == "da-cd") method = pgem::PathMethod::da_cd;
      else if (path_algorithm == "da-cg") method = pgem::PathMethod::da_cg;
      else if (path_algorithm == "irls-cd") method = pgem::PathMethod::irls_cd;
      else if (path_algorithm == "bridge") method = pgem::PathMethod::bridge;
      else throw CLI::ValidationError("unknown path --algorithm");
      pgem::SparseOptions opts;
      opts.tol = path_args.tol;
      opts.max_iter = path_args.max_iter;
      const pgem::PathResult result =
          pgem::solution_path(data, method, base, grid, !cold_start, opts);
      pgem::write_path_csv(path_args.out_path, result);
      json meta = config_json("path", path_args, path_algorithm);
      meta["grid_points"] = grid_points;
      meta["grid_ratio"] = grid_ratio;
      std::ofstream ms(path_args.out_path + ".meta.json");
      ms << meta.dump(2) << "\n";
      return 0;
    }
    if (bench->parsed()) {
      const pgem::Dataset data = pgem::read_dataset_csv(bench_args.data_path);
      const pgem::GaussianPrior prior =
          pgem::GaussianPrior::vague(data.dim(), bench_args.prior_precision);
      pgem::BenchmarkConfig cfg;
      std::stringstream ss(bench_algorithms);
      std::string arm;
      while (std::getline(ss, arm, ',')) cfg.algorithms.push_back(arm);
      cfg.seed = bench_args.seed;
      cfg.holdout_frac = holdout_frac;
      cfg.tol = bench_args.tol;
      cfg.max_iter = bench_args.max_iter;
      cfg.batch_size = bench_args.batch_size;
      cfg.em_passes = bench_args.passes;
      cfg.sgd_passes = sgd_passes;
      cfg.rate_c = bench_args.rate_c;
      cfg.rate_t0 = bench_args.rate_t0;
      cfg.pr_burn = bench_args.pr_burn;
      const pgem::BenchmarkResult result = pgem::run_benchmark(data, prior, cfg);
      pgem::write_benchmark_csv(bench_args.out_path + ".csv", result);
      json summary = config_json("benchmark", bench_args, bench_algorithms);
      summary["holdout_frac"] = holdout_frac;
      summary["failures"] = result.failures;
      json final_rows = json::object();
      for (const auto& row : result.rows)
        final_rows[row.algorithm] = {{"pass", row.pass},
                                     {"seconds", row.seconds},
                                     {"logloss", row.logloss},
                                     {"grad_norm", row.grad_norm}};
      summary["final"] = final_rows;
      std::ofstream os(bench_args.out_path + ".json");
      os << summary.dump(2) << "\n";
      for (const auto& f : result.failures)
        std::cerr << "arm failed: " << f << "\n";
      return 0;
    }
    if (pred->parsed()) {
      std::ifstream in(model_path);
      if (!in) throw std::runtime_error("cannot open " + model_path);
      json model = json::parse(in);
      const std::vector<double> beta_v = model.at("beta_hat");
      pgem::Vector beta =
          Eigen::Map<const pgem::Vector>(beta_v.data(),
                                         static_cast<Eigen::Index>(beta_v.size()));
      const pgem::Dataset data = pgem::read_dataset_csv(pred_data);
      if (data.dim() != beta.size())
        throw std::runtime_error("predict: model/data dimension mismatch");
      std::ofstream os(pred_out);
      if (!os) throw std::runtime_error("cannot write " + pred_out);
      os << "psi,prob\n";
      const pgem::Vector psi = data.X * beta;
      for (Eigen::Index t = 0; t < data.n(); ++t)
        os << pgem::format_g17(psi[t]) << ","
           << pgem::format_g17(pgem::sigmoid(psi[t])) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
