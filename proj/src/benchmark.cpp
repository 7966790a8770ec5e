#include "pgem/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>

#include "pgem/io.hpp"
#include "pgem/vb.hpp"

namespace pgem {

double log_loss(const Dataset& data, const Vector& beta) {
  if (data.n() == 0) return 0.0;
  const Vector psi = data.X * beta;
  double loss = 0.0;
  for (Eigen::Index t = 0; t < data.n(); ++t)
    loss -= data.y[t] * psi[t] - data.m[t] * softplus(psi[t]);
  return loss / static_cast<double>(data.n());
}

double misclassification(const Dataset& data, const Vector& beta) {
  if (data.n() == 0) return 0.0;
  const Vector psi = data.X * beta;
  double wrong = 0.0;
  for (Eigen::Index t = 0; t < data.n(); ++t) {
    const double pred = psi[t] >= 0.0 ? 1.0 : 0.0;
    if (pred != data.y[t]) wrong += 1.0;
  }
  return wrong / static_cast<double>(data.n());
}

Split holdout_split(const Dataset& data, double holdout_frac,
                    std::uint64_t seed) {
  if (!(holdout_frac > 0.0 && holdout_frac < 1.0))
    throw std::invalid_argument("holdout_split: fraction must lie in (0, 1)");
  std::vector<Eigen::Index> idx(data.n());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_test = static_cast<std::size_t>(
      std::llround(holdout_frac * static_cast<double>(data.n())));
  std::vector<Eigen::Index> test_idx(idx.begin(),
                                     idx.begin() + static_cast<long>(n_test));
  std::vector<Eigen::Index> train_idx(idx.begin() + static_cast<long>(n_test),
                                      idx.end());
  return {data.rows(train_idx), data.rows(test_idx)};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double grad_norm(const Dataset& data, const GaussianPrior& prior,
                 const Vector& beta) {
  return log_posterior(data, prior, beta).gradient.lpNorm<Eigen::Infinity>();
}

}  // namespace

BenchmarkResult run_benchmark(const Dataset& data, const GaussianPrior& prior,
                              const BenchmarkConfig& config) {
  BenchmarkResult result;
  const Split split = holdout_split(data, config.holdout_frac, config.seed);
  const Vector beta0 = Vector::Zero(data.dim());

  for (const auto& algo : config.algorithms) {
    try {
      const auto start = Clock::now();
      if (algo == "em" || algo == "qnem") {
        EmOptions opts;
        opts.tol = config.tol;
        opts.max_iter = config.max_iter;
        const FitReport fit = algo == "em"
                                  ? fit_em(split.train, prior, beta0, opts)
                                  : fit_qnem(split.train, prior, beta0, opts);
        result.rows.push_back({algo, fit.iterations, seconds_since(start),
                               log_loss(split.test, fit.beta_hat),
                               grad_norm(split.train, prior, fit.beta_hat)});
      } else if (algo == "vb") {
        VbOptions opts;
        opts.tol = config.tol;
        opts.max_iter = config.max_iter;
        const FitReport fit = fit_vb(split.train, prior, opts);
        result.rows.push_back({algo, fit.iterations, seconds_since(start),
                               log_loss(split.test, fit.beta_hat),
                               grad_norm(split.train, prior, fit.beta_hat)});
      } else if (algo == "online-em") {
        const LearnRate rate(config.rate_c, config.rate_t0);
        const int batch_size =
            config.batch_size > 0
                ? config.batch_size
                : static_cast<int>(std::max<Eigen::Index>(data.dim(), 32));
        OnlineState state = OnlineState::init(data.dim());
        for (int pass = 1; pass <= config.em_passes; ++pass) {
          auto next = shuffled_batches(split.train, batch_size, 1,
                                       config.seed + static_cast<std::uint64_t>(pass));
          while (auto batch = next()) online_update(state, *batch, rate, prior);
          const int burn = config.pr_burn >= 0
                               ? std::min(config.pr_burn, state.step - 1)
                               : state.step / 2;
          const Vector est = polyak_ruppert(state, burn);
          result.rows.push_back({algo, pass, seconds_since(start),
                                 log_loss(split.test, est),
                                 grad_norm(split.train, prior, est)});
        }
      } else if (algo == "sgd") {
        const LearnRate rate(config.rate_c, config.rate_t0);
        for (int pass = 1; pass <= config.sgd_passes; ++pass) {
          SgdOptions opts;
          opts.passes = pass;
          // Re-run from scratch per checkpoint keeps each row a pure
          // function of (seed, pass).
          const FitReport fit = fit_sgd(split.train, prior, rate, config.seed, opts);
          result.rows.push_back({algo, pass, seconds_since(start),
                                 log_loss(split.test, fit.beta_hat),
                                 grad_norm(split.train, prior, fit.beta_hat)});
        }
      } else {
        throw std::invalid_argument("unknown benchmark arm: " + algo);
      }
    } catch (const std::exception& e) {
      result.failures.push_back(algo + ": " + e.what());
    }
  }
  return result;
}

void write_benchmark_csv(const std::string& path,
                         const BenchmarkResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "algorithm,pass,seconds,logloss,grad_norm\n";
  for (const auto& row : result.rows)
    out << row.algorithm << "," << row.pass << "," << format_g17(row.seconds)
        << "," << format_g17(row.logloss) << "," << format_g17(row.grad_norm)
        << "\n";
}

}  // namespace pgem
