#ifndef PGEM_BENCHMARK_HPP
#define PGEM_BENCHMARK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pgem/em.hpp"
#include "pgem/model.hpp"
#include "pgem/online.hpp"

namespace pgem {

// Mean per-observation negative log-likelihood.
double log_loss(const Dataset& data, const Vector& beta);

// Mean misclassification for m = 1 data at threshold 1/2.
double misclassification(const Dataset& data, const Vector& beta);

struct Split {
  Dataset train;
  Dataset test;
};

// Deterministic holdout split (fraction held out for testing).
Split holdout_split(const Dataset& data, double holdout_frac,
                    std::uint64_t seed);

struct BenchmarkRow {
  std::string algorithm;
  int pass = 0;
  double seconds = 0.0;
  double logloss = 0.0;
  double grad_norm = 0.0;
};

struct BenchmarkConfig {
  std::vector<std::string> algorithms;  // em, qnem, vb, online-em, sgd
  std::uint64_t seed = 0;
  double holdout_frac = 0.2;
  double tol = 1e-8;
  int max_iter = 10000;
  int batch_size = 0;
  int em_passes = 3;    // online EM passes
  int sgd_passes = 50;  // chosen to yield comparable computing time
  double rate_c = 0.52;
  double rate_t0 = 0.0;
  int pr_burn = -1;
  std::string error_note;  // per-arm failures recorded, run continues
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::vector<std::string> failures;  // "algorithm: message"
};

// Runs each arm on the same train/test split; online arms report per pass,
// batch arms report their final state.
BenchmarkResult run_benchmark(const Dataset& data, const GaussianPrior& prior,
                              const BenchmarkConfig& config);

void write_benchmark_csv(const std::string& path, const BenchmarkResult& result);

}  // namespace pgem

#endif
