#ifndef PGEM_ONLINE_HPP
#define PGEM_ONLINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pgem/em.hpp"
#include "pgem/model.hpp"

namespace pgem {

// Decay schedule gamma_step = (step + t0 + 1)^{-c}.  c in (0.5, 1) keeps the
// schedule non-summable but square-summable.
struct LearnRate {
  LearnRate(double c, double t0 = 0.0);
  double c;
  double t0;
};

double gamma(const LearnRate& rate, int step);

// Stochastic-approximation state.  S_bar and d_bar hold per-observation
// averages of the sufficient statistics, updated by convex combination.
struct OnlineState {
  Matrix S_bar;
  Vector d_bar;
  Vector beta;
  int step = 0;
  long n_processed = 0;
  std::vector<Vector> beta_history;  // one entry per completed step

  static OnlineState init(Eigen::Index d, double ridge = 1e-6);
};

struct OnlineOptions {
  bool with_prior = true;  // rescale by n_processed and add the prior
  std::optional<double> forced_gamma;  // test hook
  // Upper bound on the rescaling factor.  Repeated passes re-process the
  // same observations, so fit_online caps the factor at the dataset size to
  // keep the solve a posterior approximation over distinct data points.
  std::optional<double> scale_cap;
};

// One mini-batch update: E-step weights at the current beta, convex
// combination into (S_bar, d_bar), then the M-step solve
//   (n * S_bar + P) beta = n * d_bar + P mu,   n = min(n_processed, cap)
// (or the prior-free solve S_bar beta = d_bar when with_prior is off).
// Batch size 1 is permitted but flagged via the return value of
// single_observation_warning().
void online_update(OnlineState& state, const Dataset& batch,
                   const LearnRate& rate, const GaussianPrior& prior,
                   const OnlineOptions& opts = {});

bool single_observation_warning(const Dataset& batch);

// Mean of the beta iterates with step > burn.  Throws std::invalid_argument
// when burn >= state.step.
Vector polyak_ruppert(const OnlineState& state, int burn);

// Pull-based mini-batch source; empty optional ends the stream.
using BatchIterator = std::function<std::optional<Dataset>()>;

// Makes a stream that shuffles the dataset each pass and yields mini-batches.
BatchIterator shuffled_batches(const Dataset& data, int batch_size, int passes,
                               std::uint64_t seed);

struct OnlineFitOptions {
  int batch_size = 0;  // 0: max(d, 32)
  int passes = 3;
  int pr_burn = -1;    // -1: half the steps
  OnlineOptions update;
};

// Streams the dataset through online_update; beta_hat is the Polyak-Ruppert
// average, cov the rescaled complete-data covariance at exit.
FitReport fit_online(const Dataset& data, const GaussianPrior& prior,
                     const LearnRate& rate, std::uint64_t seed,
                     const OnlineFitOptions& opts = {});

struct SgdOptions {
  int passes = 1;
  double divergence_bound = 1e10;
};

// Per-example stochastic gradient ascent baseline on the log posterior,
// sharing the (t + t0)^{-c} schedule family.  Throws std::runtime_error on
// divergence.
FitReport fit_sgd(const Dataset& data, const GaussianPrior& prior,
                  const LearnRate& rate, std::uint64_t seed,
                  const SgdOptions& opts = {});

}  // namespace pgem

#endif
