#include "pgem/online.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pgem/linsolve.hpp"

namespace pgem {

LearnRate::LearnRate(double c_, double t0_) : c(c_), t0(t0_) {
  if (!(c > 0.5 && c < 1.0))
    throw std::invalid_argument("LearnRate: c must lie in (0.5, 1)");
  if (t0 < 0.0) throw std::invalid_argument("LearnRate: t0 must be >= 0");
}

double gamma(const LearnRate& rate, int step) {
  if (step < 1) throw std::invalid_argument("gamma: step must be >= 1");
  return std::min(1.0, std::pow(step + rate.t0 + 1.0, -rate.c));
}

OnlineState OnlineState::init(Eigen::Index d, double ridge) {
  OnlineState s;
  s.S_bar = ridge * Matrix::Identity(d, d);
  s.d_bar = Vector::Zero(d);
  s.beta = Vector::Zero(d);
  return s;
}

bool single_observation_warning(const Dataset& batch) { return batch.n() == 1; }

void online_update(OnlineState& state, const Dataset& batch,
                   const LearnRate& rate, const GaussianPrior& prior,
                   const OnlineOptions& opts) {
  if (batch.n() == 0) throw std::invalid_argument("online_update: empty batch");
  if (batch.dim() != state.beta.size())
    throw std::invalid_argument("online_update: batch dimension mismatch");

  const int step = state.step + 1;
  const double g = opts.forced_gamma ? *opts.forced_gamma : gamma(rate, step);
  const double inv_n = 1.0 / static_cast<double>(batch.n());

  const Vector omega = e_step(batch, state.beta);
  const Matrix S_batch =
      inv_n * (batch.X.transpose() * omega.asDiagonal() * batch.X);
  const Vector d_batch = inv_n * (batch.X.transpose() * kappa(batch));

  state.S_bar = (1.0 - g) * state.S_bar + g * S_batch;
  state.S_bar = 0.5 * (state.S_bar + state.S_bar.transpose());
  state.d_bar = (1.0 - g) * state.d_bar + g * d_batch;
  state.step = step;
  state.n_processed += batch.n();

  const double n =
      std::min(static_cast<double>(state.n_processed),
               opts.scale_cap.value_or(std::numeric_limits<double>::infinity()));
  SpdSystem sys;
  if (opts.with_prior) {
    sys.S = n * state.S_bar + prior.precision;
    sys.d_vec = n * state.d_bar + prior.precision * prior.mu;
  } else {
    sys.S = state.S_bar;
    sys.d_vec = state.d_bar;
  }
  state.beta = solve_direct(sys);
  state.beta_history.push_back(state.beta);
}

Vector polyak_ruppert(const OnlineState& state, int burn) {
  if (burn >= state.step)
    throw std::invalid_argument("polyak_ruppert: burn must be below step count");
  Vector sum = Vector::Zero(state.beta.size());
  int count = 0;
  for (int s = burn; s < state.step; ++s) {
    sum += state.beta_history[static_cast<std::size_t>(s)];
    ++count;
  }
  return sum / count;
}

BatchIterator shuffled_batches(const Dataset& data, int batch_size, int passes,
                               std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  auto order = std::make_shared<std::vector<Eigen::Index>>(data.n());
  std::iota(order->begin(), order->end(), Eigen::Index{0});
  auto pass = std::make_shared<int>(0);
  auto pos = std::make_shared<Eigen::Index>(data.n());  // forces first shuffle
  return [=, &data]() -> std::optional<Dataset> {
    if (*pos >= data.n()) {
      if (*pass >= passes) return std::nullopt;
      ++*pass;
      std::shuffle(order->begin(), order->end(), *rng);
      *pos = 0;
    }
    const Eigen::Index take =
        std::min<Eigen::Index>(batch_size, data.n() - *pos);
    std::vector<Eigen::Index> idx(order->begin() + *pos,
                                  order->begin() + *pos + take);
    *pos += take;
    return data.rows(idx);
  };
}

FitReport fit_online(const Dataset& data, const GaussianPrior& prior,
                     const LearnRate& rate, std::uint64_t seed,
                     const OnlineFitOptions& opts) {
  data.validate();
  prior.validate();
  const Eigen::Index d = data.dim();
  const int batch_size =
      opts.batch_size > 0 ? opts.batch_size
                          : static_cast<int>(std::max<Eigen::Index>(d, 32));

  OnlineState state = OnlineState::init(d);
  auto next = shuffled_batches(data, batch_size, opts.passes, seed);
  OnlineOptions update = opts.update;
  if (!update.scale_cap) update.scale_cap = static_cast<double>(data.n());
  FitReport report;
  report.algorithm = "online-em";
  while (auto batch = next()) {
    online_update(state, *batch, rate, prior, update);
    report.trace.push_back(
        {state.step, 0.0,
         state.step > 1
             ? (state.beta_history[state.step - 1] -
                state.beta_history[state.step - 2])
                   .lpNorm<Eigen::Infinity>()
             : 0.0});
  }
  report.iterations = state.step;
  const int burn = opts.pr_burn >= 0 ? opts.pr_burn : state.step / 2;
  report.beta_hat =
      burn < state.step ? polyak_ruppert(state, burn) : state.beta;
  const double n = std::min(static_cast<double>(state.n_processed),
                            static_cast<double>(data.n()));
  Eigen::LLT<Matrix> llt(Matrix(n * state.S_bar + prior.precision));
  if (llt.info() == Eigen::Success)
    report.cov = llt.solve(Matrix::Identity(d, d));
  report.converged = true;
  return report;
}

FitReport fit_sgd(const Dataset& data, const GaussianPrior& prior,
                  const LearnRate& rate, std::uint64_t seed,
                  const SgdOptions& opts) {
  data.validate();
  prior.validate();
  if (opts.passes < 1) throw std::invalid_argument("fit_sgd: passes must be >= 1");
  const double inv_n = 1.0 / std::max<double>(1.0, static_cast<double>(data.n()));

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(data.n());
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  Vector beta = Vector::Zero(data.dim());
  FitReport report;
  report.algorithm = "sgd";
  int step = 0;
  for (int pass = 0; pass < opts.passes; ++pass) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index t : order) {
      ++step;
      const double g = gamma(rate, step);
      const double psi = data.X.row(t).dot(beta);
      const double resid = data.y[t] - data.m[t] * sigmoid(psi);
      beta += g * (resid * data.X.row(t).transpose() -
                   inv_n * (prior.precision * (beta - prior.mu)));
      if (beta.lpNorm<Eigen::Infinity>() > opts.divergence_bound)
        throw std::runtime_error("fit_sgd: iterate diverged");
    }
    report.trace.push_back({pass + 1, 0.0, 0.0});
  }
  report.beta_hat = beta;
  report.iterations = step;
  report.converged = true;
  return report;
}

}  // namespace pgem
