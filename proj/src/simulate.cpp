#include "pgem/simulate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pgem {

Design design_from_name(const std::string& name) {
  if (name == "appendixA") return Design::appendix_a;
  if (name == "figure1") return Design::figure1;
  if (name == "appendixB") return Design::appendix_b;
  if (name == "custom") return Design::custom;
  throw std::invalid_argument("unknown design: " + name);
}

namespace {

Dataset bernoulli_draws(const Matrix& X, const Vector& beta,
                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dataset data;
  data.X = X;
  data.m = Vector::Ones(X.rows());
  data.y.resize(X.rows());
  const Vector psi = X * beta;
  for (Eigen::Index t = 0; t < X.rows(); ++t)
    data.y[t] = unif(rng) < sigmoid(psi[t]) ? 1.0 : 0.0;
  return data;
}

}  // namespace

SimulateResult simulate(Design design, std::uint64_t seed,
                        const SimulateOverrides& overrides) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SimulateResult out;

  switch (design) {
    case Design::appendix_a: {
      const Eigen::Index n = overrides.n.value_or(250);
      const Eigen::Index d = overrides.d.value_or(10);
      Vector beta(d);
      for (Eigen::Index j = 0; j < d; ++j)
        beta[j] = d == 1 ? 0.0 : -3.0 + 6.0 * j / (d - 1);
      Matrix X(n, d);
      for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index j = 0; j < d; ++j) X(t, j) = normal(rng);
      out.beta_true = beta;
      out.data = bernoulli_draws(X, beta, rng);
      break;
    }
    case Design::figure1: {
      const Eigen::Index n = overrides.n.value_or(10000);
      const Eigen::Index d = overrides.d.value_or(50);
      const Eigen::Index f = overrides.factors.value_or(10);
      Matrix B(d, f);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < f; ++j) B(i, j) = normal(rng);
      // x_t = B z_t + sqrt(0.1) e_t gives covariance B B' + 0.1 I.
      Matrix X(n, d);
      Vector z(f);
      const double noise_sd = std::sqrt(0.1);
      for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index j = 0; j < f; ++j) z[j] = normal(rng);
        X.row(t) = (B * z).transpose();
        for (Eigen::Index i = 0; i < d; ++i) X(t, i) += noise_sd * normal(rng);
      }
      // Rescale columns to marginal variance 1/d.
      for (Eigen::Index i = 0; i < d; ++i) {
        const double var = B.row(i).squaredNorm() + 0.1;
        X.col(i) *= 1.0 / std::sqrt(var * static_cast<double>(d));
      }
      Vector beta(d);
      for (Eigen::Index j = 0; j < d; ++j) beta[j] = normal(rng);
      out.beta_true = beta;
      out.data = bernoulli_draws(X, beta, rng);
      break;
    }
    case Design::appendix_b: {
      const Eigen::Index n = overrides.n.value_or(500);
      const Eigen::Index d = overrides.d.value_or(50);
      std::uniform_int_distribution<int> bit(0, 1);
      Matrix X(n, d);
      for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index j = 0; j < d; ++j) X(t, j) = bit(rng);
      Vector beta = Vector::Zero(d);
      const double amp = std::sqrt(5.0);
      for (Eigen::Index j = 0; j < std::min<Eigen::Index>(10, d); ++j)
        beta[j] = (j % 2 == 0 ? amp : -amp);
      out.beta_true = beta;
      out.data = bernoulli_draws(X, beta, rng);
      break;
    }
    case Design::custom: {
      const Eigen::Index n = overrides.n.value_or(200);
      const Eigen::Index d = overrides.d.value_or(5);
      Matrix X(n, d);
      for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index j = 0; j < d; ++j) X(t, j) = normal(rng);
      Vector beta(d);
      for (Eigen::Index j = 0; j < d; ++j) beta[j] = normal(rng);
      out.beta_true = beta;
      out.data = bernoulli_draws(X, beta, rng);
      break;
    }
  }
  return out;
}

}  // namespace pgem
