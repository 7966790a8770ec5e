#ifndef PGEM_MODEL_HPP
#define PGEM_MODEL_HPP

#include <Eigen/Core>
#include <optional>

namespace pgem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// N triplets (m_t, y_t, x_t): trials, successes, predictors.  Trials are
// real-valued so negative-binomial data (m_t = y_t + r) admits non-integer r.
struct Dataset {
  Vector y;  // successes, 0 <= y_t <= m_t
  Vector m;  // trials, m_t > 0
  Matrix X;  // N x d design, row t = x_t^T

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }

  // Throws std::invalid_argument on dimension mismatch, non-finite entries,
  // y outside [0, m], or non-positive trials.
  void validate() const;

  Dataset rows(const std::vector<Eigen::Index>& idx) const;
};

// beta ~ N(mu, Sigma), stored as mean and precision Sigma^{-1}.
struct GaussianPrior {
  Vector mu;
  Matrix precision;

  static GaussianPrior vague(Eigen::Index d, double prec = 1e-5);
  void validate() const;
};

// Exact observed-data objective at one beta.
struct ObjectiveReport {
  double log_posterior = 0.0;
  Vector gradient;
  std::optional<Matrix> hessian;
};

// kappa_t = y_t - m_t / 2.
Vector kappa(const Dataset& data);

// log1p(exp(psi)) without overflow.
double softplus(double psi);

double sigmoid(double psi);

// Log posterior (up to a beta-free constant), gradient, and optionally the
// Hessian:
//   sum_t [y_t psi_t - m_t softplus(psi_t)] - (beta-mu)' P (beta-mu) / 2
//   grad = X'(y - m .* sigma(psi)) - P (beta - mu)
//   hess = -X' W X - P,  W_tt = m_t sigma(psi_t)(1 - sigma(psi_t))
ObjectiveReport log_posterior(const Dataset& data, const GaussianPrior& prior,
                              const Vector& beta, bool with_hessian = false);

// Observed-data log likelihood only (no prior), with gradient.
ObjectiveReport log_likelihood(const Dataset& data, const Vector& beta);

// Damped-Newton maximizer of the exact log posterior; reference optimizer
// against which the EM family is checked.  Step-halving (up to 20 halvings)
// keeps the objective non-decreasing.  Returns beta* with
// ||grad(beta*)||_inf <= tol, or throws std::runtime_error carrying the last
// iterate's gradient norm if max_iter is exhausted.
Vector oracle_mode(const Dataset& data, const GaussianPrior& prior,
                   const Vector& beta0, double tol, int max_iter = 200);

}  // namespace pgem

#endif
