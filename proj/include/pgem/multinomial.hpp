#ifndef PGEM_MULTINOMIAL_HPP
#define PGEM_MULTINOMIAL_HPP

#include <vector>

#include "pgem/model.hpp"
#include "pgem/sparse.hpp"

namespace pgem {

// K-class data: Y_tk = 1 iff observation t falls in class k.
struct MultiDataset {
  Matrix Y;  // N x K indicators, each row sums to 1
  Matrix X;  // N x d design

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
  Eigen::Index classes() const { return Y.cols(); }
  void validate() const;
};

// d x K coefficient matrix, one column per class.  The ECM parameterization
// pins column 0 at zero for identifiability; partial IRLS keeps all columns
// and recenters instead.
struct CoefBlock {
  Matrix B;
};

struct MultiFitResult {
  CoefBlock coef;
  std::vector<TracePoint> trace;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

// Softmax class probabilities, max-shifted; rows sum to 1.
Matrix class_probs(const CoefBlock& coef, const Matrix& X);

// c_tk = log sum_{l != k} exp(x_t' beta_l).
Vector conditional_offset(const CoefBlock& coef, Eigen::Index k, const Matrix& X);

// Quasi log-likelihood sum_t sum_k [Y log theta + (1-Y) log(1-theta)],
// treating every class column as an independent binary outcome.  Not the
// standard multinomial log-likelihood; both evaluators are provided.
double quasi_log_likelihood(const MultiDataset& data, const CoefBlock& coef);
double multinomial_log_likelihood(const MultiDataset& data, const CoefBlock& coef);

// quasi_log_likelihood minus the penalty over the free columns (1..K-1 for
// ECM, all columns for partial IRLS when all_columns is true).
double penalized_quasi_objective(const MultiDataset& data, const CoefBlock& coef,
                                 const PenaltySpec& penalty,
                                 bool all_columns = false);

// multinomial_log_likelihood minus the same penalty.  This is the merit
// function ECM ascends: the block-k slice of the multinomial log-likelihood
// equals the conditional binary likelihood up to a constant, so each
// conditional maximization is an ascent step.
double penalized_multinomial_objective(const MultiDataset& data,
                                       const CoefBlock& coef,
                                       const PenaltySpec& penalty,
                                       bool all_columns = false);

struct EcmOptions {
  double tol = 1e-7;
  int max_iter = 500;
  double zero_tol = 1e-8;
};

// DA ECM: cycles classes 2..K, running the binary PG machinery on
// psi_tk = x_t' beta_k - c_tk with an l1 E-step and a CG M-step.  Each block
// step is backtracked toward the previous block if it would decrease the
// penalized multinomial objective, so the trace is non-decreasing.
MultiFitResult fit_ecm(const MultiDataset& data, const PenaltySpec& penalty,
                       const EcmOptions& opts = {});

// Penalized partial IRLS: per-class quadratic approximation, inner
// coordinate descent, and per-feature median recentering after each cycle.
MultiFitResult fit_partial_irls(const MultiDataset& data,
                                const PenaltySpec& penalty,
                                const EcmOptions& opts = {});

}  // namespace pgem

#endif
