#ifndef PGEM_SPARSE_HPP
#define PGEM_SPARSE_HPP

#include <optional>
#include <string>
#include <vector>

#include "pgem/em.hpp"
#include "pgem/model.hpp"

namespace pgem {

enum class PenaltyFamily { none, lasso, bridge };

struct PenaltySpec {
  PenaltyFamily family = PenaltyFamily::none;
  double lambda = 0.0;
  double alpha = 0.5;             // bridge exponent, in (0, 1)
  std::vector<bool> exempt;       // per-coefficient exemption; empty: none

  void validate(Eigen::Index d) const;
  bool is_exempt(Eigen::Index j) const {
    return !exempt.empty() && exempt[static_cast<std::size_t>(j)];
  }
  PenaltySpec with_lambda(double l) const {
    PenaltySpec p = *this;
    p.lambda = l;
    return p;
  }
};

// Penalized negative log-likelihood -sum_t l_t(beta) + penalty(beta);
// the minimization objective shared by every sparse solver.
double penalized_objective(const Dataset& data, const PenaltySpec& penalty,
                           const Vector& beta);

// Smallest lambda with an all-zero lasso solution: max_j |X' kappa|_j over
// penalized coordinates.
double lambda_max(const Dataset& data, const PenaltySpec& penalty);

// sign(z) (|z| - gamma)_+.
double soft_threshold(double z, double gamma);

// Penalized weighted-least-squares coordinate minimizer
//   S(sum_i w_i x_ij (z_i - yhat_i^{(j)}), lambda) / sum_i w_i x_ij^2
// where yhat^{(j)} is the fitted value excluding coordinate j.  A zero
// denominator leaves the coordinate unchanged.
double cd_update(Eigen::Index j, const Vector& weights,
                 const Vector& working_resp, const Matrix& X,
                 const Vector& beta, double lambda);

struct WorkingSet {
  Vector weights;
  Vector working_resp;
};

// IRLS weights w = p(1-p), responses z = psi + (y - p)/(p(1-p)), with p
// clamped to [1e-9, 1 - 1e-9].  Requires m_t = 1 for every t.
WorkingSet irls_weights(const Dataset& data, const Vector& beta);

// Data-augmentation weights omega = tanh(psi/2)/(2 psi) and the working
// responses (2y - 1)/omega of the m = 1 comparison harness.
WorkingSet da_weights(const Dataset& data, const Vector& beta);

// Bridge E-step precision alpha |beta_j|^{alpha-2}, read with |.| so it is
// well defined for negative coefficients and non-integer alpha.
double bridge_precision(double beta_j, double alpha);

enum class SparseSolver { cd, cg };

struct SparseOptions {
  std::optional<Vector> beta0;     // warm start; default all zeros
  double tol = 1e-7;
  int max_iter = 1000;
  SparseSolver solver = SparseSolver::cd;
  int max_sweeps = 100;            // inner CD sweeps per outer iteration
  double zero_tol = 1e-8;          // lasso active-set exclusion threshold
  double bridge_floor = 1e-4;      // bridge coordinates below this freeze at 0
};

// Max over coordinates of the l1 subgradient-condition violation at beta.
double lasso_kkt_residual(const Dataset& data, const PenaltySpec& penalty,
                          const Vector& beta);

// DA EM for the l1-penalized logistic likelihood (lasso prior as a
// normal-mixture).  The cd route sweeps soft-thresholded coordinates on the
// complete-data quadratic; the cg route solves the active-set ridge system
// from the gamma E-step.  Exit is checked against the subgradient condition.
FitReport fit_lasso_em(const Dataset& data, const PenaltySpec& penalty,
                       const SparseOptions& opts = {});

// DA EM for the bridge penalty lambda sum |beta_j|^alpha, 0 < alpha < 1.
// Coordinates entering the zero floor freeze at 0 for the remainder.
FitReport fit_bridge_em(const Dataset& data, const PenaltySpec& penalty,
                        const SparseOptions& opts = {});

// Penalized IRLS with inner coordinate descent (the classical baseline).
// Keeps the best iterate by penalized objective; five consecutive worsening
// outer loops flag divergence instead of throwing.
FitReport fit_irls_cd(const Dataset& data, const PenaltySpec& penalty,
                      const SparseOptions& opts = {});

enum class PathMethod { da_cd, da_cg, irls_cd, bridge };

struct PathResult {
  std::vector<double> lambdas;
  Matrix betas;                    // grid x d
  std::vector<double> objectives;  // penalized negative log-likelihood
  std::vector<int> nonzero_counts;
  std::vector<bool> ok;            // per-point fit success
};

std::string path_method_name(PathMethod method);

// Fits over a strictly decreasing lambda grid, warm-starting each point from
// the previous solution when enabled.  Individual failures are recorded and
// the path continues.
PathResult solution_path(const Dataset& data, PathMethod method,
                         const PenaltySpec& base, const std::vector<double>& grid,
                         bool warm_start = true, const SparseOptions& opts = {});

// Default grid: n_points log-spaced from lambda_max down to ratio*lambda_max.
std::vector<double> default_lambda_grid(const Dataset& data,
                                        const PenaltySpec& penalty,
                                        int n_points = 100,
                                        double ratio = 1e-3);

}  // namespace pgem

#endif
