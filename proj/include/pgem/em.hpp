#ifndef PGEM_EM_HPP
#define PGEM_EM_HPP

#include <optional>
#include <string>
#include <vector>

#include "pgem/linsolve.hpp"
#include "pgem/model.hpp"

namespace pgem {

struct TracePoint {
  int iteration = 0;
  double objective = 0.0;
  double step_norm = 0.0;
};

// Converged fit with the complete-data Gaussian posterior approximation
// N(beta_hat, cov).
struct FitReport {
  Vector beta_hat;
  Matrix cov;
  std::vector<TracePoint> trace;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;  // oscillation flag from the IRLS baseline
  std::string algorithm;  // "em", "qnem", "vb", ...
};

struct FitState {
  Vector beta;
  Vector omega;
  Matrix S;       // X' Omega X + Sigma^{-1}
  Vector d_vec;   // X' kappa + Sigma^{-1} mu
  int iteration = 0;
  double objective = 0.0;
};

// E step: omega_t = pg_mean(m_t, psi_t) with psi = X beta.
Vector e_step(const Dataset& data, const Vector& beta);

// M step: solve (X' Omega X + Sigma^{-1}) beta = X' kappa + Sigma^{-1} mu,
// exactly or by CG (warm start taken from config).
Vector m_step(const Dataset& data, const GaussianPrior& prior,
              const Vector& omega, const std::optional<CgConfig>& cg = {});

struct EmOptions {
  double tol = 1e-8;          // inf-norm change in beta
  int max_iter = 10000;
  std::optional<CgConfig> cg; // empty: direct M-step solve
};

// Algorithm: alternate e_step / m_step until the beta change drops below
// tol.  Reports the complete-data covariance (S + Sigma^{-1})^{-1} at exit.
// max_iter exhaustion yields converged = false, not an exception.
FitReport fit_em(const Dataset& data, const GaussianPrior& prior,
                 const Vector& beta0, const EmOptions& opts = {});

// Quasi-Newton accelerated EM: a symmetric-rank-one approximation to the
// missing-information Hessian sharpens the complete-data curvature into a
// Newton-like step, with step-halving and plain-EM fallback so the ascent
// property is preserved.  Same fixed point as fit_em; the reported
// covariance uses the corrected Hessian and so dominates the EM covariance.
FitReport fit_qnem(const Dataset& data, const GaussianPrior& prior,
                   const Vector& beta0, const EmOptions& opts = {});

// Square roots of the diagonal of the reported covariance.  Throws if the
// covariance is not positive-definite.
Vector approx_stddev(const FitReport& report);

}  // namespace pgem

#endif
