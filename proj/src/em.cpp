#include "pgem/em.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "pgem/pg_math.hpp"

namespace pgem {

namespace {

Matrix weighted_gram(const Dataset& data, const Vector& omega) {
  return data.X.transpose() * omega.asDiagonal() * data.X;
}

Matrix complete_data_precision(const Dataset& data, const GaussianPrior& prior,
                               const Vector& omega) {
  Matrix S = weighted_gram(data, omega) + prior.precision;
  return 0.5 * (S + S.transpose());
}

Vector prior_rhs(const Dataset& data, const GaussianPrior& prior) {
  return data.X.transpose() * kappa(data) + prior.precision * prior.mu;
}

// Complete-data gradient at beta for fixed weights omega:
//   X'(kappa - Omega X beta) - P (beta - mu).
Vector complete_data_gradient(const Dataset& data, const GaussianPrior& prior,
                              const Vector& omega, const Vector& beta) {
  const Vector psi = data.X * beta;
  return data.X.transpose() * (kappa(data) - omega.cwiseProduct(psi)) -
         prior.precision * (beta - prior.mu);
}

Matrix invert_spd(const Matrix& S) {
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("covariance assembly: matrix not PD", 0.0);
  return llt.solve(Matrix::Identity(S.rows(), S.cols()));
}

}  // namespace

Vector e_step(const Dataset& data, const Vector& beta) {
  const Vector psi = data.X * beta;
  Vector omega(data.n());
  for (Eigen::Index t = 0; t < data.n(); ++t)
    omega[t] = pg_mean(data.m[t], psi[t]);
  return omega;
}

Vector m_step(const Dataset& data, const GaussianPrior& prior,
              const Vector& omega, const std::optional<CgConfig>& cg) {
  SpdSystem sys{complete_data_precision(data, prior, omega),
                prior_rhs(data, prior)};
  if (cg) return solve_cg(sys, *cg).x;
  return solve_direct(sys);
}

FitReport fit_em(const Dataset& data, const GaussianPrior& prior,
                 const Vector& beta0, const EmOptions& opts) {
  data.validate();
  prior.validate();
  if (!(opts.tol > 0.0)) throw std::invalid_argument("fit_em: tol must be positive");

  FitReport report;
  report.algorithm = "em";
  Vector beta = beta0;
  double obj = log_posterior(data, prior, beta).log_posterior;
  report.trace.push_back({0, obj, 0.0});

  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vector omega = e_step(data, beta);
    std::optional<CgConfig> cg = opts.cg;
    if (cg) cg->warm_start = beta;
    const Vector beta_new = m_step(data, prior, omega, cg);
    const double step = (beta_new - beta).lpNorm<Eigen::Infinity>();
    beta = beta_new;
    obj = log_posterior(data, prior, beta).log_posterior;
    report.trace.push_back({it, obj, step});
    report.iterations = it;
    if (step <= opts.tol) {
      const Vector grad = log_posterior(data, prior, beta).gradient;
      if (grad.lpNorm<Eigen::Infinity>() <= 10.0 * opts.tol) {
        report.converged = true;
        break;
      }
    }
  }

  report.beta_hat = beta;
  report.cov = invert_spd(complete_data_precision(data, prior, e_step(data, beta)));
  return report;
}

FitReport fit_qnem(const Dataset& data, const GaussianPrior& prior,
                   const Vector& beta0, const EmOptions& opts) {
  data.validate();
  prior.validate();
  if (!(opts.tol > 0.0))
    throw std::invalid_argument("fit_qnem: tol must be positive");

  const Eigen::Index d = data.dim();
  FitReport report;
  report.algorithm = "qnem";
  Vector beta = beta0;
  // A approximates the missing-information curvature X'WX difference
  // (PSD in exact arithmetic); the Newton system is (S + P) - A.
  Matrix A = Matrix::Zero(d, d);
  ObjectiveReport cur = log_posterior(data, prior, beta);
  report.trace.push_back({0, cur.log_posterior, 0.0});

  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vector omega = e_step(data, beta);
    const Matrix M = complete_data_precision(data, prior, omega);

    Vector beta_new;
    bool accepted = false;
    Eigen::LDLT<Matrix> ldlt(M - A);
    if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
      const Vector step = ldlt.solve(cur.gradient);
      double scale = 1.0;
      for (int h = 0; h <= 10; ++h) {
        const Vector trial = beta + scale * step;
        if (log_posterior(data, prior, trial).log_posterior >=
            cur.log_posterior) {
          beta_new = trial;
          accepted = true;
          break;
        }
        scale *= 0.5;
      }
    }
    if (!accepted) {
      // Plain EM step: ascent guaranteed.
      beta_new = solve_direct({M, prior_rhs(data, prior)});
    }

    const Vector s = beta_new - beta;
    const ObjectiveReport next = log_posterior(data, prior, beta_new);
    // Secant pair for the missing-information term: v equals the exact
    // gradient minus the complete-data gradient at the new point, both
    // conditioned on the old weights.
    const Vector v =
        next.gradient - complete_data_gradient(data, prior, omega, beta_new);
    const Vector u = v - A * s;
    const double den = u.dot(s);
    if (std::abs(den) > 1e-8 * u.norm() * s.norm())
      A += (u * u.transpose()) / den;

    const double step_norm = s.lpNorm<Eigen::Infinity>();
    beta = beta_new;
    cur = next;
    report.trace.push_back({it, cur.log_posterior, step_norm});
    report.iterations = it;
    if (step_norm <= opts.tol &&
        cur.gradient.lpNorm<Eigen::Infinity>() <= 10.0 * opts.tol) {
      report.converged = true;
      break;
    }
  }

  report.beta_hat = beta;
  // Final covariance from the corrected Hessian (S + P) - A, with A
  // projected to PSD and shrunk until the difference stays PD, so the
  // QNEM spread dominates the complete-data-only spread.
  const Matrix M = complete_data_precision(data, prior, e_step(data, beta));
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
  Vector evals = es.eigenvalues().cwiseMax(0.0);
  Matrix Apsd =
      es.eigenvectors() * evals.asDiagonal() * es.eigenvectors().transpose();
  for (int k = 0; k < 60; ++k) {
    Eigen::LLT<Matrix> llt(M - Apsd);
    if (llt.info() == Eigen::Success) break;
    Apsd *= 0.5;
  }
  report.cov = invert_spd(M - Apsd);
  return report;
}

Vector approx_stddev(const FitReport& report) {
  if (report.cov.size() == 0)
    throw std::invalid_argument("approx_stddev: report carries no covariance");
  Eigen::LLT<Matrix> llt(report.cov);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("approx_stddev: covariance not PD", 0.0);
  return report.cov.diagonal().cwiseSqrt();
}

}  // namespace pgem
