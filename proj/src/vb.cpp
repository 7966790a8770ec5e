#include "pgem/vb.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "pgem/pg_math.hpp"

namespace pgem {

namespace {

// omega_t = (m_t / 2 xi_t) tanh(xi_t / 2), the working precision implied
// by the bound at tightness xi.
Vector omega_from_xi(const Dataset& data, const Vector& xi) {
  Vector omega(data.n());
  for (Eigen::Index t = 0; t < data.n(); ++t)
    omega[t] = pg_mean(data.m[t], xi[t]);
  return omega;
}

double log_det_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

double lambda_hat(double psi) { return 0.5 * pg_mean(1.0, psi); }

Vector xi_update(const Dataset& data, const Vector& m, const Matrix& V) {
  Vector xi(data.n());
  for (Eigen::Index t = 0; t < data.n(); ++t) {
    const auto x = data.X.row(t);
    const double lin = x.dot(m);
    xi[t] = std::sqrt(x * V * x.transpose() + lin * lin);
  }
  return xi;
}

double elbo(const Dataset& data, const GaussianPrior& prior, const Vector& xi) {
  if (xi.size() != data.n())
    throw std::invalid_argument("elbo: xi length mismatch");
  for (Eigen::Index t = 0; t < xi.size(); ++t)
    if (!(xi[t] > 0.0)) throw std::invalid_argument("elbo: xi must be positive");

  const Vector omega = omega_from_xi(data, xi);
  Matrix prec = data.X.transpose() * omega.asDiagonal() * data.X + prior.precision;
  prec = 0.5 * (prec + prec.transpose());
  Eigen::LLT<Matrix> llt_prec(prec);
  if (llt_prec.info() != Eigen::Success)
    throw std::runtime_error("elbo: bound precision not positive-definite");
  Eigen::LLT<Matrix> llt_prior(prior.precision);
  if (llt_prior.info() != Eigen::Success)
    throw std::runtime_error("elbo: prior precision not positive-definite");

  const Vector rhs = data.X.transpose() * kappa(data) + prior.precision * prior.mu;
  const Vector m = llt_prec.solve(rhs);

  double value = 0.5 * (log_det_llt(llt_prior) - log_det_llt(llt_prec));
  value += 0.5 * m.dot(rhs);  // m' Prec m
  value -= 0.5 * prior.mu.dot(prior.precision * prior.mu);
  for (Eigen::Index t = 0; t < data.n(); ++t) {
    value += 0.5 * omega[t] * xi[t] * xi[t];
    value -= data.m[t] * (log_cosh(0.5 * xi[t]) + std::numbers::ln2);
  }
  return value;
}

FitReport fit_vb(const Dataset& data, const GaussianPrior& prior,
                 const VbOptions& opts) {
  data.validate();
  prior.validate();
  if (!(opts.tol > 0.0)) throw std::invalid_argument("fit_vb: tol must be positive");

  const Eigen::Index d = data.dim();
  FitReport report;
  report.algorithm = "vb";

  Vector xi = (data.X * prior.mu).cwiseAbs().array() + 1e-6;
  Vector m = prior.mu;
  Matrix V;
  double bound = data.n() > 0 ? elbo(data, prior, xi) : 0.0;
  report.trace.push_back({0, bound, 0.0});

  if (data.n() == 0) {
    Eigen::LLT<Matrix> llt(prior.precision);
    report.beta_hat = prior.mu;
    report.cov = llt.solve(Matrix::Identity(d, d));
    report.converged = true;
    return report;
  }

  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vector omega = omega_from_xi(data, xi);
    Matrix prec =
        data.X.transpose() * omega.asDiagonal() * data.X + prior.precision;
    prec = 0.5 * (prec + prec.transpose());
    Eigen::LLT<Matrix> llt(prec);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("fit_vb: bound precision not positive-definite");
    V = llt.solve(Matrix::Identity(d, d));
    const Vector rhs =
        data.X.transpose() * kappa(data) + prior.precision * prior.mu;
    const Vector m_new = llt.solve(rhs);
    xi = xi_update(data, m_new, V);

    const double bound_new = elbo(data, prior, xi);
    const double step = (m_new - m).lpNorm<Eigen::Infinity>();
    m = m_new;
    report.trace.push_back({it, bound_new, step});
    report.iterations = it;
    if (std::abs(bound_new - bound) <= opts.tol) {
      bound = bound_new;
      report.converged = true;
      break;
    }
    bound = bound_new;
  }

  report.beta_hat = m;
  report.cov = V;
  return report;
}

}  // namespace pgem
