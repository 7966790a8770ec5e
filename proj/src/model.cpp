#include "pgem/model.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pgem {

void Dataset::validate() const {
  if (y.size() != X.rows() || m.size() != X.rows())
    throw std::invalid_argument("Dataset: y/m length must match rows of X");
  if (X.cols() < 1) throw std::invalid_argument("Dataset: need d >= 1");
  if (!y.allFinite() || !m.allFinite() || !X.allFinite())
    throw std::invalid_argument("Dataset: non-finite entries");
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    if (m[t] <= 0.0) {
      std::ostringstream os;
      os << "Dataset: m[" << t << "] = " << m[t] << " must be positive";
      throw std::invalid_argument(os.str());
    }
    if (y[t] < 0.0 || y[t] > m[t]) {
      std::ostringstream os;
      os << "Dataset: y[" << t << "] = " << y[t] << " outside [0, m]";
      throw std::invalid_argument(os.str());
    }
  }
}

Dataset Dataset::rows(const std::vector<Eigen::Index>& idx) const {
  Dataset out;
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  out.m.resize(static_cast<Eigen::Index>(idx.size()));
  out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.y[static_cast<Eigen::Index>(i)] = y[idx[i]];
    out.m[static_cast<Eigen::Index>(i)] = m[idx[i]];
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
  }
  return out;
}

GaussianPrior GaussianPrior::vague(Eigen::Index d, double prec) {
  GaussianPrior p;
  p.mu = Vector::Zero(d);
  p.precision = prec * Matrix::Identity(d, d);
  return p;
}

void GaussianPrior::validate() const {
  if (precision.rows() != precision.cols() || precision.rows() != mu.size())
    throw std::invalid_argument("GaussianPrior: dimension mismatch");
  const double scale = precision.cwiseAbs().maxCoeff();
  if ((precision - precision.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(scale, 1.0))
    throw std::invalid_argument("GaussianPrior: precision not symmetric");
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("GaussianPrior: precision not positive-definite");
}

Vector kappa(const Dataset& data) { return data.y - 0.5 * data.m; }

double softplus(double psi) {
  return std::max(psi, 0.0) + std::log1p(std::exp(-std::abs(psi)));
}

double sigmoid(double psi) {
  if (psi >= 0.0) return 1.0 / (1.0 + std::exp(-psi));
  const double e = std::exp(psi);
  return e / (1.0 + e);
}

ObjectiveReport log_likelihood(const Dataset& data, const Vector& beta) {
  if (beta.size() != data.dim())
    throw std::invalid_argument("log_likelihood: beta dimension mismatch");
  const Vector psi = data.X * beta;
  double ll = 0.0;
  Vector resid(data.n());
  for (Eigen::Index t = 0; t < data.n(); ++t) {
    ll += data.y[t] * psi[t] - data.m[t] * softplus(psi[t]);
    resid[t] = data.y[t] - data.m[t] * sigmoid(psi[t]);
  }
  ObjectiveReport rep;
  rep.log_posterior = ll;
  rep.gradient = data.X.transpose() * resid;
  return rep;
}

ObjectiveReport log_posterior(const Dataset& data, const GaussianPrior& prior,
                              const Vector& beta, bool with_hessian) {
  if (beta.size() != data.dim() || prior.mu.size() != data.dim())
    throw std::invalid_argument("log_posterior: dimension mismatch");
  ObjectiveReport rep = log_likelihood(data, beta);
  const Vector centered = beta - prior.mu;
  const Vector pc = prior.precision * centered;
  rep.log_posterior -= 0.5 * centered.dot(pc);
  rep.gradient -= pc;
  if (with_hessian) {
    const Vector psi = data.X * beta;
    Vector w(data.n());
    for (Eigen::Index t = 0; t < data.n(); ++t) {
      const double p = sigmoid(psi[t]);
      w[t] = data.m[t] * p * (1.0 - p);
    }
    Matrix hess = -(data.X.transpose() * w.asDiagonal() * data.X) - prior.precision;
    rep.hessian = 0.5 * (hess + hess.transpose());
  }
  return rep;
}

Vector oracle_mode(const Dataset& data, const GaussianPrior& prior,
                   const Vector& beta0, double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("oracle_mode: tol must be positive");
  Vector beta = beta0;
  ObjectiveReport rep = log_posterior(data, prior, beta, true);
  for (int it = 0; it < max_iter; ++it) {
    if (rep.gradient.lpNorm<Eigen::Infinity>() <= tol) return beta;
    Eigen::LDLT<Matrix> ldlt(-*rep.hessian);
    Vector step = ldlt.solve(rep.gradient);
    double scale = 1.0;
    for (int h = 0; h <= 20; ++h) {
      const Vector trial = beta + scale * step;
      ObjectiveReport trep = log_posterior(data, prior, trial, true);
      // Near the mode the objective plateaus at floating-point resolution;
      // accept a step that shrinks the gradient instead.
      if (trep.log_posterior >= rep.log_posterior ||
          (trep.log_posterior >=
               rep.log_posterior - 1e-12 * std::abs(rep.log_posterior) &&
           trep.gradient.lpNorm<Eigen::Infinity>() <
               rep.gradient.lpNorm<Eigen::Infinity>())) {
        beta = trial;
        rep = std::move(trep);
        break;
      }
      if (h == 20) {
        // No ascent direction left at this scale; fall through to the
        // gradient check on the next loop.
        rep = log_posterior(data, prior, beta, true);
      }
      scale *= 0.5;
    }
  }
  if (rep.gradient.lpNorm<Eigen::Infinity>() <= tol) return beta;
  std::ostringstream os;
  os << "oracle_mode: no convergence after " << max_iter
     << " iterations; ||grad||_inf = " << rep.gradient.lpNorm<Eigen::Infinity>();
  throw std::runtime_error(os.str());
}

}  // namespace pgem
