#include "pgem/multinomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pgem/linsolve.hpp"
#include "pgem/pg_math.hpp"

namespace pgem {

void MultiDataset::validate() const {
  if (Y.rows() != X.rows())
    throw std::invalid_argument("MultiDataset: Y/X row mismatch");
  if (Y.cols() < 2) throw std::invalid_argument("MultiDataset: need K >= 2");
  if (!Y.allFinite() || !X.allFinite())
    throw std::invalid_argument("MultiDataset: non-finite entries");
  for (Eigen::Index t = 0; t < Y.rows(); ++t) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < Y.cols(); ++k) {
      if (Y(t, k) != 0.0 && Y(t, k) != 1.0)
        throw std::invalid_argument("MultiDataset: Y entries must be 0/1");
      sum += Y(t, k);
    }
    if (sum != 1.0)
      throw std::invalid_argument("MultiDataset: each Y row must sum to 1");
  }
}

Matrix class_probs(const CoefBlock& coef, const Matrix& X) {
  Matrix Z = X * coef.B;
  Matrix P(Z.rows(), Z.cols());
  for (Eigen::Index t = 0; t < Z.rows(); ++t) {
    const double mx = Z.row(t).maxCoeff();
    double denom = 0.0;
    for (Eigen::Index k = 0; k < Z.cols(); ++k) {
      P(t, k) = std::exp(Z(t, k) - mx);
      denom += P(t, k);
    }
    P.row(t) /= denom;
  }
  return P;
}

Vector conditional_offset(const CoefBlock& coef, Eigen::Index k,
                          const Matrix& X) {
  if (coef.B.cols() < 2)
    throw std::invalid_argument("conditional_offset: need K >= 2");
  const Matrix Z = X * coef.B;
  Vector c(Z.rows());
  for (Eigen::Index t = 0; t < Z.rows(); ++t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < Z.cols(); ++l)
      if (l != k) mx = std::max(mx, Z(t, l));
    double sum = 0.0;
    for (Eigen::Index l = 0; l < Z.cols(); ++l)
      if (l != k) sum += std::exp(Z(t, l) - mx);
    c[t] = mx + std::log(sum);
  }
  return c;
}

double quasi_log_likelihood(const MultiDataset& data, const CoefBlock& coef) {
  const Matrix P = class_probs(coef, data.X);
  double ll = 0.0;
  for (Eigen::Index t = 0; t < data.n(); ++t)
    for (Eigen::Index k = 0; k < data.classes(); ++k) {
      const double p = std::clamp(P(t, k), 1e-300, 1.0 - 1e-16);
      ll += data.Y(t, k) * std::log(p) + (1.0 - data.Y(t, k)) * std::log1p(-p);
    }
  return ll;
}

double multinomial_log_likelihood(const MultiDataset& data,
                                  const CoefBlock& coef) {
  const Matrix P = class_probs(coef, data.X);
  double ll = 0.0;
  for (Eigen::Index t = 0; t < data.n(); ++t)
    for (Eigen::Index k = 0; k < data.classes(); ++k)
      if (data.Y(t, k) == 1.0) ll += std::log(std::max(P(t, k), 1e-300));
  return ll;
}

namespace {

double penalty_term(const CoefBlock& coef, const PenaltySpec& penalty,
                    bool all_columns) {
  double value = 0.0;
  if (penalty.family == PenaltyFamily::lasso && penalty.lambda > 0.0) {
    const Eigen::Index k0 = all_columns ? 0 : 1;
    for (Eigen::Index k = k0; k < coef.B.cols(); ++k)
      for (Eigen::Index j = 0; j < coef.B.rows(); ++j)
        if (!penalty.is_exempt(j))
          value += penalty.lambda * std::abs(coef.B(j, k));
  }
  return value;
}

}  // namespace

double penalized_quasi_objective(const MultiDataset& data, const CoefBlock& coef,
                                 const PenaltySpec& penalty, bool all_columns) {
  return quasi_log_likelihood(data, coef) -
         penalty_term(coef, penalty, all_columns);
}

double penalized_multinomial_objective(const MultiDataset& data,
                                       const CoefBlock& coef,
                                       const PenaltySpec& penalty,
                                       bool all_columns) {
  return multinomial_log_likelihood(data, coef) -
         penalty_term(coef, penalty, all_columns);
}

namespace {

// Soft-thresholded CD sweeps on 1/2 b'Sb - d'b + sum lam_j |b_j|.
void cd_quadratic(const Matrix& S, const Vector& d, const Vector& lam,
                  Vector& b, double tol, int max_sweeps) {
  Vector Sb = S * b;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      if (S(j, j) <= 0.0) continue;
      const double partial = d[j] - Sb[j] + S(j, j) * b[j];
      const double bj = soft_threshold(partial, lam[j]) / S(j, j);
      const double delta = bj - b[j];
      if (delta != 0.0) {
        Sb += delta * S.col(j);
        b[j] = bj;
        change = std::max(change, std::abs(delta));
      }
    }
    if (change <= tol) break;
  }
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

MultiFitResult fit_ecm(const MultiDataset& data, const PenaltySpec& penalty,
                       const EcmOptions& opts) {
  data.validate();
  penalty.validate(data.dim());
  const Eigen::Index d = data.dim();
  const Eigen::Index K = data.classes();

  MultiFitResult res;
  res.coef.B = Matrix::Zero(d, K);
  Vector lam = Vector::Constant(d, penalty.family == PenaltyFamily::lasso
                                       ? penalty.lambda
                                       : 0.0);
  for (Eigen::Index j = 0; j < d; ++j)
    if (penalty.is_exempt(j)) lam[j] = 0.0;

  double obj = penalized_multinomial_objective(data, res.coef, penalty);
  res.trace.push_back({0, obj, 0.0});

  for (int it = 1; it <= opts.max_iter; ++it) {
    const Matrix B_prev = res.coef.B;
    for (Eigen::Index k = 1; k < K; ++k) {
      const Vector c = conditional_offset(res.coef, k, data.X);
      Vector beta_k = res.coef.B.col(k);
      const Vector psi = data.X * beta_k - c;
      Vector omega(data.n());
      Vector kap(data.n());
      for (Eigen::Index t = 0; t < data.n(); ++t) {
        omega[t] = pg_mean(1.0, psi[t]);
        kap[t] = data.Y(t, k) - 0.5;
      }
      Matrix S = data.X.transpose() * omega.asDiagonal() * data.X;
      S = 0.5 * (S + S.transpose());
      const Vector rhs = data.X.transpose() * (kap + omega.cwiseProduct(c));

      Vector b_new = beta_k;
      {
        // Active-set ridge solve from the lasso E-step, then one exact l1
        // sweep for clipping and re-entry.
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < d; ++j)
          if (lam[j] == 0.0 || std::abs(b_new[j]) >= opts.zero_tol)
            active.push_back(j);
        if (!active.empty()) {
          const auto na = static_cast<Eigen::Index>(active.size());
          Matrix Sa(na, na);
          Vector da(na), warm(na);
          for (Eigen::Index a = 0; a < na; ++a) {
            da[a] = rhs[active[a]];
            warm[a] = b_new[active[a]];
            for (Eigen::Index bdx = 0; bdx < na; ++bdx)
              Sa(a, bdx) = S(active[a], active[bdx]);
            if (lam[active[a]] > 0.0)
              Sa(a, a) += lam[active[a]] / std::abs(b_new[active[a]]);
            else
              Sa(a, a) += 1e-10;  // lambda = 0 keeps the solve well-posed
          }
          CgConfig cfg;
          cfg.eps = 1e-10;
          cfg.warm_start = warm;
          const CgResult sol = solve_cg({Sa, da}, cfg);
          for (Eigen::Index a = 0; a < na; ++a) b_new[active[a]] = sol.x[a];
        }
        cd_quadratic(S, rhs, lam, b_new, 0.1 * opts.tol, 1);
        for (Eigen::Index j = 0; j < d; ++j)
          if (lam[j] > 0.0 && std::abs(b_new[j]) < opts.zero_tol) b_new[j] = 0.0;
      }

      // The block subproblem maximizes its own conditional slice; halve the
      // step whenever the joint objective would drop.
      CoefBlock trial = res.coef;
      trial.B.col(k) = b_new;
      double trial_obj = penalized_multinomial_objective(data, trial, penalty);
      int halvings = 0;
      while (trial_obj < obj && halvings < 25) {
        b_new = 0.5 * (b_new + beta_k);
        trial.B.col(k) = b_new;
        trial_obj = penalized_multinomial_objective(data, trial, penalty);
        ++halvings;
      }
      if (trial_obj >= obj) {
        res.coef.B.col(k) = b_new;
        obj = trial_obj;
      }
    }

    const double step = (res.coef.B - B_prev).lpNorm<Eigen::Infinity>();
    res.trace.push_back({it, obj, step});
    res.iterations = it;
    if (step <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

MultiFitResult fit_partial_irls(const MultiDataset& data,
                                const PenaltySpec& penalty,
                                const EcmOptions& opts) {
  data.validate();
  penalty.validate(data.dim());
  const Eigen::Index d = data.dim();
  const Eigen::Index K = data.classes();

  MultiFitResult res;
  res.coef.B = Matrix::Zero(d, K);
  Vector lam = Vector::Constant(d, penalty.family == PenaltyFamily::lasso
                                       ? penalty.lambda
                                       : 0.0);
  for (Eigen::Index j = 0; j < d; ++j)
    if (penalty.is_exempt(j)) lam[j] = 0.0;

  double obj = penalized_quasi_objective(data, res.coef, penalty, true);
  double best_obj = obj;
  Matrix best_B = res.coef.B;
  int worsening = 0;
  res.trace.push_back({0, obj, 0.0});

  for (int it = 1; it <= opts.max_iter; ++it) {
    const Matrix B_prev = res.coef.B;
    for (Eigen::Index k = 0; k < K; ++k) {
      const Matrix P = class_probs(res.coef, data.X);
      Vector w(data.n()), z(data.n());
      const Vector psi = data.X * res.coef.B.col(k);
      for (Eigen::Index t = 0; t < data.n(); ++t) {
        const double p = std::clamp(P(t, k), 1e-9, 1.0 - 1e-9);
        w[t] = p * (1.0 - p);
        z[t] = psi[t] + (data.Y(t, k) - p) / w[t];
      }
      Matrix S = data.X.transpose() * w.asDiagonal() * data.X;
      S = 0.5 * (S + S.transpose());
      const Vector rhs = data.X.transpose() * w.cwiseProduct(z);
      Vector b = res.coef.B.col(k);
      cd_quadratic(S, rhs, lam, b, 0.1 * opts.tol, 50);
      res.coef.B.col(k) = b;
    }
    // Median recentering: same probabilities, smaller penalty.
    for (Eigen::Index j = 0; j < d; ++j) {
      std::vector<double> row(static_cast<std::size_t>(K));
      for (Eigen::Index k = 0; k < K; ++k)
        row[static_cast<std::size_t>(k)] = res.coef.B(j, k);
      const double med = median_of(row);
      for (Eigen::Index k = 0; k < K; ++k) res.coef.B(j, k) -= med;
    }

    const double prev_obj = obj;
    obj = penalized_quasi_objective(data, res.coef, penalty, true);
    const double step = (res.coef.B - B_prev).lpNorm<Eigen::Infinity>();
    res.trace.push_back({it, obj, step});
    res.iterations = it;
    if (obj > best_obj) {
      best_obj = obj;
      best_B = res.coef.B;
    }
    worsening = obj < prev_obj ? worsening + 1 : 0;
    if (worsening >= 5) {
      res.diverged = true;
      break;
    }
    if (step <= opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.coef.B = best_B;
  return res;
}

}  // namespace pgem
