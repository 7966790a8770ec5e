#include "pgem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pgem/linsolve.hpp"
#include "pgem/pg_math.hpp"

namespace pgem {

void PenaltySpec::validate(Eigen::Index d) const {
  if (lambda < 0.0) throw std::invalid_argument("PenaltySpec: lambda must be >= 0");
  if (family == PenaltyFamily::bridge && !(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("PenaltySpec: bridge alpha must lie in (0, 1)");
  if (!exempt.empty() && static_cast<Eigen::Index>(exempt.size()) != d)
    throw std::invalid_argument("PenaltySpec: exemption mask length mismatch");
}

double penalized_objective(const Dataset& data, const PenaltySpec& penalty,
                           const Vector& beta) {
  double value = -log_likelihood(data, beta).log_posterior;
  if (penalty.family == PenaltyFamily::none || penalty.lambda == 0.0)
    return value;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (penalty.is_exempt(j)) continue;
    if (penalty.family == PenaltyFamily::lasso)
      value += penalty.lambda * std::abs(beta[j]);
    else
      value += penalty.lambda * std::pow(std::abs(beta[j]), penalty.alpha);
  }
  return value;
}

double lambda_max(const Dataset& data, const PenaltySpec& penalty) {
  const Vector g = data.X.transpose() * kappa(data);
  double mx = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j)
    if (!penalty.is_exempt(j)) mx = std::max(mx, std::abs(g[j]));
  return mx;
}

double soft_threshold(double z, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("soft_threshold: gamma must be >= 0");
  const double mag = std::abs(z) - gamma;
  if (mag <= 0.0) return 0.0;
  return z > 0.0 ? mag : -mag;
}

double cd_update(Eigen::Index j, const Vector& weights,
                 const Vector& working_resp, const Matrix& X,
                 const Vector& beta, double lambda) {
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double xij = X(i, j);
    const double fitted_wo_j = X.row(i).dot(beta) - xij * beta[j];
    num += weights[i] * xij * (working_resp[i] - fitted_wo_j);
    den += weights[i] * xij * xij;
  }
  if (den <= 0.0) return beta[j];  // degenerate column; caller skips
  return soft_threshold(num, lambda) / den;
}

WorkingSet irls_weights(const Dataset& data, const Vector& beta) {
  for (Eigen::Index t = 0; t < data.n(); ++t)
    if (data.m[t] != 1.0)
      throw std::invalid_argument("irls_weights: baseline requires m_t = 1");
  const Vector psi = data.X * beta;
  WorkingSet ws;
  ws.weights.resize(data.n());
  ws.working_resp.resize(data.n());
  for (Eigen::Index t = 0; t < data.n(); ++t) {
    const double p = std::clamp(sigmoid(psi[t]), 1e-9, 1.0 - 1e-9);
    const double w = p * (1.0 - p);
    ws.weights[t] = w;
    ws.working_resp[t] = psi[t] + (data.y[t] - p) / w;
  }
  return ws;
}

WorkingSet da_weights(const Dataset& data, const Vector& beta) {
  for (Eigen::Index t = 0; t < data.n(); ++t)
    if (data.m[t] != 1.0)
      throw std::invalid_argument("da_weights: comparison harness requires m_t = 1");
  const Vector psi = data.X * beta;
  WorkingSet ws;
  ws.weights.resize(data.n());
  ws.working_resp.resize(data.n());
  for (Eigen::Index t = 0; t < data.n(); ++t) {
    const double omega = pg_mean(1.0, psi[t]);
    ws.weights[t] = omega;
    ws.working_resp[t] = (2.0 * data.y[t] - 1.0) / omega;
  }
  return ws;
}

double bridge_precision(double beta_j, double alpha) {
  return alpha * std::pow(std::abs(beta_j), alpha - 2.0);
}

double lasso_kkt_residual(const Dataset& data, const PenaltySpec& penalty,
                          const Vector& beta) {
  const Vector g = log_likelihood(data, beta).gradient;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    double r;
    if (penalty.is_exempt(j) || penalty.family == PenaltyFamily::none ||
        penalty.lambda == 0.0) {
      r = std::abs(g[j]);
    } else if (beta[j] != 0.0) {
      r = std::abs(g[j] - penalty.lambda * (beta[j] > 0.0 ? 1.0 : -1.0));
    } else {
      r = std::max(0.0, std::abs(g[j]) - penalty.lambda);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

namespace {

// Sweeps of soft-thresholded coordinate descent on the quadratic
//   1/2 beta' S beta - d' beta + sum_j lam_j |beta_j|.
// Returns the number of sweeps taken.
int cd_sweeps_quadratic(const Matrix& S, const Vector& d, const Vector& lam,
                        Vector& beta, double tol, int max_sweeps) {
  const Eigen::Index p = beta.size();
  Vector Sbeta = S * beta;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double sjj = S(j, j);
      if (sjj <= 0.0) continue;
      const double partial = d[j] - Sbeta[j] + sjj * beta[j];
      const double bj = soft_threshold(partial, lam[j]) / sjj;
      const double delta = bj - beta[j];
      if (delta != 0.0) {
        Sbeta += delta * S.col(j);
        beta[j] = bj;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change <= tol) {
      ++sweep;
      break;
    }
  }
  return sweep;
}

Vector penalty_vector(const PenaltySpec& penalty, Eigen::Index d) {
  Vector lam = Vector::Constant(d, penalty.lambda);
  for (Eigen::Index j = 0; j < d; ++j)
    if (penalty.is_exempt(j)) lam[j] = 0.0;
  return lam;
}

}  // namespace

FitReport fit_lasso_em(const Dataset& data, const PenaltySpec& penalty,
                       const SparseOptions& opts) {
  data.validate();
  penalty.validate(data.dim());
  if (penalty.family != PenaltyFamily::lasso || !(penalty.lambda > 0.0))
    throw std::invalid_argument("fit_lasso_em: needs a lasso penalty with lambda > 0");

  const Eigen::Index d = data.dim();
  const Vector dvec = data.X.transpose() * kappa(data);
  const Vector lam = penalty_vector(penalty, d);

  FitReport report;
  report.algorithm = opts.solver == SparseSolver::cd ? "da-cd" : "da-cg";
  Vector beta = opts.beta0 ? *opts.beta0 : Vector::Zero(d);
  double obj = penalized_objective(data, penalty, beta);
  report.trace.push_back({0, obj, 0.0});

  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vector omega = e_step(data, beta);
    Matrix S = data.X.transpose() * omega.asDiagonal() * data.X;
    S = 0.5 * (S + S.transpose());
    const Vector beta_prev = beta;

    if (opts.solver == SparseSolver::cg) {
      // Active-set ridge system from the gamma E-step; coordinates at zero
      // are excluded this iteration and re-entered by the CD sweep below.
      std::vector<Eigen::Index> active;
      for (Eigen::Index j = 0; j < d; ++j)
        if (lam[j] == 0.0 || std::abs(beta[j]) >= opts.zero_tol)
          active.push_back(j);
      if (!active.empty()) {
        const auto na = static_cast<Eigen::Index>(active.size());
        Matrix Sa(na, na);
        Vector da(na), warm(na);
        for (Eigen::Index a = 0; a < na; ++a) {
          da[a] = dvec[active[a]];
          warm[a] = beta[active[a]];
          for (Eigen::Index b = 0; b < na; ++b) Sa(a, b) = S(active[a], active[b]);
          if (lam[active[a]] > 0.0)
            Sa(a, a) += lam[active[a]] / std::abs(beta[active[a]]);
        }
        CgConfig cfg;
        cfg.eps = 1e-10;
        cfg.warm_start = warm;
        const CgResult sol = solve_cg({Sa, da}, cfg);
        for (Eigen::Index a = 0; a < na; ++a) beta[active[a]] = sol.x[a];
      }
      // One exact l1 sweep on the same quadratic: clips, and lets zero
      // coordinates violating the subgradient condition re-enter.
      cd_sweeps_quadratic(S, dvec, lam, beta, opts.tol, 1);
    } else {
      cd_sweeps_quadratic(S, dvec, lam, beta, 0.1 * opts.tol, opts.max_sweeps);
    }

    for (Eigen::Index j = 0; j < d; ++j)
      if (lam[j] > 0.0 && std::abs(beta[j]) < opts.zero_tol) beta[j] = 0.0;

    obj = penalized_objective(data, penalty, beta);
    report.trace.push_back({it, obj, (beta - beta_prev).lpNorm<Eigen::Infinity>()});
    report.iterations = it;
    if (lasso_kkt_residual(data, penalty, beta) <= opts.tol) {
      report.converged = true;
      break;
    }
  }
  report.beta_hat = beta;
  return report;
}

FitReport fit_bridge_em(const Dataset& data, const PenaltySpec& penalty,
                        const SparseOptions& opts) {
  data.validate();
  penalty.validate(data.dim());
  if (penalty.family != PenaltyFamily::bridge || !(penalty.lambda > 0.0))
    throw std::invalid_argument("fit_bridge_em: needs a bridge penalty with lambda > 0");

  const Eigen::Index d = data.dim();
  const Vector dvec = data.X.transpose() * kappa(data);

  FitReport report;
  report.algorithm = "bridge";
  // Start from the lasso solution at the same lambda so the nonzero support
  // is sensible before the singular E-step takes over.
  Vector beta;
  if (opts.beta0) {
    beta = *opts.beta0;
  } else {
    PenaltySpec warm = penalty;
    warm.family = PenaltyFamily::lasso;
    SparseOptions warm_opts = opts;
    warm_opts.solver = SparseSolver::cd;
    beta = fit_lasso_em(data, warm, warm_opts).beta_hat;
  }
  std::vector<bool> frozen(static_cast<std::size_t>(d), false);
  for (Eigen::Index j = 0; j < d; ++j)
    if (!penalty.is_exempt(j) && std::abs(beta[j]) < opts.bridge_floor) {
      beta[j] = 0.0;
      frozen[static_cast<std::size_t>(j)] = true;
    }

  double obj = penalized_objective(data, penalty, beta);
  report.trace.push_back({0, obj, 0.0});

  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vector omega = e_step(data, beta);
    const Vector beta_prev = beta;

    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < d; ++j)
      if (!frozen[static_cast<std::size_t>(j)]) active.push_back(j);
    if (active.empty()) break;
    const auto na = static_cast<Eigen::Index>(active.size());
    Matrix Sa(na, na);
    Vector da(na), warm_x(na);
    const Matrix S = data.X.transpose() * omega.asDiagonal() * data.X;
    for (Eigen::Index a = 0; a < na; ++a) {
      const Eigen::Index j = active[a];
      da[a] = dvec[j];
      warm_x[a] = beta[j];
      for (Eigen::Index b = 0; b < na; ++b) Sa(a, b) = S(j, active[b]);
      if (!penalty.is_exempt(j))
        Sa(a, a) += penalty.lambda * bridge_precision(beta[j], penalty.alpha);
    }
    CgConfig cfg;
    cfg.eps = 1e-10;
    cfg.warm_start = warm_x;
    const CgResult sol = solve_cg({Sa, da}, cfg);
    for (Eigen::Index a = 0; a < na; ++a) beta[active[a]] = sol.x[a];

    for (Eigen::Index j = 0; j < d; ++j)
      if (!penalty.is_exempt(j) && !frozen[static_cast<std::size_t>(j)] &&
          std::abs(beta[j]) < opts.bridge_floor) {
        beta[j] = 0.0;
        frozen[static_cast<std::size_t>(j)] = true;
      }

    obj = penalized_objective(data, penalty, beta);
    const double step = (beta - beta_prev).lpNorm<Eigen::Infinity>();
    report.trace.push_back({it, obj, step});
    report.iterations = it;
    if (step <= opts.tol) {
      report.converged = true;
      break;
    }
  }
  report.beta_hat = beta;
  return report;
}

FitReport fit_irls_cd(const Dataset& data, const PenaltySpec& penalty,
                      const SparseOptions& opts) {
  data.validate();
  penalty.validate(data.dim());

  const Eigen::Index d = data.dim();
  const Vector lam = penalty_vector(penalty, d);

  FitReport report;
  report.algorithm = "irls-cd";
  Vector beta = opts.beta0 ? *opts.beta0 : Vector::Zero(d);
  double obj = penalized_objective(data, penalty, beta);
  double best_obj = obj;
  Vector best_beta = beta;
  int worsening = 0;
  report.trace.push_back({0, obj, 0.0});

  for (int it = 1; it <= opts.max_iter; ++it) {
    const WorkingSet ws = irls_weights(data, beta);
    // Penalized WLS in quadratic form.
    Matrix S = data.X.transpose() * ws.weights.asDiagonal() * data.X;
    S = 0.5 * (S + S.transpose());
    const Vector dvec =
        data.X.transpose() * ws.weights.cwiseProduct(ws.working_resp);
    const Vector beta_prev = beta;
    cd_sweeps_quadratic(S, dvec, lam, beta, 0.1 * opts.tol, opts.max_sweeps);

    const double prev_obj = obj;
    obj = penalized_objective(data, penalty, beta);
    const double step = (beta - beta_prev).lpNorm<Eigen::Infinity>();
    report.trace.push_back({it, obj, step});
    report.iterations = it;

    if (obj < best_obj) {
      best_obj = obj;
      best_beta = beta;
    }
    worsening = obj > prev_obj ? worsening + 1 : 0;
    if (worsening >= 5) {
      report.diverged = true;
      break;
    }
    if (step <= opts.tol) {
      report.converged = true;
      break;
    }
  }
  report.beta_hat = best_beta;
  return report;
}

std::string path_method_name(PathMethod method) {
  switch (method) {
    case PathMethod::da_cd: return "da-cd";
    case PathMethod::da_cg: return "da-cg";
    case PathMethod::irls_cd: return "irls-cd";
    case PathMethod::bridge: return "bridge";
  }
  return "?";
}

PathResult solution_path(const Dataset& data, PathMethod method,
                         const PenaltySpec& base, const std::vector<double>& grid,
                         bool warm_start, const SparseOptions& opts) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0))
      throw std::invalid_argument("solution_path: grid must be positive");
    if (i > 0 && grid[i] >= grid[i - 1])
      throw std::invalid_argument("solution_path: grid must be strictly decreasing");
  }

  const Eigen::Index d = data.dim();
  PathResult out;
  out.lambdas = grid;
  out.betas = Matrix::Zero(static_cast<Eigen::Index>(grid.size()), d);
  out.objectives.resize(grid.size());
  out.nonzero_counts.resize(grid.size());
  out.ok.resize(grid.size(), true);

  Vector prev = Vector::Zero(d);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    PenaltySpec p = base.with_lambda(grid[g]);
    if (method != PathMethod::bridge) p.family = PenaltyFamily::lasso;
    SparseOptions o = opts;
    if (warm_start) o.beta0 = prev;
    FitReport fit;
    try {
      switch (method) {
        case PathMethod::da_cd:
          o.solver = SparseSolver::cd;
          fit = fit_lasso_em(data, p, o);
          break;
        case PathMethod::da_cg:
          o.solver = SparseSolver::cg;
          fit = fit_lasso_em(data, p, o);
          break;
        case PathMethod::irls_cd:
          fit = fit_irls_cd(data, p, o);
          break;
        case PathMethod::bridge:
          p.family = PenaltyFamily::bridge;
          fit = fit_bridge_em(data, p, o);
          break;
      }
    } catch (const std::exception&) {
      out.ok[g] = false;
      out.objectives[g] = std::numeric_limits<double>::quiet_NaN();
      out.nonzero_counts[g] = 0;
      continue;
    }
    const Eigen::Index row = static_cast<Eigen::Index>(g);
    out.betas.row(row) = fit.beta_hat.transpose();
    out.objectives[g] = penalized_objective(data, p, fit.beta_hat);
    int nnz = 0;
    for (Eigen::Index j = 0; j < d; ++j)
      if (std::abs(fit.beta_hat[j]) > 1e-8) ++nnz;
    out.nonzero_counts[g] = nnz;
    if (warm_start) prev = fit.beta_hat;
  }
  return out;
}

std::vector<double> default_lambda_grid(const Dataset& data,
                                        const PenaltySpec& penalty,
                                        int n_points, double ratio) {
  const double lmax = lambda_max(data, penalty);
  std::vector<double> grid(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double f = n_points == 1 ? 0.0
                                   : static_cast<double>(i) / (n_points - 1);
    grid[static_cast<std::size_t>(i)] = lmax * std::pow(ratio, f);
  }
  return grid;
}

}  // namespace pgem
