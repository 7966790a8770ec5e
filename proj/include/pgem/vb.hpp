#ifndef PGEM_VB_HPP
#define PGEM_VB_HPP

#include "pgem/em.hpp"
#include "pgem/model.hpp"

namespace pgem {

// Optimal variational tightness coefficient tanh(psi/2) / (4 psi),
// continuously extended to 1/8 at psi = 0.  Equals pg_mean(1, psi) / 2.
double lambda_hat(double psi);

// xi_t = sqrt(x_t' V x_t + (x_t' m)^2).
Vector xi_update(const Dataset& data, const Vector& m, const Matrix& V);

// Evidence lower bound at the given xi; the Gaussian integral over beta is
// closed form because the bounded likelihood is a quadratic in beta.
double elbo(const Dataset& data, const GaussianPrior& prior, const Vector& xi);

struct VbOptions {
  double tol = 1e-10;  // absolute ELBO change
  int max_iter = 10000;
};

// Variational-Bayes iteration: alternate the Gaussian (m, V) update of the
// bounded model with the xi update, until the ELBO change drops below tol.
// beta_hat is the variational mean; cov is the variational covariance.
FitReport fit_vb(const Dataset& data, const GaussianPrior& prior,
                 const VbOptions& opts = {});

}  // namespace pgem

#endif
