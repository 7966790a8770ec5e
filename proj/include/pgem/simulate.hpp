#ifndef PGEM_SIMULATE_HPP
#define PGEM_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "pgem/model.hpp"

namespace pgem {

enum class Design { appendix_a, figure1, appendix_b, custom };

Design design_from_name(const std::string& name);

struct SimulateOverrides {
  std::optional<Eigen::Index> n;
  std::optional<Eigen::Index> d;
  std::optional<Eigen::Index> factors;  // figure1 factor count
};

struct SimulateResult {
  Dataset data;
  Vector beta_true;
};

// Deterministic given the seed.
//  appendix_a: n=250, d=10, beta spanning -3..3 in steps of 2/3, standard
//              normal predictors, m=1 Bernoulli draws.
//  figure1:    collinear normal predictors with covariance B B' + 0.1 I,
//              columns rescaled to marginal variance 1/d; desk-scale
//              defaults d=50, factors=10, n=10^4 (larger sizes reachable
//              via overrides).
//  appendix_b: 500 x 50 random 0/1 design, first 10 coefficients sqrt(5)
//              with alternating signs.
//  custom:     n, d from overrides; standard normal X, standard normal beta.
SimulateResult simulate(Design design, std::uint64_t seed,
                        const SimulateOverrides& overrides = {});

}  // namespace pgem

#endif
