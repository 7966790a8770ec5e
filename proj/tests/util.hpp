#ifndef PGEM_TESTS_UTIL_HPP
#define PGEM_TESTS_UTIL_HPP

// Shared data generators for the test suites.

#include <random>

#include "pgem/model.hpp"

namespace pgem::testutil {

enum class Family { bernoulli, binomial, negative_binomial };

// Random logistic-family instance with standard-normal predictors and a
// standard-normal truth vector.
inline Dataset make_data(Eigen::Index n, Eigen::Index d, std::uint64_t seed,
                           Family family = Family::bernoulli) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dataset data;
  data.X.resize(n, d);
  data.y.resize(n);
  data.m.resize(n);
  Vector beta(d);
  for (Eigen::Index j = 0; j < d; ++j) beta[j] = normal(rng);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < d; ++j) data.X(t, j) = normal(rng);
    const double p = sigmoid(data.X.row(t).dot(beta));
    switch (family) {
      case Family::bernoulli: {
        data.m[t] = 1.0;
        data.y[t] = unif(rng) < p ? 1.0 : 0.0;
        break;
      }
      case Family::binomial: {
        const int m = 1 + static_cast<int>(t % 6);
        double y = 0.0;
        for (int i = 0; i < m; ++i) y += unif(rng) < p ? 1.0 : 0.0;
        data.m[t] = m;
        data.y[t] = y;
        break;
      }
      case Family::negative_binomial: {
        // y failures-before-r-successes style counts; m = y + r with a
        // non-integer overdispersion r.
        const double r = 2.5;
        std::geometric_distribution<int> geo(std::max(1e-3, 1.0 - p));
        double y = 0.0;
        for (int i = 0; i < 3; ++i) y += geo(rng);
        data.y[t] = y;
        data.m[t] = y + r;
        break;
      }
    }
  }
  return data;
}

}  // namespace pgem::testutil

#endif
