#include "pgem/pg_math.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pgem {

double pg_mean(double b, double c) {
  if (!(b > 0.0)) throw std::domain_error("pg_mean: shape b must be positive");
  const double x = 0.5 * c;
  if (std::abs(c) < 1e-4) {
    // tanh(x)/x = 1 - x^2/3 + 2 x^4/15 + O(x^6); direct form cancels at 0.
    const double x2 = x * x;
    return 0.25 * b * (1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0);
  }
  return b / (2.0 * c) * std::tanh(x);
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double pg_laplace(double b, double c, double t) {
  if (!(b > 0.0)) throw std::domain_error("pg_laplace: shape b must be positive");
  const double shifted = 0.5 * c * c + t;
  if (shifted < 0.0)
    throw std::domain_error("pg_laplace: c^2/2 + t must be non-negative");
  const double arg = std::sqrt(0.5 * shifted);
  return std::exp(b * (log_cosh(0.5 * c) - log_cosh(arg)));
}

double pg_sample_truncated(double b, double c, int terms, std::mt19937_64& rng) {
  if (!(b > 0.0))
    throw std::domain_error("pg_sample_truncated: shape b must be positive");
  if (terms < 1)
    throw std::domain_error("pg_sample_truncated: need at least one term");
  const double pi = std::numbers::pi;
  const double tilt = c * c / (4.0 * pi * pi);
  std::gamma_distribution<double> gamma(b, 1.0);
  double sum = 0.0;
  for (int k = 1; k <= terms; ++k) {
    const double km = k - 0.5;
    sum += gamma(rng) / (km * km + tilt);
  }
  return sum / (2.0 * pi * pi);
}

double pg_sample_truncated(double b, double c, int terms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return pg_sample_truncated(b, c, terms, rng);
}

}  // namespace pgem
