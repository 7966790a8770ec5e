#ifndef PGEM_PG_MATH_HPP
#define PGEM_PG_MATH_HPP

#include <cstdint>
#include <random>

namespace pgem {

// Parameters of a Polya-Gamma distribution PG(b, c): b > 0 is the shape,
// c is the exponential tilt.  Every derived quantity is even in c.
struct PGParams {
  double b;
  double c;
};

// E(omega) for omega ~ PG(b, c): (b / 2c) * tanh(c / 2), continuously
// extended to b/4 at c = 0.  Throws std::domain_error for b <= 0.
double pg_mean(double b, double c);

// Laplace transform E{exp(-omega t)} for omega ~ PG(b, c):
//   cosh^b(c/2) / cosh^b(sqrt((c^2/2 + t)/2))
// computed in log space to avoid overflow.  Requires b > 0, c^2/2 + t >= 0.
double pg_laplace(double b, double c, double t);

// log cosh(x) without overflow for large |x|.
double log_cosh(double x);

// One draw from the truncated-series representation of PG(b, c):
//   (1 / 2 pi^2) * sum_{k=1..terms} g_k / ((k - 1/2)^2 + c^2 / (4 pi^2)),
// g_k iid Gamma(b, 1).  Test oracle only; deterministic given the engine
// state.  Requires b > 0, terms >= 1.
double pg_sample_truncated(double b, double c, int terms, std::mt19937_64& rng);

// Convenience overload seeding a fresh engine.
double pg_sample_truncated(double b, double c, int terms, std::uint64_t seed);

}  // namespace pgem

#endif
