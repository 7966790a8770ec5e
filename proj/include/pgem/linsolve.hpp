#ifndef PGEM_LINSOLVE_HPP
#define PGEM_LINSOLVE_HPP

#include <optional>
#include <stdexcept>

#include "pgem/model.hpp"

namespace pgem {

// S beta = d_vec with S symmetric; positive-definite whenever assembled as
// X' Omega X + Sigma^{-1} with all omega > 0.
struct SpdSystem {
  Matrix S;
  Vector d_vec;
};

struct CgConfig {
  double eps = 1e-8;  // relative residual tolerance, in (0, 1)
  int max_iter = 0;   // 0 means 10 * d
  std::optional<Vector> warm_start;
};

struct CgResult {
  Vector x;
  int iterations = 0;
  bool truncated = false;  // hit max_iter before the tolerance
};

// Raised when a factorization or CG breakdown shows the system is not
// positive-definite; carries the offending pivot.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(const std::string& what, double pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  double pivot() const { return pivot_; }

 private:
  double pivot_;
};

// Direct symmetric factorization solve.  Throws NotPositiveDefinite with the
// smallest pivot when S is not PD.
Vector solve_direct(const SpdSystem& system);

// Conjugate gradient with relative-residual stopping:
//   ||d - S x||^2 <= eps^2 ||d - S x0||^2.
// A max_iter exit is reported as truncated, not an error; a non-positive
// curvature b'q <= 0 throws NotPositiveDefinite.
CgResult solve_cg(const SpdSystem& system, const CgConfig& config);

}  // namespace pgem

#endif
