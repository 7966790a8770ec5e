#include "pgem/linsolve.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

namespace pgem {

Vector solve_direct(const SpdSystem& system) {
  if (system.S.rows() != system.S.cols() ||
      system.S.rows() != system.d_vec.size())
    throw std::invalid_argument("solve_direct: dimension mismatch");
  Eigen::LDLT<Matrix> ldlt(system.S);
  const double min_pivot =
      ldlt.vectorD().size() > 0 ? ldlt.vectorD().minCoeff() : 0.0;
  if (ldlt.info() != Eigen::Success || min_pivot <= 0.0) {
    std::ostringstream os;
    os << "solve_direct: matrix not positive-definite (smallest pivot "
       << min_pivot << ")";
    throw NotPositiveDefinite(os.str(), min_pivot);
  }
  return ldlt.solve(system.d_vec);
}

CgResult solve_cg(const SpdSystem& system, const CgConfig& config) {
  const Eigen::Index d = system.S.rows();
  if (d != system.S.cols() || d != system.d_vec.size())
    throw std::invalid_argument("solve_cg: dimension mismatch");
  if (!(config.eps > 0.0 && config.eps < 1.0))
    throw std::invalid_argument("solve_cg: eps must lie in (0, 1)");
  const int max_iter =
      config.max_iter > 0 ? config.max_iter : static_cast<int>(10 * d);

  CgResult out;
  out.x = config.warm_start ? *config.warm_start : Vector::Zero(d);
  if (out.x.size() != d)
    throw std::invalid_argument("solve_cg: warm start dimension mismatch");

  Vector r = system.d_vec - system.S * out.x;
  Vector b = r;
  double delta_new = r.squaredNorm();
  const double delta0 = delta_new;
  const double target = config.eps * config.eps * delta0;
  if (delta0 == 0.0) return out;

  while (out.iterations < max_iter && delta_new > target) {
    const Vector q = system.S * b;
    const double curvature = b.dot(q);
    if (curvature <= 0.0)
      throw NotPositiveDefinite("solve_cg: non-positive curvature b'Sb",
                                curvature);
    const double alpha = delta_new / curvature;
    out.x += alpha * b;
    r -= alpha * q;
    const double delta_old = delta_new;
    delta_new = r.squaredNorm();
    b = r + (delta_new / delta_old) * b;
    ++out.iterations;
  }
  out.truncated = delta_new > target;
  return out;
}

}  // namespace pgem
