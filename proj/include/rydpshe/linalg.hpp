#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "rydpshe/errors.hpp"

namespace rydpshe::linalg {

template <typename Scalar, int N>
struct Solution {
  Eigen::Matrix<Scalar, N, 1> x;
  double residual = 0.0;  // ||A x - b|| / ||b|| (absolute when b = 0)
};

/// Dense LU with partial pivoting on the row-equilibrated system. Throws
/// SingularityError when the reciprocal condition estimate drops below
/// machine epsilon; `what` names the system in the message.
template <typename Scalar, int N>
Solution<Scalar, N> solve(const Eigen::Matrix<Scalar, N, N>& a,
                          const Eigen::Matrix<Scalar, N, 1>& b, const std::string& what) {
  if (!a.allFinite() || !b.allFinite()) {
    throw PropagationError(what + ": non-finite entries in the linear system");
  }
  // Blockade shifts make single rows many orders larger than the rest.
  Eigen::Matrix<double, N, 1> scale;
  for (int i = 0; i < N; ++i) {
    const double m = a.row(i).cwiseAbs().maxCoeff();
    if (m == 0.0) throw SingularityError(what + ": zero row in the linear system");
    scale(i) = 1.0 / m;
  }
  const Eigen::Matrix<Scalar, N, N> as = scale.asDiagonal() * a;
  Eigen::PartialPivLU<Eigen::Matrix<Scalar, N, N>> lu(as);
  const double rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    throw SingularityError(what + ": singular matrix (rcond = " + std::to_string(rcond) + ")");
  }
  Solution<Scalar, N> out;
  out.x = lu.solve((scale.asDiagonal() * b).eval());
  const double bn = b.norm();
  const double rn = (a * out.x - b).norm();
  out.residual = bn > 0.0 ? rn / bn : rn;
  return out;
}

}  // namespace rydpshe::linalg
