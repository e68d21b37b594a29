#pragma once

#include <Eigen/Dense>
#include <complex>

namespace ringbif {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using CVecX = Eigen::VectorXcd;
using CMatX = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Two bodies closer than this are treated as colliding; all potential-type
// evaluations refuse to produce a value past it.
inline constexpr double kCollisionEps = 1e-9;

// Eigenvalues with |lambda| at or below this count as "at a crossing" for
// Morse-index purposes.
inline constexpr double kZeroEigTol = 1e-10;

// Rotation generator: exp(J*theta) is the counterclockwise rotation by theta.
inline Eigen::Matrix2d rot_j() {
  Eigen::Matrix2d j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

inline Eigen::Matrix2d rot2(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

// Phase-space sample of a configuration-space trajectory.
struct State {
  VecX x;
  VecX v;
};

}  // namespace ringbif
