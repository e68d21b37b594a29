#pragma once

// Rotating-frame dynamics for two model families:
//
//  * a massless satellite moving in the field of fixed anchor masses, in a
//    frame of unit angular speed:
//        u'' + 2 J u' - u = -sum_j m_j (u - a_j) / |p - A_j|^3,
//        z'' = -sum_j m_j z / |p - A_j|^3,
//    with p = (u, z) and A_j = (a_j, 0);
//
//  * n+1 gravitating bodies (one central, n on a ring) in a frame rotating
//    at sqrt(omega):
//        m_j u_j'' + 2 m_j sqrt(omega) J u_j' =
//            omega m_j u_j - sum_i m_i m_j (u_j - u_i) / |x_j - x_i|^3,
//    plus the analogous z equations without Coriolis/centrifugal terms.
//
// Both are gradient systems up to the Coriolis term: the amended potentials
//
//    V(p) = |u|^2/2 + sum_j m_j / |p - A_j|,
//    U(x) = omega/2 sum_j m_j |u_j|^2 + sum_{i<j} m_i m_j / |x_i - x_j|,
//
// satisfy  nu^2 x'' + 2 nu C x' = grad(x)  after rescaling time so that
// 2pi-periodic loops correspond to frequency nu.  Equilibria are exactly the
// critical points of V (resp. U).  The field functions below evaluate the
// force sums directly, independently of the gradient code, so the two paths
// cross-check the sign conventions.

#include <stdexcept>
#include <vector>

#include "ringbif/types.hpp"

namespace ringbif {

// Fixed planar anchors with masses, frame speed 1.
struct SatelliteSystem {
  std::vector<Vec2> anchors;
  std::vector<double> masses;
};

// Central body 0 of mass mu plus ring bodies 1..n; omega is the squared
// frame speed entering the centrifugal term.
struct BodySystem {
  int n = 0;
  VecX masses;  // size n+1, masses[0] = central
  double omega = 1.0;
};

// Throws std::invalid_argument on inconsistent sizes, non-positive ring
// masses, or coincident anchors.
void validate(const SatelliteSystem& sys);
void validate(const BodySystem& sys);

inline int body_count(const BodySystem& sys) { return sys.n + 1; }
inline int config_dim(const BodySystem& sys) { return 3 * (sys.n + 1); }

// --- satellite ---------------------------------------------------------

double satellite_potential(const Vec3& p, const SatelliteSystem& sys);
Vec3 satellite_grad(const Vec3& p, const SatelliteSystem& sys);
Eigen::Matrix3d satellite_hess(const Vec3& p, const SatelliteSystem& sys);

// First-order field of the time-rescaled equation; s.x, s.v are 3-vectors.
State satellite_field(const State& s, double nu, const SatelliteSystem& sys);

double energy(const State& s, double nu, const SatelliteSystem& sys);
double angular_momentum(const State& s, double nu, const SatelliteSystem& sys);

// --- n-body -------------------------------------------------------------

// Configuration layout: body j occupies x.segment<3>(3*j) as (ux, uy, z).
double nbody_potential(const VecX& x, const BodySystem& sys);
VecX nbody_grad(const VecX& x, const BodySystem& sys);
MatX nbody_hess(const VecX& x, const BodySystem& sys);

// Accelerations are per unit mass, so a zero-mass central body behaves as a
// test particle and the field stays well defined for mu = 0.
State nbody_field(const State& s, double nu, const BodySystem& sys);

double energy(const State& s, double nu, const BodySystem& sys);
double angular_momentum(const State& s, double nu, const BodySystem& sys);

// Smallest pairwise distance (n-body) or point-anchor distance (satellite).
double min_separation(const VecX& x, const BodySystem& sys);
double min_separation(const Vec3& p, const SatelliteSystem& sys);

}  // namespace ringbif
