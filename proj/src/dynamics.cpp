#include "ringbif/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ringbif {

namespace {

[[noreturn]] void throw_collision(double r) {
  throw std::domain_error("collision: separation " + std::to_string(r) +
                          " below " + std::to_string(kCollisionEps));
}

double checked_distance(const Vec3& d) {
  const double r = d.norm();
  if (r < kCollisionEps) throw_collision(r);
  return r;
}

// Hessian of m/|d| in R^3: m (3 d d^T - r^2 I) / r^5.  Filled symmetrically
// entry by entry so the result is bitwise symmetric.
Eigen::Matrix3d point_mass_hess(const Vec3& d, double m) {
  const double r2 = d.squaredNorm();
  const double r = std::sqrt(r2);
  const double c = m / (r2 * r2 * r);
  Eigen::Matrix3d h;
  for (int a = 0; a < 3; ++a) {
    h(a, a) = c * (3.0 * d[a] * d[a] - r2);
    for (int b = a + 1; b < 3; ++b) {
      const double off = c * 3.0 * d[a] * d[b];
      h(a, b) = off;
      h(b, a) = off;
    }
  }
  return h;
}

}  // namespace

void validate(const SatelliteSystem& sys) {
  if (sys.anchors.size() != sys.masses.size())
    throw std::invalid_argument("satellite system: anchors/masses size mismatch");
  if (sys.anchors.empty())
    throw std::invalid_argument("satellite system: no anchors");
  for (double m : sys.masses)
    if (!(m > 0.0)) throw std::invalid_argument("satellite system: masses must be positive");
  for (size_t i = 0; i < sys.anchors.size(); ++i)
    for (size_t j = i + 1; j < sys.anchors.size(); ++j)
      if ((sys.anchors[i] - sys.anchors[j]).norm() < kCollisionEps)
        throw std::invalid_argument("satellite system: coincident anchors");
}

void validate(const BodySystem& sys) {
  if (sys.n < 2) throw std::invalid_argument("body system: need at least 2 ring bodies");
  if (sys.masses.size() != sys.n + 1)
    throw std::invalid_argument("body system: masses size must be n+1");
  if (!(sys.masses[0] >= 0.0))
    throw std::invalid_argument("body system: central mass must be >= 0");
  for (int j = 1; j <= sys.n; ++j)
    if (!(sys.masses[j] > 0.0))
      throw std::invalid_argument("body system: ring masses must be positive");
  if (!(sys.omega > 0.0)) throw std::invalid_argument("body system: omega must be positive");
}

// --- satellite ---------------------------------------------------------

double satellite_potential(const Vec3& p, const SatelliteSystem& sys) {
  const Vec2 u = p.head<2>();
  double v = 0.5 * u.squaredNorm();
  for (size_t j = 0; j < sys.anchors.size(); ++j) {
    const Vec3 d(p[0] - sys.anchors[j][0], p[1] - sys.anchors[j][1], p[2]);
    v += sys.masses[j] / checked_distance(d);
  }
  return v;
}

Vec3 satellite_grad(const Vec3& p, const SatelliteSystem& sys) {
  Vec3 g(p[0], p[1], 0.0);
  for (size_t j = 0; j < sys.anchors.size(); ++j) {
    const Vec3 d(p[0] - sys.anchors[j][0], p[1] - sys.anchors[j][1], p[2]);
    const double r = checked_distance(d);
    g -= sys.masses[j] / (r * r * r) * d;
  }
  return g;
}

Eigen::Matrix3d satellite_hess(const Vec3& p, const SatelliteSystem& sys) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  for (size_t j = 0; j < sys.anchors.size(); ++j) {
    const Vec3 d(p[0] - sys.anchors[j][0], p[1] - sys.anchors[j][1], p[2]);
    checked_distance(d);
    h += point_mass_hess(d, sys.masses[j]);
  }
  return h;
}

State satellite_field(const State& s, double nu, const SatelliteSystem& sys) {
  if (s.x.size() != 3 || s.v.size() != 3)
    throw std::invalid_argument("satellite state must be 3-dimensional");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  // Force sums written out from the equations of motion, not via the
  // gradient: keeps the sign conventions honest.
  Vec3 acc;
  acc[0] = s.x[0];
  acc[1] = s.x[1];
  acc[2] = 0.0;
  for (size_t j = 0; j < sys.anchors.size(); ++j) {
    const Vec3 d(s.x[0] - sys.anchors[j][0], s.x[1] - sys.anchors[j][1], s.x[2]);
    const double r = checked_distance(d);
    acc -= sys.masses[j] / (r * r * r) * d;
  }
  // Coriolis: -2 nu J u'.
  acc[0] -= 2.0 * nu * (-s.v[1]);
  acc[1] -= 2.0 * nu * (s.v[0]);
  return State{s.v, acc / (nu * nu)};
}

double energy(const State& s, double nu, const SatelliteSystem& sys) {
  const Vec3 p = s.x.head<3>();
  return -0.5 * nu * nu * s.v.squaredNorm() + satellite_potential(p, sys);
}

double angular_momentum(const State& s, double nu, const SatelliteSystem& sys) {
  (void)sys;
  // nu^2 <v, A1 x> - nu |u|^2 with A1 = diag(-J, 0); planar components only.
  const double a1 = -(-s.x[1]) * s.v[0] - (s.x[0]) * s.v[1];
  return nu * nu * a1 - nu * s.x.head<2>().squaredNorm();
}

double min_separation(const Vec3& p, const SatelliteSystem& sys) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : sys.anchors) {
    const Vec3 d(p[0] - a[0], p[1] - a[1], p[2]);
    best = std::min(best, d.norm());
  }
  return best;
}

// --- n-body -------------------------------------------------------------

double nbody_potential(const VecX& x, const BodySystem& sys) {
  const int nb = body_count(sys);
  if (x.size() != 3 * nb) throw std::invalid_argument("configuration size mismatch");
  double v = 0.0;
  for (int j = 0; j < nb; ++j)
    v += 0.5 * sys.omega * sys.masses[j] * x.segment<2>(3 * j).squaredNorm();
  for (int i = 0; i < nb; ++i)
    for (int j = i + 1; j < nb; ++j) {
      const Vec3 d = x.segment<3>(3 * i) - x.segment<3>(3 * j);
      v += sys.masses[i] * sys.masses[j] / checked_distance(d);
    }
  return v;
}

VecX nbody_grad(const VecX& x, const BodySystem& sys) {
  const int nb = body_count(sys);
  if (x.size() != 3 * nb) throw std::invalid_argument("configuration size mismatch");
  VecX g = VecX::Zero(3 * nb);
  for (int j = 0; j < nb; ++j) {
    g[3 * j] = sys.omega * sys.masses[j] * x[3 * j];
    g[3 * j + 1] = sys.omega * sys.masses[j] * x[3 * j + 1];
  }
  for (int i = 0; i < nb; ++i)
    for (int j = i + 1; j < nb; ++j) {
      const Vec3 d = x.segment<3>(3 * i) - x.segment<3>(3 * j);
      const double r = checked_distance(d);
      const Vec3 f = sys.masses[i] * sys.masses[j] / (r * r * r) * d;
      g.segment<3>(3 * i) -= f;
      g.segment<3>(3 * j) += f;
    }
  return g;
}

MatX nbody_hess(const VecX& x, const BodySystem& sys) {
  const int nb = body_count(sys);
  if (x.size() != 3 * nb) throw std::invalid_argument("configuration size mismatch");
  MatX h = MatX::Zero(3 * nb, 3 * nb);
  for (int j = 0; j < nb; ++j) {
    h(3 * j, 3 * j) = sys.omega * sys.masses[j];
    h(3 * j + 1, 3 * j + 1) = sys.omega * sys.masses[j];
  }
  for (int i = 0; i < nb; ++i)
    for (int j = i + 1; j < nb; ++j) {
      const Vec3 d = x.segment<3>(3 * i) - x.segment<3>(3 * j);
      checked_distance(d);
      const Eigen::Matrix3d hij = point_mass_hess(d, sys.masses[i] * sys.masses[j]);
      h.block<3, 3>(3 * i, 3 * i) += hij;
      h.block<3, 3>(3 * j, 3 * j) += hij;
      h.block<3, 3>(3 * i, 3 * j) -= hij;
      h.block<3, 3>(3 * j, 3 * i) -= hij;
    }
  return h;
}

State nbody_field(const State& s, double nu, const BodySystem& sys) {
  const int nb = body_count(sys);
  if (s.x.size() != 3 * nb || s.v.size() != 3 * nb)
    throw std::invalid_argument("state size mismatch");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  const double sw = std::sqrt(sys.omega);
  VecX acc = VecX::Zero(3 * nb);
  for (int j = 0; j < nb; ++j) {
    acc[3 * j] = sys.omega * s.x[3 * j];
    acc[3 * j + 1] = sys.omega * s.x[3 * j + 1];
  }
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      if (i == j) continue;
      const Vec3 d = s.x.segment<3>(3 * j) - s.x.segment<3>(3 * i);
      const double r = checked_distance(d);
      acc.segment<3>(3 * j) -= sys.masses[i] / (r * r * r) * d;
    }
  for (int j = 0; j < nb; ++j) {
    acc[3 * j] -= 2.0 * nu * sw * (-s.v[3 * j + 1]);
    acc[3 * j + 1] -= 2.0 * nu * sw * (s.v[3 * j]);
    acc[3 * j + 2] -= 0.0;
  }
  return State{s.v, acc / (nu * nu)};
}

double energy(const State& s, double nu, const BodySystem& sys) {
  const int nb = body_count(sys);
  double kin = 0.0;
  for (int j = 0; j < nb; ++j) kin += sys.masses[j] * s.v.segment<3>(3 * j).squaredNorm();
  return -0.5 * nu * nu * kin + nbody_potential(s.x, sys);
}

double angular_momentum(const State& s, double nu, const BodySystem& sys) {
  const int nb = body_count(sys);
  const double sw = std::sqrt(sys.omega);
  double a1 = 0.0, q = 0.0;
  for (int j = 0; j < nb; ++j) {
    const double ux = s.x[3 * j], uy = s.x[3 * j + 1];
    const double vx = s.v[3 * j], vy = s.v[3 * j + 1];
    // <v, A1 x> with A1 x = (-J u, 0) = (uy, -ux, 0).
    a1 += sys.masses[j] * (vx * uy - vy * ux);
    q += sys.masses[j] * (ux * ux + uy * uy);
  }
  return nu * nu * a1 - nu * sw * q;
}

double min_separation(const VecX& x, const BodySystem& sys) {
  const int nb = body_count(sys);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nb; ++i)
    for (int j = i + 1; j < nb; ++j)
      best = std::min(best, (x.segment<3>(3 * i) - x.segment<3>(3 * j)).norm());
  return best;
}

}  // namespace ringbif
