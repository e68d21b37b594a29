#include "ringbif/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ringbif {
namespace {

constexpr double kGradTol = 1e-10;
constexpr double kNewtonTol = 1e-12;
constexpr double kDedupTol = 1e-6;
constexpr double kDegenerateTol = 1e-8;
constexpr double kRayTol = 1e-8;
constexpr double kCenterTol = 1e-9;

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

// Distance of angle a to the nearest multiple of step, offset by shift.
double ray_distance(double a, double step, double shift) {
  double d = std::remainder(a - shift, step);
  return std::abs(d);
}

Vec2 planar_grad(const Vec2& u, const SatelliteSystem& sys) {
  Vec3 g = satellite_grad(Vec3(u.x(), u.y(), 0.0), sys);
  return g.head<2>();
}

Eigen::Matrix2d planar_hess(const Vec2& u, const SatelliteSystem& sys) {
  return satellite_hess(Vec3(u.x(), u.y(), 0.0), sys).topLeftCorner<2, 2>();
}

}  // namespace

const char* to_string(EquilibriumLabel label) {
  switch (label) {
    case EquilibriumLabel::r1: return "r1";
    case EquilibriumLabel::r2: return "r2";
    case EquilibriumLabel::r3: return "r3";
    case EquilibriumLabel::extra: return "extra";
    case EquilibriumLabel::other: return "other";
  }
  return "other";
}

RingConfiguration maxwell_ring(int n, double mu) {
  if (n < 2) throw std::invalid_argument("maxwell_ring: n must be at least 2");
  if (!(mu >= 0.0)) throw std::invalid_argument("maxwell_ring: mu must be nonnegative");
  RingConfiguration cfg;
  cfg.n = n;
  cfg.mu = mu;
  const double zeta = 2.0 * std::numbers::pi / n;
  double s1 = 0.0;
  for (int j = 1; j < n; ++j) s1 += 1.0 / std::sin(0.5 * j * zeta);
  cfg.s1 = 0.25 * s1;
  cfg.omega = mu + cfg.s1;
  cfg.positions.reserve(n);
  for (int j = 1; j <= n; ++j)
    cfg.positions.emplace_back(std::cos(j * zeta), std::sin(j * zeta));
  return cfg;
}

double ring_residual(const RingConfiguration& cfg) { return ring_residual(cfg, cfg.omega); }

double ring_residual(const RingConfiguration& cfg, double omega) {
  std::vector<Vec2> pts;
  std::vector<double> masses;
  pts.emplace_back(0.0, 0.0);
  masses.push_back(cfg.mu);
  for (const auto& p : cfg.positions) {
    pts.push_back(p);
    masses.push_back(1.0);
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    Vec2 r = omega * pts[j];
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == j) continue;
      Vec2 d = pts[j] - pts[i];
      double dist = d.norm();
      r -= masses[i] * d / (dist * dist * dist);
    }
    worst = std::max(worst, r.norm());
  }
  return worst;
}

BodySystem body_system(const RingConfiguration& cfg) {
  BodySystem sys;
  sys.n = cfg.n;
  sys.omega = cfg.omega;
  sys.masses = VecX::Ones(cfg.n + 1);
  sys.masses[0] = cfg.mu;
  validate(sys);
  return sys;
}

VecX ring_state(const RingConfiguration& cfg) {
  VecX x = VecX::Zero(3 * (cfg.n + 1));
  for (int j = 1; j <= cfg.n; ++j) x.segment<2>(3 * j) = cfg.positions[j - 1];
  return x;
}

SatelliteSystem satellite_system_over_ring(const RingConfiguration& cfg) {
  SatelliteSystem sys;
  if (cfg.mu > 0.0) {
    sys.anchors.emplace_back(0.0, 0.0);
    sys.masses.push_back(cfg.mu / cfg.omega);
  }
  for (const auto& p : cfg.positions) {
    sys.anchors.push_back(p);
    sys.masses.push_back(1.0 / cfg.omega);
  }
  validate(sys);
  return sys;
}

EquilibriumPoint classify_equilibrium(const Vec2& u, const RingConfiguration& cfg) {
  SatelliteSystem sys = satellite_system_over_ring(cfg);
  EquilibriumPoint p;
  p.u = u;
  p.grad_norm = planar_grad(u, sys).norm();
  if (p.grad_norm > kGradTol)
    throw std::invalid_argument("classify_equilibrium: gradient is not small at the given point");
  Eigen::Matrix2d h = planar_hess(u, sys);
  p.trace = h.trace();
  p.det = h.determinant();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
  p.morse_index = 0;
  for (int i = 0; i < 2; ++i)
    if (es.eigenvalues()[i] < -kZeroEigTol) ++p.morse_index;

  const double r = u.norm();
  const double zeta = 2.0 * std::numbers::pi / cfg.n;
  if (r < kCenterTol) {
    p.label = EquilibriumLabel::other;
    return p;
  }
  if (std::abs(p.det) <= kDegenerateTol) {
    p.label = EquilibriumLabel::other;
    return p;
  }
  const double angle = wrap_angle(std::atan2(u.y(), u.x()));
  const bool body_ray = ray_distance(angle, zeta, 0.0) <= kRayTol;
  const bool bisector_ray = ray_distance(angle, zeta, 0.5 * zeta) <= kRayTol;
  if (body_ray) {
    p.label = r > 1.0 ? EquilibriumLabel::r1 : EquilibriumLabel::r2;
  } else if (bisector_ray) {
    p.label = p.morse_index == 0 ? EquilibriumLabel::r3 : EquilibriumLabel::extra;
  } else {
    p.label = EquilibriumLabel::other;
  }
  return p;
}

std::vector<Vec2> orbit_points(const EquilibriumPoint& p, const RingConfiguration& cfg) {
  const double zeta = 2.0 * std::numbers::pi / cfg.n;
  std::vector<Vec2> pts;
  for (int m = 0; m < cfg.n; ++m) {
    Vec2 q = rot2(m * zeta) * p.u;
    bool fresh = true;
    for (const auto& seen : pts)
      if ((q - seen).norm() < kDedupTol) fresh = false;
    if (fresh) pts.push_back(q);
  }
  return pts;
}

std::vector<EquilibriumPoint> find_satellite_equilibria(const RingConfiguration& cfg,
                                                        const GridSpec& grid) {
  if (grid.radial < 1 || grid.angular < 1 || !(grid.rmin > 0.0) || !(grid.rmax > grid.rmin))
    throw std::invalid_argument("find_satellite_equilibria: bad grid");
  SatelliteSystem sys = satellite_system_over_ring(cfg);
  const double zeta = 2.0 * std::numbers::pi / cfg.n;
  const double escape = 2.0 * grid.rmax + 2.0;

  std::vector<Vec2> found;
  auto remember = [&](const Vec2& u) {
    for (int m = 0; m < cfg.n; ++m)
      for (const auto& seen : found)
        if ((rot2(m * zeta) * u - seen).norm() < kDedupTol) return;
    // Canonical representative: rotate into the angular sector [0, zeta).
    double angle = wrap_angle(std::atan2(u.y(), u.x()));
    int m = static_cast<int>(std::floor(angle / zeta));
    Vec2 rep = u.norm() < kCenterTol ? Vec2::Zero() : Vec2(rot2(-m * zeta) * u);
    found.push_back(rep);
  };

  // The centre is a fixed point of the rotation and a natural seed.
  std::vector<Vec2> seeds;
  seeds.emplace_back(1e-3, 0.0);
  for (int ia = 0; ia < grid.angular; ++ia) {
    double a = 2.0 * std::numbers::pi * ia / grid.angular;
    for (int ir = 0; ir < grid.radial; ++ir) {
      double r = grid.rmin + (grid.rmax - grid.rmin) * ir / std::max(1, grid.radial - 1);
      seeds.emplace_back(r * std::cos(a), r * std::sin(a));
    }
  }

  for (const auto& seed : seeds) {
    Vec2 u = seed;
    bool ok = false;
    try {
      for (int it = 0; it < 80; ++it) {
        Vec2 g = planar_grad(u, sys);
        if (g.norm() < kNewtonTol) {
          ok = true;
          break;
        }
        Eigen::Matrix2d h = planar_hess(u, sys);
        if (std::abs(h.determinant()) < 1e-14) break;
        Vec2 step = h.fullPivLu().solve(-g);
        u += step;
        if (u.norm() > escape) break;
      }
    } catch (const std::domain_error&) {
      continue;  // wandered into a collision neighbourhood
    }
    if (!ok) continue;
    bool near_anchor = false;
    for (const auto& a : sys.anchors)
      if ((u - a).norm() < 1e-6) near_anchor = true;
    if (near_anchor) continue;
    remember(u);
  }

  std::vector<EquilibriumPoint> out;
  out.reserve(found.size());
  for (const auto& u : found) {
    EquilibriumPoint p = classify_equilibrium(u, cfg);
    p.orbit_size = static_cast<int>(orbit_points(p, cfg).size());
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const EquilibriumPoint& a, const EquilibriumPoint& b) {
    double ra = a.u.norm(), rb = b.u.norm();
    if (std::abs(ra - rb) > 1e-12) return ra < rb;
    return std::atan2(a.u.y(), a.u.x()) < std::atan2(b.u.y(), b.u.x());
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].orbit_id = static_cast<int>(i);

  // The r2/r3 names belong to the outermost orbit of their kind; demote the
  // rest to `extra` (small-mu rings have several interior ray orbits).
  for (EquilibriumLabel name : {EquilibriumLabel::r2, EquilibriumLabel::r3}) {
    int best = -1;
    double best_r = -1.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].label != name) continue;
      double r = out[i].u.norm();
      if (r > best_r) {
        best_r = r;
        best = static_cast<int>(i);
      }
    }
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i].label == name && static_cast<int>(i) != best)
        out[i].label = EquilibriumLabel::extra;
  }
  return out;
}

}  // namespace ringbif
