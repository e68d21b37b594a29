#pragma once

// Relative equilibria.  A ring of n unit masses at the n-th roots of unity
// plus a central mass mu is a relative equilibrium of the rotating n-body
// equations exactly when the squared frame speed is
//
//    omega = mu + s1,   s1 = (1/4) sum_{j=1}^{n-1} 1 / sin(j pi / n).
//
// A satellite moving in the field of that ring sees frame speed
// sqrt(omega); rescaling time by sqrt(omega) (lengths unchanged) brings its
// equation back to the unit-frame-speed form at the price of dividing every
// anchor mass by omega.  satellite_system_over_ring applies that rescaling;
// the factors are reported through mass_scale()/time_scale().

#include <vector>

#include "ringbif/dynamics.hpp"
#include "ringbif/types.hpp"

namespace ringbif {

struct RingConfiguration {
  int n = 0;
  double mu = 0.0;
  double s1 = 0.0;
  double omega = 0.0;
  std::vector<Vec2> positions;  // ring bodies 1..n; the central body sits at 0
};

// Requires n >= 2, mu >= 0.
RingConfiguration maxwell_ring(int n, double mu);

// Max over all bodies of | omega a_j - sum_{i != j} m_i (a_j - a_i)/r^3 |.
// An omega override lets tests check that the residual is sensitive.
double ring_residual(const RingConfiguration& cfg);
double ring_residual(const RingConfiguration& cfg, double omega);

BodySystem body_system(const RingConfiguration& cfg);

// Flat 3(n+1) configuration vector of the ring (central body first).
VecX ring_state(const RingConfiguration& cfg);

// Satellite system over the rotating ring in unit-frame-speed form: anchors
// at the ring positions (plus the centre when mu > 0), masses divided by
// omega.  Zero-mass anchors are dropped.
SatelliteSystem satellite_system_over_ring(const RingConfiguration& cfg);
inline double mass_scale(const RingConfiguration& cfg) { return 1.0 / cfg.omega; }
inline double time_scale(const RingConfiguration& cfg) { return std::sqrt(cfg.omega); }

// Polar seed grid for the equilibrium search.
struct GridSpec {
  int radial = 60;
  int angular = 360;
  double rmin = 0.1;
  double rmax = 3.0;
};

// Classical labels: r1 = outer ray through a body, r2 = inner ray through a
// body, r3 = ray bisecting two bodies (minimum orbit), extra = additional
// interior orbits (present for small mu), other = centre/degenerate/off-ray.
enum class EquilibriumLabel { r1, r2, r3, extra, other };
const char* to_string(EquilibriumLabel label);

struct EquilibriumPoint {
  Vec2 u = Vec2::Zero();
  int orbit_id = 0;
  int orbit_size = 1;
  EquilibriumLabel label = EquilibriumLabel::other;
  double trace = 0.0;  // trace of the planar Hessian block
  double det = 0.0;    // determinant of the planar Hessian block
  int morse_index = 0;
  double grad_norm = 0.0;
};

// Newton-polishes every grid seed, keeps converged collision-free points
// with |grad| < 1e-10, and deduplicates under the Z_n rotation (distance
// 1e-6 after rotating representatives into the sector [0, 2pi/n)).  One
// entry per orbit, sorted by (radius, angle).  Degenerate points
// (|D| <= 1e-8) are labeled `other`; when several orbits share the r2 or r3
// role the outermost keeps the name and the rest become `extra`.
std::vector<EquilibriumPoint> find_satellite_equilibria(const RingConfiguration& cfg,
                                                        const GridSpec& grid = {});

// Classifies a single polished point (|grad| < 1e-10 required).
EquilibriumPoint classify_equilibrium(const Vec2& u, const RingConfiguration& cfg);

// All orbit members of a representative under the Z_n rotation.
std::vector<Vec2> orbit_points(const EquilibriumPoint& p, const RingConfiguration& cfg);

}  // namespace ringbif
