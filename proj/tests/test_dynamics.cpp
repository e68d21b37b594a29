#include <doctest.h>

#include <random>
#include <stdexcept>

#include "ringbif/dynamics.hpp"
#include "ringbif/equilibria.hpp"
#include "ringbif/symmetry.hpp"
#include "ringbif/verification.hpp"

using namespace ringbif;

namespace {

SatelliteSystem one_anchor() { return {{Vec2(1.0, 0.0)}, {1.0}}; }

SatelliteSystem two_anchors() { return {{Vec2(1.0, 0.0), Vec2(-1.0, 0.0)}, {1.0, 1.0}}; }

// Anchor (1,0) of mass 2: (2,0,0) solves u = 2(u-a)/|u-a|^3 exactly.
SatelliteSystem heavy_anchor() { return {{Vec2(1.0, 0.0)}, {2.0}}; }

SatelliteSystem three_anchors() {
  return {{Vec2(1.0, 0.0), Vec2(-1.0, 0.0), Vec2(0.0, 1.5)}, {1.0, 2.0, 0.7}};
}

}  // namespace

TEST_CASE("satellite potential: closed values and collision guard") {
  CHECK(satellite_potential(Vec3(0, 0, 0), one_anchor()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(satellite_potential(Vec3(0, 0, 0), two_anchors()) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(satellite_potential(Vec3(1, 0, 0), one_anchor()), std::domain_error);
  CHECK_THROWS_AS(satellite_grad(Vec3(-1, 0, 0), two_anchors()), std::domain_error);
}

TEST_CASE("satellite derivatives match finite differences") {
  const SatelliteSystem sys = three_anchors();
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  int tested = 0;
  while (tested < 20) {
    Vec3 p(box(rng), box(rng), box(rng));
    if (min_separation(p, sys) < 0.1) continue;
    ++tested;
    auto f = [&](const VecX& x) { return satellite_potential(Vec3(x), sys); };
    auto g = [&](const VecX& x) -> VecX { return satellite_grad(Vec3(x), sys); };
    const VecX x = p;
    const Vec3 ga = satellite_grad(p, sys);
    const Eigen::Matrix3d ha = satellite_hess(p, sys);
    const double gscale = std::max(1.0, ga.norm());
    const double hscale = std::max(1.0, ha.norm());
    CHECK((fd_gradient(f, x) - ga).norm() < 1e-5 * gscale);
    CHECK((fd_jacobian(g, x) - ha).norm() < 1e-5 * hscale);
    CHECK((ha - ha.transpose()).norm() == 0.0);  // symmetric by construction
  }
}

TEST_CASE("satellite hessian: closed spatial entry and planar split") {
  // d^2V/dz^2 = -sum m_j / r_j^3 = -1 at distance 1.
  const Eigen::Matrix3d h = satellite_hess(Vec3(2, 0, 0), one_anchor());
  CHECK(h(2, 2) == doctest::Approx(-1.0).epsilon(1e-14));
  // In the z = 0 plane the planar block and the z direction decouple.
  CHECK(h(0, 2) == 0.0);
  CHECK(h(1, 2) == 0.0);
  // Heavy-anchor fixture: H = diag(5, -1, -2) at the equilibrium (2,0,0).
  const Eigen::Matrix3d hf = satellite_hess(Vec3(2, 0, 0), heavy_anchor());
  CHECK(hf(0, 0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(hf(1, 1) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(hf(2, 2) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("satellite gradient vanishes at the fixture equilibrium") {
  CHECK(satellite_grad(Vec3(2, 0, 0), heavy_anchor()).norm() < 1e-14);
  // The plane is invariant: zero third component off equilibrium too.
  CHECK(satellite_grad(Vec3(0.3, -0.8, 0), three_anchors())(2) == 0.0);
}

TEST_CASE("satellite field: gradient consistency and time rescaling") {
  const SatelliteSystem sys = three_anchors();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> box(-1.5, 1.5);
  const Eigen::Matrix2d j = rot_j();
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 p(box(rng), box(rng), box(rng));
    if (min_separation(p, sys) < 0.2) continue;
    State s{p, Vec3(box(rng), box(rng), box(rng))};
    const double nu = 0.3 + 0.4 * trial;
    const State out = satellite_field(s, nu, sys);
    CHECK((out.x - s.v).norm() == 0.0);
    // nu^2 x'' + 2 nu J x' = grad V, rebuilt from the gradient path.
    Vec3 acc = satellite_grad(p, sys);
    acc.head<2>() -= 2.0 * nu * j * Vec2(s.v.head<2>());
    acc /= nu * nu;
    CHECK((out.v - acc).norm() < 1e-12 * std::max(1.0, acc.norm()));
    // a_nu(x, v) = a_1(x, nu v) / nu^2.
    State scaled{s.x, VecX(nu * s.v)};
    const State ref = satellite_field(scaled, 1.0, sys);
    CHECK((out.v - ref.v / (nu * nu)).norm() < 1e-12 * std::max(1.0, acc.norm()));
  }
  // Zero force and velocity at an equilibrium.
  const State rest{Vec3(2, 0, 0), Vec3::Zero()};
  CHECK(satellite_field(rest, 0.7, heavy_anchor()).v.norm() < 1e-14);
}

TEST_CASE("nbody derivatives: ring gradient, finite differences, invariance") {
  const RingConfiguration ring = maxwell_ring(3, 1.0);
  const BodySystem sys = body_system(ring);
  const VecX a = ring_state(ring);
  CHECK(nbody_grad(a, sys).norm() < 1e-10);

  // Equal-mass two-body circular orbit: residual at the closed-form omega.
  const RingConfiguration two = maxwell_ring(2, 0.0);
  CHECK(nbody_grad(ring_state(two), body_system(two)).norm() < 1e-12);

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (int trial = 0; trial < 5; ++trial) {
    VecX x = a;
    for (int i = 0; i < x.size(); ++i) x[i] += jitter(rng);
    auto f = [&](const VecX& p) { return nbody_potential(p, sys); };
    auto g = [&](const VecX& p) { return nbody_grad(p, sys); };
    const VecX ga = nbody_grad(x, sys);
    const MatX ha = nbody_hess(x, sys);
    CHECK((fd_gradient(f, x) - ga).norm() < 1e-5 * std::max(1.0, ga.norm()));
    CHECK((fd_jacobian(g, x) - ha).norm() < 1e-5 * std::max(1.0, ha.norm()));
    CHECK((ha - ha.transpose()).norm() == 0.0);

    // Shifting every body by the same planar offset changes only the
    // centrifugal part of U.
    VecX shifted = x;
    const Vec2 off(0.37, -0.21);
    double centrifugal = 0.0;
    for (int b = 0; b <= sys.n; ++b) {
      const Vec2 u(x.segment<2>(3 * b));
      const Vec2 v = u + off;
      shifted.segment<2>(3 * b) = v;
      centrifugal += 0.5 * sys.omega * sys.masses[b] * (v.squaredNorm() - u.squaredNorm());
    }
    CHECK(nbody_potential(shifted, sys) - nbody_potential(x, sys) ==
          doctest::Approx(centrifugal).epsilon(1e-12));
  }

  VecX collide = a;
  collide.segment<3>(3) = collide.segment<3>(6);
  CHECK_THROWS_AS(nbody_potential(collide, sys), std::domain_error);
}

TEST_CASE("nbody field: rest at the ring") {
  const RingConfiguration ring = maxwell_ring(4, 0.5);
  const BodySystem sys = body_system(ring);
  State s{ring_state(ring), VecX::Zero(config_dim(sys))};
  const State out = nbody_field(s, 1.3, sys);
  CHECK(out.v.norm() < 1e-10);
  CHECK((out.x - s.v).norm() == 0.0);
}

TEST_CASE("energy and angular momentum") {
  // At rest the energy is the amended potential itself.
  const SatelliteSystem sat = heavy_anchor();
  const State rest{Vec3(2, 0, 0), Vec3::Zero()};
  CHECK(energy(rest, 0.9, sat) ==
        doctest::Approx(satellite_potential(Vec3(2, 0, 0), sat)).epsilon(1e-14));

  const RingConfiguration ring = maxwell_ring(3, 2.0);
  const BodySystem sys = body_system(ring);
  const State ringrest{ring_state(ring), VecX::Zero(config_dim(sys))};
  CHECK(energy(ringrest, 1.1, sys) ==
        doctest::Approx(nbody_potential(ring_state(ring), sys)).epsilon(1e-14));

  // Angular momentum is invariant under the z-reflection kappa.
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  State s{Vec3(1.5, 0.4, box(rng)), Vec3(box(rng), box(rng), box(rng))};
  GroupElement kappa{true, 0, 0.0, 0.0};
  const State ks = act_state(kappa, s, 0);
  CHECK(angular_momentum(s, 0.8, sat) ==
        doctest::Approx(angular_momentum(ks, 0.8, sat)).epsilon(1e-14));
}

TEST_CASE("min separation") {
  CHECK(min_separation(Vec3(2, 0, 0), one_anchor()) == doctest::Approx(1.0));
  const RingConfiguration ring = maxwell_ring(2, 0.0);
  CHECK(min_separation(ring_state(ring), body_system(ring)) == doctest::Approx(1.0));
}
