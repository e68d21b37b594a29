#pragma once

// Fourier-Galerkin continuation of symmetric periodic orbits.  A loop is a
// zero of the mode-wise residual
//
//   F_l = l^2 nu^2 M c_l - 2 i l nu sqrt(omega) K c_l + g_l,   l = 0..L,
//
// with g_l the Fourier modes of grad U(x(t)) on a dealiased trapezoid grid
// of 4(2L+1) points.  The solver works in the real layout
// [c_0; Re c_1; Im c_1; ...] restricted to the fixed subspace of an
// isotropy class, with Lagrange multipliers lambda0 (time shift) and,
// when the potential is rotation invariant (the ring; a satellite whose
// single primary sits at the origin), lambda1 (frame rotation) absorbing
// the group degeneracies; at a true solution both multipliers vanish.
// Gauge rows pin the phase (the imaginary part of one mode-1 component)
// and, with rotation, the angular coordinate of one body's mean position.
// Branches are traced by secant predictor / Newton corrector with
// pseudo-arclength steps.

#include <functional>
#include <string>
#include <vector>

#include "ringbif/dynamics.hpp"
#include "ringbif/spectral.hpp"
#include "ringbif/symmetry.hpp"
#include "ringbif/types.hpp"

namespace ringbif {

// Uniform view of the two model families.
struct LoopSystem {
  int dim = 0;
  int n = 0;                  // ring size; 0 for the satellite
  double sqrt_omega = 1.0;    // frame speed in the Coriolis term
  VecX mass;                  // per-coordinate mass diagonal
  bool has_rotation = false;  // continuous planar rotation symmetry
  int gauge_base = 3;         // planar pair anchoring the rotation gauge
  std::function<double(const VecX&)> potential;
  std::function<VecX(const VecX&)> grad;
  std::function<MatX(const VecX&)> hess;
  std::function<double(const VecX&)> separation;
};

LoopSystem loop_system(const SatelliteSystem& sys);
LoopSystem loop_system(const BodySystem& sys);

// Mode coefficients of the residual; column l is F_l.  nu overrides the
// loop's own frequency so the solver can treat it as an unknown.
CMatX fourier_residual(const FourierLoop& loop, double nu, const LoopSystem& sys);
CMatX fourier_residual(const FourierLoop& loop, const LoopSystem& sys);

// Real packed layout [c0; Re c1; Im c1; ...; Re cL; Im cL].
VecX pack_loop(const FourierLoop& loop);
FourierLoop unpack_loop(const VecX& y, int dim, int L, double nu);

// Jacobian of the packed residual with respect to the packed coefficients
// (assembled from Hessians at the quadrature nodes, no differencing).
MatX fourier_jacobian(const FourierLoop& loop, double nu, const LoopSystem& sys);

// Orthonormal basis (packed layout) of the label's fixed loop subspace.
MatX fixed_subspace_basis(const LoopProjector& proj, int dim, int L);

// One continuation problem: system + isotropy restriction + gauge anchors.
struct PeriodicProblem {
  LoopSystem system;
  IsotropyLabel label;
  int L = 0;
  MatX basis;     // packed-layout orthonormal basis of the fixed subspace
  int pin = 0;    // phase anchor: component of mode 1 whose Im part is pinned
  bool rotation_pin = false;  // also pin the body-1 mean angle (ring)
};

PeriodicProblem make_problem(const LoopSystem& sys, const IsotropyLabel& label, int L);

enum class Termination {
  none,
  max_steps,
  norm_blowup,
  period_blowup,
  collision_approach,
  equilibrium_return,
  corrector_failure,
};
const char* to_string(Termination t);

struct BranchPoint {
  FourierLoop loop;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double arclength = 0.0;
  double residual = 0.0;  // projected augmented residual at acceptance
  int newton_iters = 0;
};

struct Branch {
  IsotropyLabel label;
  BifurcationEvent origin;
  std::vector<BranchPoint> points;
  Termination termination = Termination::none;
};

struct ContinuationOptions {
  int L = 12;
  double eps0 = 1e-3;       // initial mode-1 amplitude
  double tol = 1e-10;       // corrector residual tolerance
  int max_newton = 25;
  double h0 = 0.02;
  double h_min = 1e-5;
  double h_max = 0.1;
  double norm_stop = 1e3;
  double period_stop = 1e3;
  double equilibrium_tol = 1e-3;
};

// Builds the first two corrected points of the branch born at the event:
// the kernel direction is placed in mode 1 at amplitudes eps0 and 2 eps0,
// symmetrized into the event label's fixed subspace, and corrected with nu
// free.  Corrector divergence retries with eps0/2, up to four times.
Branch branch_from_event(const LoopSystem& sys, const VecX& equilibrium,
                         const SpectralBlock& block, const BifurcationEvent& event,
                         const ContinuationOptions& opts = {});

// Extends the branch by pseudo-arclength steps until a stop condition
// triggers; the reason lands in branch.termination (never an exception).
void continue_branch(Branch& branch, const LoopSystem& sys,
                     const std::vector<VecX>& known_equilibria, int max_steps,
                     const ContinuationOptions& opts = {});

// Re-corrects a loop at fixed frequency (multipliers free).  Used for the
// truncation-refinement check: embed a converged loop at larger L and the
// corrected result must barely move.
BranchPoint correct_loop(const FourierLoop& guess, const PeriodicProblem& problem,
                         const ContinuationOptions& opts = {});

}  // namespace ringbif
