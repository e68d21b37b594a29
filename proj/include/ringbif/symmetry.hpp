#pragma once

// Symmetry machinery shared by the spectral and continuation modules.
//
// Spatial group elements combine a z-reflection kappa, a cyclic relabeling
// of the n ring bodies, and a planar frame rotation; loop symmetries add a
// time phase.  The action on a configuration is
//
//   (g x)_j = R(theta) K(kappa) x_{j + shift},   central body: j fixed,
//
// with R(theta) = exp(-J theta) on the planar pair and K flipping z.  On a
// Fourier loop the phase acts mode-wise as exp(i l phase).
//
// ring_basis builds the unitary change of coordinates that block-
// diagonalizes every matrix commuting with the ring's symmetry generator
// rho(zeta, zeta) (relabel by one step combined with a frame rotation by
// zeta = 2 pi / n).  Blocks come in pairs (k planar / k spatial), k = 1..n;
// the block of index k collects the discrete Fourier amplitudes on which
// the generator acts as exp(i k zeta).

#include <complex>
#include <vector>

#include "ringbif/types.hpp"

namespace ringbif {

struct GroupElement {
  bool kappa = false;  // reflect z
  int shift = 0;       // ring relabeling steps
  double theta = 0.0;  // planar frame rotation
  double phase = 0.0;  // time shift (loops only)
};

GroupElement compose(const GroupElement& a, const GroupElement& b);

// Action on a flat configuration (dim 3 satellite point or 3(n+1) ring
// configuration; pass n = 0 for the satellite case, where shift must be 0).
VecX act_config(const GroupElement& g, const VecX& x, int n);
State act_state(const GroupElement& g, const State& s, int n);

// Dense matrix of the action (used for equivariance checks).
MatX action_matrix(const GroupElement& g, int dim, int n);

// Truncated Fourier loop x(t) = c0 + sum_{l=1..L} (c_l e^{ilt} + conj).
// Time is rescaled so the period is 2 pi; nu is the frequency in the
// original frame time.
struct FourierLoop {
  int dim = 0;
  int L = 0;
  CMatX c;  // dim x (L+1)
  double nu = 1.0;
};

FourierLoop make_loop(int dim, int L, double nu);
VecX loop_eval(const FourierLoop& loop, double t);
VecX loop_deriv(const FourierLoop& loop, double t);  // d/dt in rescaled time
double loop_norm(const FourierLoop& loop);           // L2 norm over one period
double loop_amplitude(const FourierLoop& loop);      // L2 norm of modes >= 1
FourierLoop act_loop(const GroupElement& g, const FourierLoop& loop, int n);

// Isotropy classes of the periodic orbits handled by the continuation:
//   PlanarZ2    satellite orbits with z = 0            (fixes kappa)
//   EightZ2     satellite figure-eight type            (fixes (kappa, pi))
//   PlanarZnk   ring orbits fixed by (zeta, zeta, -k zeta), z = 0
//   SpatialZnk  same cyclic twist plus (kappa, pi)
enum class IsotropyKind { PlanarZ2, EightZ2, PlanarZnk, SpatialZnk };

struct IsotropyLabel {
  IsotropyKind kind = IsotropyKind::PlanarZ2;
  int n = 0;  // ring size, 0 for satellite classes
  int k = 0;  // twist index, 1..n
};

const char* to_string(IsotropyKind kind);
std::vector<GroupElement> isotropy_group(const IsotropyLabel& label);

// Max violation of the label's defining relations over a sample grid.
double symmetry_residual(const FourierLoop& loop, const IsotropyLabel& label);

// Mode-wise orthogonal projector onto the label's fixed loop subspace.
struct LoopProjector {
  std::vector<CMatX> pl;  // one dim x dim projector per mode l = 0..L
};

LoopProjector fixed_subspace_projector(const IsotropyLabel& label, int dim, int L);
FourierLoop project_loop(const LoopProjector& proj, const FourierLoop& loop);

// Ring block basis.  Columns of q are grouped into 2n blocks, planar
// k = 1..n then spatial k = 1..n; the central planar pair joins blocks 1
// and n-1 and the central z joins spatial block n.
struct RingBasis {
  struct BlockInfo {
    int k = 0;
    bool spatial = false;
    int offset = 0;
    int size = 0;
  };
  int n = 0;
  CMatX q;  // 3(n+1) x 3(n+1) unitary
  std::vector<BlockInfo> blocks;
};

RingBasis ring_basis(int n);

struct BlockDecomposition {
  RingBasis basis;
  std::vector<CMatX> blocks;
  double off_block_max = 0.0;  // largest coupling left outside the blocks
};

// Conjugates a symmetric (or Hermitian) matrix into the ring basis and cuts
// it into blocks.  Preconditions: the matrix commutes with the ring
// generator and with kappa to 1e-10 relative, and the leftover off-block
// coupling stays below 1e-9 relative; violations throw.
BlockDecomposition dft_block_diagonalize(const MatX& a, int n);
BlockDecomposition dft_block_diagonalize(const CMatX& a, int n);

// Rotation number of a ring loop: a loop of frequency nu in the class with
// twist k closes in the inertial frame with winding 1 - k sqrt(omega) / nu;
// the loop is a choreography when that number is a multiple of n.
double choreography_omega(int k, double omega, double nu);
bool choreography_indicator(const FourierLoop& loop, int k, int n, double omega,
                            double tol = 1e-8);

}  // namespace ringbif
