#pragma once

// Spectral side of the bifurcation analysis.  Linearizing the rotating-
// frame equations about a relative equilibrium and restricting to the l-th
// Fourier mode of a 2pi-periodic perturbation gives the Hermitian pencil
//
//   M_l(nu) = l^2 nu^2 M - 2 i l nu sqrt(omega) K + H,     K = M G,
//
// with M the mass matrix, G the infinitesimal planar rotation and H the
// Hessian of the amended potential.  Because M_l(nu) = M_1(l nu), the scan
// only ever evaluates the l = 1 family.  Bifurcations of symmetric periodic
// orbits are jumps of the Morse index of a symmetry block of M_1 along nu;
// the jump size eta is the local degree of the bifurcation.
//
// Two index jumps are forced by the symmetry itself rather than by the
// ring's shape and are tagged structural: the block-n planar jump at
// nu = sqrt(omega) (rigid homographic motions of the whole ring) and, at
// nu = 0 only, the kernels spanned by the rotation generator and the
// vertical translation.  Planar translations touch zero at nu = sqrt(omega)
// inside block 1 without jumping the index and need no special handling.

#include <functional>
#include <string>
#include <vector>

#include "ringbif/dynamics.hpp"
#include "ringbif/equilibria.hpp"
#include "ringbif/symmetry.hpp"
#include "ringbif/types.hpp"

namespace ringbif {

struct StructuralMode {
  CVecX direction;  // block coordinates
  double nu0 = 0.0;
  std::string what;
};

struct SpectralBlock {
  std::string id;
  int k = 0;  // ring block index; 0 for the satellite blocks
  bool spatial = false;
  int size = 0;
  IsotropyLabel label;               // isotropy class of orbits born in this block
  CMatX basis;                       // configuration-space columns, orthonormal
  std::function<CMatX(double)> mode;  // Hermitian block of M_1 at frequency nu
  std::vector<CVecX> kernel_at_zero;  // exact nu = 0 kernel directions
  std::vector<StructuralMode> structural;  // symmetry-forced crossings at nu > 0
  // Deflated out of every scan evaluation.  Only the rigid-motion block
  // (planar k = n) carries an entry: there the rotation generator spans,
  // together with the homographic direction, the whole block, so the
  // compression removes the excluded rigid family without moving any other
  // crossing.  Deflating the nu = 0 kernels of other blocks would shift
  // genuine events, so those stay empty.
  std::vector<CVecX> scan_deflate;
  double nu_max_hint = 0.0;
};

// Satellite blocks at a planar equilibrium: the planar pair and the
// vertical direction decouple exactly.
std::vector<SpectralBlock> satellite_blocks(const Vec2& eq, const SatelliteSystem& sys);

// The 2n ring blocks (planar k = 1..n, then spatial k = 1..n).
std::vector<SpectralBlock> ring_blocks(const RingConfiguration& cfg);

// Dense M_l(nu) of the ring, for cross-checking the blocks.
CMatX ring_mode_matrix(const RingConfiguration& cfg, double nu, int l = 1);

struct MorseIndexResult {
  int index = 0;
  bool at_crossing = false;  // an eigenvalue sits inside the zero band
  double min_abs_eig = 0.0;
};

// Counts eigenvalues below -1e-10.  Directions in `deflate` are projected
// out first; use only vectors that are exact kernels at the evaluation
// point, otherwise the compression shifts the remaining eigenvalues.
MorseIndexResult morse_index(const CMatX& m, const std::vector<CVecX>& deflate = {});

struct BifurcationEvent {
  double nu0 = 0.0;
  double width = 0.0;  // half width of the final bracket
  std::string block_id;
  int k = 0;
  bool spatial = false;
  IsotropyLabel label;
  int index_left = 0;
  int index_right = 0;
  int eta = 0;  // index_right - index_left
  bool resonant = false;
  bool structural = false;
  CVecX kernel;  // block coordinates of the near-kernel direction at nu0
};

struct ScanOptions {
  double nu_min = 1e-3;
  double nu_max = 0.0;  // 0: use the blocks' hint
  double step = 1e-3;
  double refine = 1e-10;
  int l_res = 5;                 // modes checked for resonances
  double resonance_tol = 1e-6;   // near-zero eigenvalue threshold at l nu0
};

// Walks each block's Morse index over a nu grid and bisects every jump.
// Events matching a block's structural list are tagged rather than dropped;
// resonance flags are set when another block or a higher mode crosses (or
// nearly crosses) at the same frequency.
std::vector<BifurcationEvent> scan_bifurcations(const std::vector<SpectralBlock>& blocks,
                                                const ScanOptions& opts = {});

// Number of bifurcation frequencies of the planar satellite pair predicted
// from the trace and determinant of the planar Hessian alone: one when
// D < 0, two when 0 < D < (2 - T/2)^2, none otherwise.
int planar_criterion(double T, double D);

// Central-mass threshold where the nu = 0 planar block k of the ring's
// Hessian changes its determinant sign (the block turns degenerate).
struct ThresholdRecord {
  int k = 0;
  double mu = 0.0;
  double width = 0.0;
  double det_left = 0.0;
  double det_right = 0.0;
};

std::vector<ThresholdRecord> find_mu_k(int n, int k, double mu_min = 1e-3,
                                       double mu_max = 50.0, int grid = 500);

// Spectrum of the full first-order linearization about the ring (needs
// mu > 0).  The eight directions tied to translations and to the frame
// rotation are split off exactly and reported symbolically; the verdict is
// read from the remaining spectrum.
struct StabilityReport {
  std::vector<Complex> eigenvalues;             // non-structural part
  std::vector<Complex> structural_eigenvalues;  // 0 x4 and +-i sqrt(omega) x2
  double max_real = 0.0;
  bool marginally_stable = false;  // max |Re| below 1e-8 on the non-structural part
};

StabilityReport linear_stability(const RingConfiguration& cfg);

}  // namespace ringbif
