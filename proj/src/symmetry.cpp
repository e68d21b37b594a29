#include "ringbif/symmetry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ringbif {
namespace {

constexpr double kEquivTol = 1e-10;
constexpr double kLeakTol = 1e-9;

int mod1n(int v, int n) { return ((v - 1) % n + n) % n + 1; }

double max_abs(const CMatX& a) { return a.cwiseAbs().maxCoeff(); }

void check_dim(const GroupElement& g, Eigen::Index size, int n) {
  if (n == 0) {
    if (size != 3) throw std::invalid_argument("group action: satellite state must have dim 3");
    if (g.shift != 0)
      throw std::invalid_argument("group action: ring relabeling needs a ring (n > 0)");
  } else {
    if (size != 3 * (n + 1))
      throw std::invalid_argument("group action: configuration size does not match n");
  }
}

}  // namespace

GroupElement compose(const GroupElement& a, const GroupElement& b) {
  // kappa commutes with rotations in this representation, so composition is
  // componentwise.
  return GroupElement{a.kappa != b.kappa, a.shift + b.shift, a.theta + b.theta,
                      a.phase + b.phase};
}

VecX act_config(const GroupElement& g, const VecX& x, int n) {
  check_dim(g, x.size(), n);
  const Eigen::Matrix2d r = rot2(-g.theta);
  const double zsign = g.kappa ? -1.0 : 1.0;
  VecX y(x.size());
  const int bodies = n == 0 ? 1 : n + 1;
  for (int j = 0; j < bodies; ++j) {
    int src = (j == 0 || n == 0) ? j : mod1n(j + g.shift, n);
    y.segment<2>(3 * j) = r * x.segment<2>(3 * src);
    y[3 * j + 2] = zsign * x[3 * src + 2];
  }
  return y;
}

State act_state(const GroupElement& g, const State& s, int n) {
  return State{act_config(g, s.x, n), act_config(g, s.v, n)};
}

MatX action_matrix(const GroupElement& g, int dim, int n) {
  MatX m(dim, dim);
  VecX e = VecX::Zero(dim);
  for (int c = 0; c < dim; ++c) {
    e[c] = 1.0;
    m.col(c) = act_config(g, e, n);
    e[c] = 0.0;
  }
  return m;
}

FourierLoop make_loop(int dim, int L, double nu) {
  FourierLoop loop;
  loop.dim = dim;
  loop.L = L;
  loop.nu = nu;
  loop.c = CMatX::Zero(dim, L + 1);
  return loop;
}

VecX loop_eval(const FourierLoop& loop, double t) {
  CVecX acc = loop.c.col(0);
  for (int l = 1; l <= loop.L; ++l)
    acc += loop.c.col(l) * std::polar(1.0, l * t) +
           loop.c.col(l).conjugate() * std::polar(1.0, -l * t);
  return acc.real();
}

VecX loop_deriv(const FourierLoop& loop, double t) {
  CVecX acc = CVecX::Zero(loop.dim);
  const Complex i(0.0, 1.0);
  for (int l = 1; l <= loop.L; ++l)
    acc += i * static_cast<double>(l) *
           (loop.c.col(l) * std::polar(1.0, l * t) -
            loop.c.col(l).conjugate() * std::polar(1.0, -l * t));
  return acc.real();
}

double loop_norm(const FourierLoop& loop) {
  double s = loop.c.col(0).squaredNorm();
  for (int l = 1; l <= loop.L; ++l) s += 2.0 * loop.c.col(l).squaredNorm();
  return std::sqrt(s);
}

double loop_amplitude(const FourierLoop& loop) {
  double s = 0.0;
  for (int l = 1; l <= loop.L; ++l) s += 2.0 * loop.c.col(l).squaredNorm();
  return std::sqrt(s);
}

FourierLoop act_loop(const GroupElement& g, const FourierLoop& loop, int n) {
  check_dim(g, loop.dim, n);
  MatX rho = action_matrix(GroupElement{g.kappa, g.shift, g.theta, 0.0}, loop.dim, n);
  FourierLoop out = loop;
  for (int l = 0; l <= loop.L; ++l)
    out.c.col(l) = std::polar(1.0, l * g.phase) * (rho * loop.c.col(l));
  return out;
}

const char* to_string(IsotropyKind kind) {
  switch (kind) {
    case IsotropyKind::PlanarZ2: return "planar-z2";
    case IsotropyKind::EightZ2: return "eight-z2";
    case IsotropyKind::PlanarZnk: return "planar-znk";
    case IsotropyKind::SpatialZnk: return "spatial-znk";
  }
  return "?";
}

std::vector<GroupElement> isotropy_group(const IsotropyLabel& label) {
  const double pi = std::numbers::pi;
  std::vector<GroupElement> g;
  switch (label.kind) {
    case IsotropyKind::PlanarZ2:
      g.push_back({});
      g.push_back({true, 0, 0.0, 0.0});
      return g;
    case IsotropyKind::EightZ2:
      g.push_back({});
      g.push_back({true, 0, 0.0, pi});
      return g;
    case IsotropyKind::PlanarZnk:
    case IsotropyKind::SpatialZnk: {
      const int n = label.n;
      const int k = label.k;
      if (n < 2 || k < 1 || k > n)
        throw std::invalid_argument("isotropy_group: need n >= 2 and 1 <= k <= n");
      const double zeta = 2.0 * pi / n;
      const bool spatial = label.kind == IsotropyKind::SpatialZnk;
      for (int m = 0; m < n; ++m)
        for (int s = 0; s < 2; ++s) {
          GroupElement e;
          e.shift = m;
          e.theta = m * zeta;
          e.phase = -m * k * zeta;
          e.kappa = s == 1;
          if (spatial && s == 1) e.phase += pi;
          g.push_back(e);
        }
      return g;
    }
  }
  throw std::invalid_argument("isotropy_group: unknown label");
}

double symmetry_residual(const FourierLoop& loop, const IsotropyLabel& label) {
  const int n = (label.kind == IsotropyKind::PlanarZnk || label.kind == IsotropyKind::SpatialZnk)
                    ? label.n
                    : 0;
  std::vector<GroupElement> gens;
  switch (label.kind) {
    case IsotropyKind::PlanarZ2:
      gens.push_back({true, 0, 0.0, 0.0});
      break;
    case IsotropyKind::EightZ2:
      gens.push_back({true, 0, 0.0, std::numbers::pi});
      break;
    case IsotropyKind::PlanarZnk:
      gens.push_back({false, 1, 2.0 * std::numbers::pi / n,
                      -2.0 * std::numbers::pi * label.k / n});
      gens.push_back({true, 0, 0.0, 0.0});
      break;
    case IsotropyKind::SpatialZnk:
      gens.push_back({false, 1, 2.0 * std::numbers::pi / n,
                      -2.0 * std::numbers::pi * label.k / n});
      gens.push_back({true, 0, 0.0, std::numbers::pi});
      break;
  }
  const int samples = 256;
  double worst = 0.0;
  for (const auto& g : gens) {
    FourierLoop moved = act_loop(g, loop, n);
    for (int s = 0; s < samples; ++s) {
      double t = 2.0 * std::numbers::pi * s / samples;
      worst = std::max(worst,
                       (loop_eval(moved, t) - loop_eval(loop, t)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

LoopProjector fixed_subspace_projector(const IsotropyLabel& label, int dim, int L) {
  const int n = (label.kind == IsotropyKind::PlanarZnk || label.kind == IsotropyKind::SpatialZnk)
                    ? label.n
                    : 0;
  if (n == 0 && dim != 3)
    throw std::invalid_argument("fixed_subspace_projector: satellite classes need dim 3");
  if (n > 0 && dim != 3 * (n + 1))
    throw std::invalid_argument("fixed_subspace_projector: dim does not match the ring size");
  auto group = isotropy_group(label);
  std::vector<MatX> rho;
  rho.reserve(group.size());
  for (const auto& g : group)
    rho.push_back(action_matrix(GroupElement{g.kappa, g.shift, g.theta, 0.0}, dim, n));
  LoopProjector proj;
  proj.pl.reserve(L + 1);
  for (int l = 0; l <= L; ++l) {
    CMatX p = CMatX::Zero(dim, dim);
    for (std::size_t i = 0; i < group.size(); ++i)
      p += std::polar(1.0, l * group[i].phase) * rho[i];
    proj.pl.push_back(p / static_cast<double>(group.size()));
  }
  return proj;
}

FourierLoop project_loop(const LoopProjector& proj, const FourierLoop& loop) {
  if (static_cast<int>(proj.pl.size()) != loop.L + 1 ||
      (loop.L >= 0 && proj.pl[0].rows() != loop.dim))
    throw std::invalid_argument("project_loop: projector does not match the loop");
  FourierLoop out = loop;
  for (int l = 0; l <= loop.L; ++l) out.c.col(l) = proj.pl[l] * loop.c.col(l);
  return out;
}

RingBasis ring_basis(int n) {
  if (n < 2) throw std::invalid_argument("ring_basis: n must be at least 2");
  const int dim = 3 * (n + 1);
  const double zeta = 2.0 * std::numbers::pi / n;
  const Complex i(0.0, 1.0);
  RingBasis basis;
  basis.n = n;
  basis.q = CMatX::Zero(dim, dim);
  int col = 0;

  // Columns represent the discrete Fourier amplitudes of the complexified
  // planar pair (xi = (ux + i uy)/sqrt2, eta = (ux - i uy)/sqrt2) and of z.
  auto xi_col = [&](int m) {
    CVecX q = CVecX::Zero(dim);
    for (int j = 1; j <= n; ++j) {
      Complex w = std::polar(1.0 / std::sqrt(2.0 * n), j * m * zeta);
      q[3 * j] = w;
      q[3 * j + 1] = -i * w;
    }
    return q;
  };
  auto eta_col = [&](int m) {
    CVecX q = CVecX::Zero(dim);
    for (int j = 1; j <= n; ++j) {
      Complex w = std::polar(1.0 / std::sqrt(2.0 * n), j * m * zeta);
      q[3 * j] = w;
      q[3 * j + 1] = i * w;
    }
    return q;
  };
  auto z_col = [&](int m) {
    CVecX q = CVecX::Zero(dim);
    for (int j = 1; j <= n; ++j) q[3 * j + 2] = std::polar(1.0 / std::sqrt(n), j * m * zeta);
    return q;
  };

  for (int k = 1; k <= n; ++k) {
    RingBasis::BlockInfo info;
    info.k = k;
    info.spatial = false;
    info.offset = col;
    basis.q.col(col++) = xi_col(mod1n(k + 1, n));
    basis.q.col(col++) = eta_col(mod1n(k - 1, n));
    if (k == 1) {
      CVecX q = CVecX::Zero(dim);
      q[0] = 1.0 / std::sqrt(2.0);
      q[1] = i / std::sqrt(2.0);
      basis.q.col(col++) = q;
    }
    if (k == n - 1) {
      CVecX q = CVecX::Zero(dim);
      q[0] = 1.0 / std::sqrt(2.0);
      q[1] = -i / std::sqrt(2.0);
      basis.q.col(col++) = q;
    }
    info.size = col - info.offset;
    basis.blocks.push_back(info);
  }
  for (int k = 1; k <= n; ++k) {
    RingBasis::BlockInfo info;
    info.k = k;
    info.spatial = true;
    info.offset = col;
    basis.q.col(col++) = z_col(k);
    if (k == n) {
      CVecX q = CVecX::Zero(dim);
      q[3 * 0 + 2] = 1.0;
      basis.q.col(col++) = q;
    }
    info.size = col - info.offset;
    basis.blocks.push_back(info);
  }
  if (col != dim) throw std::logic_error("ring_basis: column count mismatch");
  return basis;
}

namespace {

BlockDecomposition block_diagonalize_impl(const CMatX& a, int n) {
  const int dim = 3 * (n + 1);
  if (a.rows() != dim || a.cols() != dim)
    throw std::invalid_argument("dft_block_diagonalize: matrix size does not match n");
  const double scale = std::max(1.0, max_abs(a));
  if (max_abs(CMatX(a - a.adjoint())) > kEquivTol * scale)
    throw std::invalid_argument("dft_block_diagonalize: matrix is not Hermitian");
  const double zeta = 2.0 * std::numbers::pi / n;
  MatX gen = action_matrix(GroupElement{false, 1, zeta, 0.0}, dim, n);
  MatX flip = action_matrix(GroupElement{true, 0, 0.0, 0.0}, dim, n);
  if (max_abs(CMatX(a * gen - gen * a)) > kEquivTol * scale)
    throw std::invalid_argument(
        "dft_block_diagonalize: matrix does not commute with the ring generator");
  if (max_abs(CMatX(a * flip - flip * a)) > kEquivTol * scale)
    throw std::invalid_argument(
        "dft_block_diagonalize: matrix does not commute with the z reflection");

  BlockDecomposition dec;
  dec.basis = ring_basis(n);
  CMatX b = dec.basis.q.adjoint() * a * dec.basis.q;
  CMatX mask = b;
  for (const auto& info : dec.basis.blocks) {
    dec.blocks.push_back(b.block(info.offset, info.offset, info.size, info.size));
    mask.block(info.offset, info.offset, info.size, info.size).setZero();
  }
  dec.off_block_max = max_abs(mask);
  if (dec.off_block_max > kLeakTol * scale)
    throw std::runtime_error("dft_block_diagonalize: off-block coupling above tolerance");
  return dec;
}

}  // namespace

BlockDecomposition dft_block_diagonalize(const MatX& a, int n) {
  return block_diagonalize_impl(a.cast<Complex>(), n);
}

BlockDecomposition dft_block_diagonalize(const CMatX& a, int n) {
  return block_diagonalize_impl(a, n);
}

double choreography_omega(int k, double omega, double nu) {
  if (nu == 0.0) throw std::invalid_argument("choreography_omega: nu must be nonzero");
  return 1.0 - k * std::sqrt(omega) / nu;
}

bool choreography_indicator(const FourierLoop& loop, int k, int n, double omega, double tol) {
  double w = choreography_omega(k, omega, loop.nu);
  double q = w / n;
  return std::abs(q - std::round(q)) * n <= tol;
}

}  // namespace ringbif
