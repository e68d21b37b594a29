#include "ringbif/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace ringbif {
namespace {

constexpr double kEquilibriumTol = 1e-8;

CMatX hermitian_part(const CMatX& m) { return 0.5 * (m + m.adjoint()); }

// Orthonormal basis of the complement of the given directions.
CMatX complement_basis(int dim, const std::vector<CVecX>& deflate) {
  CMatX d(dim, static_cast<Eigen::Index>(deflate.size()));
  for (std::size_t i = 0; i < deflate.size(); ++i) d.col(static_cast<Eigen::Index>(i)) = deflate[i];
  Eigen::HouseholderQR<CMatX> qr(d);
  CMatX q = qr.householderQ();
  return q.rightCols(dim - static_cast<int>(deflate.size()));
}

// Mass-relative bound on the largest frequency at which a mode matrix can
// be singular: nu <= sqrt(w) + sqrt(w + |M^-1/2 H M^-1/2|).
double crossing_bound(const VecX& mass, double omega, const MatX& h) {
  VecX inv_sqrt = mass.cwiseSqrt().cwiseInverse();
  MatX ht = inv_sqrt.asDiagonal() * h * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (ht + ht.transpose()));
  double hmax = es.eigenvalues().cwiseAbs().maxCoeff();
  double w = std::sqrt(omega);
  return w + std::sqrt(omega + hmax) + 0.5;
}

struct GridSample {
  double nu = 0.0;
  MorseIndexResult morse;
};

MorseIndexResult clean_morse(const SpectralBlock& block, double& nu, double step) {
  MorseIndexResult r = morse_index(block.mode(nu), block.scan_deflate);
  for (int tries = 0; r.at_crossing && tries < 5; ++tries) {
    nu += 0.31 * step;  // deterministic nudge off a grid point that sits on a crossing
    r = morse_index(block.mode(nu), block.scan_deflate);
  }
  return r;
}

}  // namespace

MorseIndexResult morse_index(const CMatX& m, const std::vector<CVecX>& deflate) {
  CMatX a = hermitian_part(m);
  if (!deflate.empty()) {
    CMatX c = complement_basis(static_cast<int>(a.rows()), deflate);
    a = CMatX(c.adjoint() * a * c);
  }
  MorseIndexResult r;
  if (a.rows() == 0) {
    r.min_abs_eig = std::numeric_limits<double>::infinity();
    return r;
  }
  Eigen::SelfAdjointEigenSolver<CMatX> es(a, Eigen::EigenvaluesOnly);
  r.min_abs_eig = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()[i];
    if (lam < -kZeroEigTol) ++r.index;
    if (std::abs(lam) <= kZeroEigTol) r.at_crossing = true;
    r.min_abs_eig = std::min(r.min_abs_eig, std::abs(lam));
  }
  return r;
}

std::vector<SpectralBlock> satellite_blocks(const Vec2& eq, const SatelliteSystem& sys) {
  validate(sys);
  Vec3 x(eq.x(), eq.y(), 0.0);
  if (satellite_grad(x, sys).norm() > kEquilibriumTol)
    throw std::invalid_argument("satellite_blocks: point is not an equilibrium");
  Eigen::Matrix3d h = satellite_hess(x, sys);

  std::vector<SpectralBlock> blocks;
  {
    SpectralBlock b;
    b.id = "planar";
    b.size = 2;
    b.label = IsotropyLabel{IsotropyKind::PlanarZ2, 0, 0};
    b.basis = CMatX::Zero(3, 2);
    b.basis(0, 0) = 1.0;
    b.basis(1, 1) = 1.0;
    Eigen::Matrix2cd huu = h.topLeftCorner<2, 2>().cast<Complex>();
    Eigen::Matrix2cd jc = rot_j().cast<Complex>();
    b.mode = [huu, jc](double nu) {
      return CMatX(nu * nu * Eigen::Matrix2cd::Identity() - Complex(0.0, 2.0 * nu) * jc + huu);
    };
    b.nu_max_hint = crossing_bound(VecX::Ones(3), 1.0, h);
    blocks.push_back(std::move(b));
  }
  {
    SpectralBlock b;
    b.id = "spatial";
    b.spatial = true;
    b.size = 1;
    b.label = IsotropyLabel{IsotropyKind::EightZ2, 0, 0};
    b.basis = CMatX::Zero(3, 1);
    b.basis(2, 0) = 1.0;
    double hzz = h(2, 2);
    b.mode = [hzz](double nu) {
      CMatX m(1, 1);
      m(0, 0) = nu * nu + hzz;
      return m;
    };
    b.nu_max_hint = crossing_bound(VecX::Ones(3), 1.0, h);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

CMatX ring_mode_matrix(const RingConfiguration& cfg, double nu, int l) {
  BodySystem sys = body_system(cfg);
  const int dim = 3 * (cfg.n + 1);
  VecX mass(dim);
  for (int j = 0; j <= cfg.n; ++j) mass.segment<3>(3 * j).setConstant(sys.masses[j]);
  MatX h = nbody_hess(ring_state(cfg), sys);
  MatX k = MatX::Zero(dim, dim);
  for (int j = 0; j <= cfg.n; ++j) {
    k(3 * j, 3 * j + 1) = -sys.masses[j];
    k(3 * j + 1, 3 * j) = sys.masses[j];
  }
  const double lnu = l * nu;
  return lnu * lnu * mass.asDiagonal().toDenseMatrix().cast<Complex>() -
         Complex(0.0, 2.0 * lnu * std::sqrt(cfg.omega)) * k.cast<Complex>() +
         h.cast<Complex>();
}

std::vector<SpectralBlock> ring_blocks(const RingConfiguration& cfg) {
  if (!(cfg.mu > 0.0))
    throw std::domain_error("ring_blocks: the mode pencil needs a positive central mass");
  BodySystem sys = body_system(cfg);
  const int n = cfg.n;
  const int dim = 3 * (n + 1);
  VecX mass(dim);
  for (int j = 0; j <= n; ++j) mass.segment<3>(3 * j).setConstant(sys.masses[j]);
  VecX x = ring_state(cfg);
  MatX h = nbody_hess(x, sys);
  MatX kmat = MatX::Zero(dim, dim);
  for (int j = 0; j <= n; ++j) {
    kmat(3 * j, 3 * j + 1) = -sys.masses[j];
    kmat(3 * j + 1, 3 * j) = sys.masses[j];
  }
  const double sw = std::sqrt(cfg.omega);
  const double bound = crossing_bound(mass, cfg.omega, h);

  // The leakage and equivariance checks run on the Hessian; M and K commute
  // with the ring action exactly, so their blocks are sliced directly.
  BlockDecomposition dec = dft_block_diagonalize(h, n);
  CMatX mq = dec.basis.q.adjoint() * mass.cast<Complex>().asDiagonal() * dec.basis.q;
  CMatX kq = dec.basis.q.adjoint() * kmat.cast<Complex>() * dec.basis.q;

  // Structural directions in configuration space.
  VecX rot_gen = VecX::Zero(dim);
  for (int j = 1; j <= n; ++j) {
    rot_gen[3 * j] = -x[3 * j + 1];
    rot_gen[3 * j + 1] = x[3 * j];
  }
  VecX tz = VecX::Zero(dim);
  for (int j = 0; j <= n; ++j) tz[3 * j + 2] = 1.0;

  std::vector<SpectralBlock> blocks;
  blocks.reserve(dec.basis.blocks.size());
  for (std::size_t i = 0; i < dec.basis.blocks.size(); ++i) {
    const auto& info = dec.basis.blocks[i];
    SpectralBlock b;
    b.k = info.k;
    b.spatial = info.spatial;
    b.size = info.size;
    b.id = (info.spatial ? std::string("spatial k=") : std::string("planar k=")) +
           std::to_string(info.k);
    b.label = info.spatial ? IsotropyLabel{IsotropyKind::SpatialZnk, n, info.k}
                           : IsotropyLabel{IsotropyKind::PlanarZnk, n, info.k};
    b.basis = dec.basis.q.middleCols(info.offset, info.size);
    CMatX mb = mq.block(info.offset, info.offset, info.size, info.size);
    CMatX kb = kq.block(info.offset, info.offset, info.size, info.size);
    CMatX hb = dec.blocks[i];
    b.mode = [mb, kb, hb, sw](double nu) {
      return CMatX(nu * nu * mb - Complex(0.0, 2.0 * nu * sw) * kb + hb);
    };
    b.nu_max_hint = bound;
    if (!info.spatial && info.k == n) {
      CVecX v = b.basis.adjoint() * rot_gen.cast<Complex>();
      b.kernel_at_zero.push_back(v.normalized());
      b.scan_deflate.push_back(v.normalized());
      StructuralMode s;
      s.direction = CVecX(2);
      s.direction << 1.0, -3.0;
      s.direction.normalize();
      s.nu0 = sw;
      s.what = "homographic";  // rigid rotation-dilation of the whole ring
      b.structural.push_back(std::move(s));
    }
    if (info.spatial && info.k == n) {
      CVecX v = b.basis.adjoint() * tz.cast<Complex>();
      b.kernel_at_zero.push_back(v.normalized());
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<BifurcationEvent> scan_bifurcations(const std::vector<SpectralBlock>& blocks,
                                                const ScanOptions& opts) {
  if (!(opts.nu_min > 0.0) || !(opts.step > 0.0) || !(opts.refine > 0.0))
    throw std::invalid_argument("scan_bifurcations: grid parameters must be positive");
  std::vector<BifurcationEvent> events;
  std::vector<std::size_t> owner;

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const SpectralBlock& block = blocks[bi];
    double nu_max = opts.nu_max > 0.0 ? opts.nu_max : block.nu_max_hint;
    if (!(nu_max > opts.nu_min))
      throw std::invalid_argument("scan_bifurcations: empty frequency window");

    GridSample prev;
    prev.nu = opts.nu_min;
    prev.morse = clean_morse(block, prev.nu, opts.step);
    for (double nu = opts.nu_min + opts.step; nu <= nu_max + 0.5 * opts.step;
         nu += opts.step) {
      GridSample cur;
      cur.nu = std::min(nu, nu_max);
      cur.morse = clean_morse(block, cur.nu, opts.step);
      if (cur.nu <= prev.nu) continue;
      while (cur.morse.index != prev.morse.index) {
        double lo = prev.nu, hi = cur.nu;
        int idx_lo = prev.morse.index, idx_hi = cur.morse.index;
        while (hi - lo > opts.refine) {
          double mid = 0.5 * (lo + hi);
          MorseIndexResult rm = morse_index(block.mode(mid), block.scan_deflate);
          for (int t = 0; rm.at_crossing && t < 4; ++t) {
            mid = 0.5 * (lo + hi) + (t + 1) * 0.01 * (hi - lo);
            rm = morse_index(block.mode(mid), block.scan_deflate);
          }
          if (rm.at_crossing) break;
          if (rm.index == idx_lo) {
            lo = mid;
          } else {
            hi = mid;
            idx_hi = rm.index;
          }
        }
        BifurcationEvent ev;
        ev.nu0 = 0.5 * (lo + hi);
        ev.width = 0.5 * (hi - lo);
        ev.block_id = block.id;
        ev.k = block.k;
        ev.spatial = block.spatial;
        ev.label = block.label;
        ev.index_left = idx_lo;
        ev.index_right = idx_hi;
        ev.eta = idx_hi - idx_lo;
        Eigen::SelfAdjointEigenSolver<CMatX> es(hermitian_part(block.mode(ev.nu0)));
        Eigen::Index best = 0;
        es.eigenvalues().cwiseAbs().minCoeff(&best);
        ev.kernel = es.eigenvectors().col(best);
        for (const auto& s : block.structural)
          if (std::abs(ev.nu0 - s.nu0) <= std::max(1e-6, 10.0 * ev.width)) ev.structural = true;
        events.push_back(std::move(ev));
        owner.push_back(bi);
        // Continue from the right end of the bracket in case the grid cell
        // holds a second jump.
        if (idx_hi == cur.morse.index) break;
        prev.nu = hi;
        prev.morse.index = idx_hi;
      }
      prev = cur;
      if (cur.nu >= nu_max) break;
    }
  }

  // Resonance pass: another block (or a higher Fourier mode of any block)
  // crossing at the same frequency.
  for (std::size_t e = 0; e < events.size(); ++e) {
    BifurcationEvent& ev = events[e];
    double w = std::max(ev.width, 1e-9);
    for (std::size_t bi = 0; bi < blocks.size() && !ev.resonant; ++bi) {
      for (int l = 1; l <= opts.l_res && !ev.resonant; ++l) {
        if (bi == owner[e] && l == 1) continue;
        const auto& defl = blocks[bi].scan_deflate;
        MorseIndexResult lo = morse_index(blocks[bi].mode(l * (ev.nu0 - w)), defl);
        MorseIndexResult hi = morse_index(blocks[bi].mode(l * (ev.nu0 + w)), defl);
        MorseIndexResult at = morse_index(blocks[bi].mode(l * ev.nu0), defl);
        if (lo.index != hi.index || at.min_abs_eig < opts.resonance_tol) ev.resonant = true;
      }
    }
  }

  std::sort(events.begin(), events.end(), [](const BifurcationEvent& a, const BifurcationEvent& b) {
    if (a.nu0 != b.nu0) return a.nu0 < b.nu0;
    return a.block_id < b.block_id;
  });
  return events;
}

int planar_criterion(double T, double D) {
  if (std::abs(D) <= 1e-8)
    throw std::invalid_argument(
        "planar_criterion: degenerate Hessian (|D| <= 1e-8) has no event count");
  if (D < 0.0) return 1;
  double margin = 2.0 - 0.5 * T;
  if (D > 0.0 && T < 4.0 && D < margin * margin) return 2;
  return 0;
}

std::vector<ThresholdRecord> find_mu_k(int n, int k, double mu_min, double mu_max, int grid) {
  if (n < 2) throw std::invalid_argument("find_mu_k: n must be at least 2");
  if (k < 1 || k > n - 1)
    throw std::invalid_argument("find_mu_k: k must lie in 1..n-1");
  if (!(mu_min > 0.0) || !(mu_max > mu_min) || grid < 2)
    throw std::invalid_argument("find_mu_k: bad mu range");

  auto block_det = [&](double mu) {
    RingConfiguration cfg = maxwell_ring(n, mu);
    BlockDecomposition dec = dft_block_diagonalize(nbody_hess(ring_state(cfg), body_system(cfg)), n);
    return dec.blocks[k - 1].determinant().real();
  };

  // Log-spaced grid; the thresholds of small rings sit well below 1.
  std::vector<ThresholdRecord> out;
  double prev_mu = mu_min;
  double prev_det = block_det(prev_mu);
  for (int i = 1; i < grid; ++i) {
    double mu = mu_min * std::pow(mu_max / mu_min, static_cast<double>(i) / (grid - 1));
    double det = block_det(mu);
    if ((prev_det < 0.0) != (det < 0.0) && prev_det != 0.0 && det != 0.0) {
      double lo = prev_mu, hi = mu, flo = prev_det;
      while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        double fm = block_det(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      ThresholdRecord rec;
      rec.k = k;
      rec.mu = 0.5 * (lo + hi);
      rec.width = 0.5 * (hi - lo);
      rec.det_left = prev_det;
      rec.det_right = det;
      out.push_back(rec);
    }
    prev_mu = mu;
    prev_det = det;
  }
  return out;
}

StabilityReport linear_stability(const RingConfiguration& cfg) {
  if (!(cfg.mu > 0.0))
    throw std::domain_error("linear_stability: needs a positive central mass");
  BodySystem sys = body_system(cfg);
  const int n = cfg.n;
  const int dim = 3 * (n + 1);
  VecX mass(dim);
  for (int j = 0; j <= n; ++j) mass.segment<3>(3 * j).setConstant(sys.masses[j]);
  VecX a = ring_state(cfg);
  MatX h = nbody_hess(a, sys);
  const double sw = std::sqrt(cfg.omega);

  MatX g = MatX::Zero(dim, dim);
  for (int j = 0; j <= n; ++j) {
    g(3 * j, 3 * j + 1) = -1.0;
    g(3 * j + 1, 3 * j) = 1.0;
  }

  MatX s = MatX::Zero(2 * dim, 2 * dim);
  s.topRightCorner(dim, dim).setIdentity();
  s.bottomLeftCorner(dim, dim) = mass.cwiseInverse().asDiagonal() * h;
  s.bottomRightCorner(dim, dim) = -2.0 * sw * g;

  // Exact invariant subspace of the symmetry modes: planar translations,
  // vertical translations and the frame rotation (a Jordan pair with
  // partner -2/(3 sqrt(omega)) a, since H a = 3 omega M a).
  VecX tx = VecX::Zero(dim), ty = VecX::Zero(dim), tz = VecX::Zero(dim);
  for (int j = 0; j <= n; ++j) {
    tx[3 * j] = 1.0;
    ty[3 * j + 1] = 1.0;
    tz[3 * j + 2] = 1.0;
  }
  VecX rot = g * a;
  VecX wr = -2.0 / (3.0 * sw) * a;

  MatX qs = MatX::Zero(2 * dim, 8);
  qs.block(0, 0, dim, 1) = tx;
  qs.block(0, 1, dim, 1) = ty;
  qs.block(dim, 2, dim, 1) = tx;
  qs.block(dim, 3, dim, 1) = ty;
  qs.block(0, 4, dim, 1) = tz;
  qs.block(dim, 5, dim, 1) = tz;
  qs.block(0, 6, dim, 1) = rot;
  qs.block(0, 7, dim, 1) = wr;
  qs.block(dim, 7, dim, 1) = rot;

  Eigen::HouseholderQR<MatX> qr(qs);
  MatX qfull = qr.householderQ();
  MatX q1 = qfull.leftCols(8);
  MatX q2 = qfull.rightCols(2 * dim - 8);
  double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  double leak = (q2.transpose() * s * q1).cwiseAbs().maxCoeff();
  if (leak > 1e-8 * scale)
    throw std::runtime_error("linear_stability: symmetry subspace failed to split off");

  MatX c = q2.transpose() * s * q2;
  Eigen::EigenSolver<MatX> es(c);

  StabilityReport rep;
  rep.eigenvalues.assign(es.eigenvalues().data(),
                         es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](Complex l, Complex r) {
    if (l.real() != r.real()) return l.real() < r.real();
    return l.imag() < r.imag();
  });
  for (int i = 0; i < 4; ++i) rep.structural_eigenvalues.emplace_back(0.0, 0.0);
  for (int i = 0; i < 2; ++i) {
    rep.structural_eigenvalues.emplace_back(0.0, sw);
    rep.structural_eigenvalues.emplace_back(0.0, -sw);
  }
  rep.max_real = 0.0;
  for (const auto& lam : rep.eigenvalues) rep.max_real = std::max(rep.max_real, lam.real());
  rep.marginally_stable = rep.max_real < 1e-8;
  return rep;
}

}  // namespace ringbif
