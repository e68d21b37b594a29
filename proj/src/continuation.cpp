#include "ringbif/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ringbif {

namespace {

constexpr double kTinyRadius = 1e-12;  // body-1 mean too close to the axis

int quadrature_points(int L) { return 4 * (2 * L + 1); }
int packed_size(int dim, int L) { return dim * (2 * L + 1); }
int re_offset(int dim, int l) { return dim + (l - 1) * 2 * dim; }
int im_offset(int dim, int l) { return re_offset(dim, l) + dim; }

std::vector<Complex> unit_roots(int np) {
  std::vector<Complex> root(np);
  for (int r = 0; r < np; ++r)
    root[r] = std::polar(1.0, -2.0 * M_PI * r / np);
  return root;
}

// Planar rotation generator, J on each body's (x, y) pair, zero on z.
MatX rotation_generator(int dim) {
  MatX g = MatX::Zero(dim, dim);
  for (int b = 0; 3 * b + 2 < dim; ++b) {
    g(3 * b, 3 * b + 1) = -1.0;
    g(3 * b + 1, 3 * b) = 1.0;
  }
  return g;
}

// Loop samples on the dealiased trapezoid grid.
MatX sample_grid(const CMatX& c, int L, const std::vector<Complex>& root) {
  const int dim = static_cast<int>(c.rows());
  const int np = static_cast<int>(root.size());
  MatX xs(dim, np);
  for (int q = 0; q < np; ++q) {
    VecX x = c.col(0).real();
    for (int l = 1; l <= L; ++l) {
      const Complex e = std::conj(root[(l * q) % np]);  // e^{+i l t_q}
      x += 2.0 * (c.col(l) * e).real();
    }
    xs.col(q) = x;
  }
  return xs;
}

}  // namespace

LoopSystem loop_system(const SatelliteSystem& sys) {
  validate(sys);
  LoopSystem ls;
  ls.dim = 3;
  ls.n = 0;
  ls.sqrt_omega = 1.0;
  ls.mass = VecX::Ones(3);
  // A single primary at the origin leaves the potential rotation invariant
  // (the Kepler case); every other anchor layout breaks the frame rotation.
  ls.has_rotation =
      sys.anchors.size() == 1 && sys.anchors[0].norm() < 1e-12;
  ls.gauge_base = 0;
  ls.potential = [sys](const VecX& x) {
    return satellite_potential(Vec3(x.head<3>()), sys);
  };
  ls.grad = [sys](const VecX& x) -> VecX {
    return satellite_grad(Vec3(x.head<3>()), sys);
  };
  ls.hess = [sys](const VecX& x) -> MatX {
    return satellite_hess(Vec3(x.head<3>()), sys);
  };
  ls.separation = [sys](const VecX& x) {
    return min_separation(Vec3(x.head<3>()), sys);
  };
  return ls;
}

LoopSystem loop_system(const BodySystem& sys) {
  validate(sys);
  for (int j = 0; j <= sys.n; ++j)
    if (sys.masses[j] <= 0.0)
      throw std::invalid_argument(
          "loop continuation needs strictly positive masses (zero-mass bodies "
          "decouple and leave the loop equations singular)");
  LoopSystem ls;
  ls.dim = 3 * (sys.n + 1);
  ls.n = sys.n;
  ls.sqrt_omega = std::sqrt(sys.omega);
  ls.mass.resize(ls.dim);
  for (int j = 0; j <= sys.n; ++j)
    ls.mass.segment<3>(3 * j).setConstant(sys.masses[j]);
  ls.has_rotation = true;
  ls.gauge_base = 3;  // body 1; the central body's mean can sit at the origin
  ls.potential = [sys](const VecX& x) { return nbody_potential(x, sys); };
  ls.grad = [sys](const VecX& x) { return nbody_grad(x, sys); };
  ls.hess = [sys](const VecX& x) { return nbody_hess(x, sys); };
  ls.separation = [sys](const VecX& x) { return min_separation(x, sys); };
  return ls;
}

VecX pack_loop(const FourierLoop& loop) {
  VecX y(packed_size(loop.dim, loop.L));
  y.head(loop.dim) = loop.c.col(0).real();
  for (int l = 1; l <= loop.L; ++l) {
    y.segment(re_offset(loop.dim, l), loop.dim) = loop.c.col(l).real();
    y.segment(im_offset(loop.dim, l), loop.dim) = loop.c.col(l).imag();
  }
  return y;
}

FourierLoop unpack_loop(const VecX& y, int dim, int L, double nu) {
  if (y.size() != packed_size(dim, L))
    throw std::invalid_argument("packed loop vector has the wrong length");
  FourierLoop loop = make_loop(dim, L, nu);
  loop.c.col(0) = y.head(dim).cast<Complex>();
  for (int l = 1; l <= L; ++l)
    loop.c.col(l) = y.segment(re_offset(dim, l), dim) +
                    Complex(0, 1) * y.segment(im_offset(dim, l), dim);
  return loop;
}

CMatX fourier_residual(const FourierLoop& loop, double nu, const LoopSystem& sys) {
  if (loop.dim != sys.dim)
    throw std::invalid_argument("loop dimension does not match the system");
  const int dim = loop.dim;
  const int L = loop.L;
  const int np = quadrature_points(L);
  const auto root = unit_roots(np);
  const MatX xs = sample_grid(loop.c, L, root);

  MatX gs(dim, np);
  for (int q = 0; q < np; ++q) gs.col(q) = sys.grad(xs.col(q));

  const MatX gmat = rotation_generator(dim);
  CMatX f(dim, L + 1);
  for (int l = 0; l <= L; ++l) {
    VecX gre = VecX::Zero(dim);
    VecX gim = VecX::Zero(dim);
    for (int q = 0; q < np; ++q) {
      const Complex e = root[(l * q) % np];  // e^{-i l t_q}
      gre += e.real() * gs.col(q);
      gim += e.imag() * gs.col(q);
    }
    CVecX fl = (gre + Complex(0, 1) * gim) / double(np);
    if (l > 0) {
      const CVecX cl = loop.c.col(l);
      const CVecX mc = sys.mass.cast<Complex>().cwiseProduct(cl);
      const CVecX mgc =
          sys.mass.cast<Complex>().cwiseProduct(gmat.cast<Complex>() * cl);
      fl += double(l) * double(l) * nu * nu * mc +
            Complex(0.0, -2.0 * l * nu * sys.sqrt_omega) * mgc;
    }
    f.col(l) = fl;
  }
  return f;
}

CMatX fourier_residual(const FourierLoop& loop, const LoopSystem& sys) {
  return fourier_residual(loop, loop.nu, sys);
}

MatX fourier_jacobian(const FourierLoop& loop, double nu, const LoopSystem& sys) {
  if (loop.dim != sys.dim)
    throw std::invalid_argument("loop dimension does not match the system");
  const int dim = loop.dim;
  const int L = loop.L;
  const int np = quadrature_points(L);
  const int D = packed_size(dim, L);
  const auto root = unit_roots(np);
  const MatX xs = sample_grid(loop.c, L, root);

  // D(m) = (1/np) sum_q H(x_q) e^{-i m t_q}, m = 0..2L; D(-m) = conj(D(m)).
  std::vector<MatX> d_re(2 * L + 1, MatX::Zero(dim, dim));
  std::vector<MatX> d_im(2 * L + 1, MatX::Zero(dim, dim));
  for (int q = 0; q < np; ++q) {
    const MatX h = sys.hess(xs.col(q));
    for (int m = 0; m <= 2 * L; ++m) {
      const Complex e = root[(m * q) % np];
      d_re[m] += e.real() * h;
      d_im[m] += e.imag() * h;
    }
  }
  for (int m = 0; m <= 2 * L; ++m) {
    d_re[m] /= double(np);
    d_im[m] /= double(np);
  }
  const auto re_blk = [&](int m) -> MatX {
    return m >= 0 ? d_re[m] : d_re[-m];
  };
  const auto im_blk = [&](int m) -> MatX {
    return m >= 0 ? d_im[m] : MatX(-d_im[-m]);
  };

  MatX jac = MatX::Zero(D, D);
  jac.topLeftCorner(dim, dim) = d_re[0];
  for (int l = 1; l <= L; ++l) {
    jac.block(0, re_offset(dim, l), dim, dim) = 2.0 * d_re[l];
    jac.block(0, im_offset(dim, l), dim, dim) = 2.0 * d_im[l];
    jac.block(re_offset(dim, l), 0, dim, dim) = d_re[l];
    jac.block(im_offset(dim, l), 0, dim, dim) = d_im[l];
  }
  for (int l = 1; l <= L; ++l) {
    for (int lp = 1; lp <= L; ++lp) {
      const int m1 = l - lp;  // P = D(l - l')
      const int m2 = l + lp;  // Q = D(l + l')
      jac.block(re_offset(dim, l), re_offset(dim, lp), dim, dim) =
          re_blk(m1) + re_blk(m2);
      jac.block(re_offset(dim, l), im_offset(dim, lp), dim, dim) =
          -im_blk(m1) + im_blk(m2);
      jac.block(im_offset(dim, l), re_offset(dim, lp), dim, dim) =
          im_blk(m1) + im_blk(m2);
      jac.block(im_offset(dim, l), im_offset(dim, lp), dim, dim) =
          re_blk(m1) - re_blk(m2);
    }
  }

  const MatX kmat = sys.mass.asDiagonal() * rotation_generator(dim);
  for (int l = 1; l <= L; ++l) {
    const double w2 = double(l) * double(l) * nu * nu;
    const double cor = 2.0 * l * nu * sys.sqrt_omega;
    jac.block(re_offset(dim, l), re_offset(dim, l), dim, dim).diagonal() +=
        w2 * sys.mass;
    jac.block(im_offset(dim, l), im_offset(dim, l), dim, dim).diagonal() +=
        w2 * sys.mass;
    jac.block(re_offset(dim, l), im_offset(dim, l), dim, dim) += cor * kmat;
    jac.block(im_offset(dim, l), re_offset(dim, l), dim, dim) -= cor * kmat;
  }
  return jac;
}

MatX fixed_subspace_basis(const LoopProjector& proj, int dim, int L) {
  if (static_cast<int>(proj.pl.size()) != L + 1)
    throw std::invalid_argument("projector was built for a different mode count");
  const int D = packed_size(dim, L);
  std::vector<VecX> cols;
  {
    const MatX p0 = proj.pl[0].real();
    Eigen::SelfAdjointEigenSolver<MatX> es(p0);
    for (int i = 0; i < dim; ++i) {
      if (es.eigenvalues()(i) < 0.5) continue;
      VecX col = VecX::Zero(D);
      col.head(dim) = es.eigenvectors().col(i);
      cols.push_back(col);
    }
  }
  for (int l = 1; l <= L; ++l) {
    MatX pr(2 * dim, 2 * dim);
    pr.topLeftCorner(dim, dim) = proj.pl[l].real();
    pr.topRightCorner(dim, dim) = -proj.pl[l].imag();
    pr.bottomLeftCorner(dim, dim) = proj.pl[l].imag();
    pr.bottomRightCorner(dim, dim) = proj.pl[l].real();
    Eigen::SelfAdjointEigenSolver<MatX> es(pr);
    for (int i = 0; i < 2 * dim; ++i) {
      if (es.eigenvalues()(i) < 0.5) continue;
      VecX col = VecX::Zero(D);
      col.segment(re_offset(dim, l), 2 * dim) = es.eigenvectors().col(i);
      cols.push_back(col);
    }
  }
  MatX basis(D, static_cast<int>(cols.size()));
  for (int i = 0; i < basis.cols(); ++i) basis.col(i) = cols[i];
  return basis;
}

PeriodicProblem make_problem(const LoopSystem& sys, const IsotropyLabel& label, int L) {
  PeriodicProblem pb;
  pb.system = sys;
  pb.label = label;
  pb.L = L;
  pb.basis = fixed_subspace_basis(fixed_subspace_projector(label, sys.dim, L),
                                  sys.dim, L);
  pb.pin = 0;
  pb.rotation_pin = sys.has_rotation;
  return pb;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::none: return "none";
    case Termination::max_steps: return "max_steps";
    case Termination::norm_blowup: return "norm_blowup";
    case Termination::period_blowup: return "period_blowup";
    case Termination::collision_approach: return "collision_approach";
    case Termination::equilibrium_return: return "equilibrium_return";
    case Termination::corrector_failure: return "corrector_failure";
  }
  return "none";
}

namespace {

// Shared pieces of the bordered Newton systems.
struct Border {
  const PeriodicProblem* pb = nullptr;
  int dim = 0, L = 0, D = 0, ds = 0;
  bool rot = false;
  MatX a0;  // packed time-shift generator, mode l block [[0,-l],[l,0]]
  MatX a1;  // packed rotation generator, G on every mode
  MatX gmat;

  explicit Border(const PeriodicProblem& problem) : pb(&problem) {
    dim = problem.system.dim;
    L = problem.L;
    D = packed_size(dim, L);
    ds = static_cast<int>(problem.basis.cols());
    rot = problem.rotation_pin && problem.system.has_rotation;
    gmat = rotation_generator(dim);
    a0 = MatX::Zero(D, D);
    a1 = MatX::Zero(D, D);
    a1.topLeftCorner(dim, dim) = gmat;
    for (int l = 1; l <= L; ++l) {
      const int ro = re_offset(dim, l);
      const int io = im_offset(dim, l);
      a0.block(ro, io, dim, dim).diagonal().setConstant(-double(l));
      a0.block(io, ro, dim, dim).diagonal().setConstant(double(l));
      a1.block(ro, ro, dim, dim) = gmat;
      a1.block(io, io, dim, dim) = gmat;
    }
  }

  int multipliers() const { return rot ? 2 : 1; }
};

enum class ExtraRow { none, amplitude, arclength };

struct NewtonSetup {
  VecX z;            // subspace coordinates, start value
  double nu = 1.0;   // start value (fixed when free_nu is false)
  double l0 = 0.0;
  double l1 = 0.0;
  VecX y_ref;        // packed gauge reference (predictor or guess)
  int pin = 0;
  bool free_nu = true;
  ExtraRow extra = ExtraRow::none;
  double amp_target = 0.0;  // extra == amplitude
  VecX tau;                 // extra == arclength, unit tangent in w space
  VecX w_pred;              // extra == arclength, predictor in w space
};

struct NewtonResult {
  bool converged = false;
  bool collided = false;
  VecX z;
  double nu = 0.0;
  double l0 = 0.0;
  double l1 = 0.0;
  double residual = 0.0;
  int iters = 0;
};

double wrap_pi(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

// w layout: [z; nu (if free); lambda0; lambda1 (if rotation)].
NewtonResult bordered_newton(const Border& bd, const NewtonSetup& setup,
                             const ContinuationOptions& opts) {
  const MatX& B = bd.pb->basis;
  const LoopSystem& sys = bd.pb->system;
  const int dim = bd.dim, L = bd.L, ds = bd.ds;
  const int nw = ds + (setup.free_nu ? 1 : 0) + bd.multipliers();
  const int col_nu = setup.free_nu ? ds : -1;
  const int col_l0 = ds + (setup.free_nu ? 1 : 0);
  const int col_l1 = bd.rot ? col_l0 + 1 : -1;
  const int extra_rows = (setup.extra == ExtraRow::none) ? 0 : 1;
  const int nrows = ds + 1 + (bd.rot ? 1 : 0) + extra_rows;
  if (nrows != nw)
    throw std::logic_error("bordered system is not square");

  const int ir1 = im_offset(dim, 1) + setup.pin;
  const int rr1 = re_offset(dim, 1) + setup.pin;
  const double phase_target = setup.y_ref(ir1);

  // Rotation gauge: pin the angular coordinate of one body's mean position,
  // falling back to orthogonality against the rotation orbit when the mean
  // sits on the axis.
  const int bx = sys.gauge_base, by = sys.gauge_base + 1;
  bool angle_gauge = false;
  double angle_target = 0.0;
  VecX rot_row_packed;
  if (bd.rot) {
    const double rx = setup.y_ref(bx), ry = setup.y_ref(by);
    if (rx * rx + ry * ry > kTinyRadius) {
      angle_gauge = true;
      angle_target = std::atan2(ry, rx);
    } else {
      rot_row_packed = bd.a1 * setup.y_ref;
    }
  }

  NewtonResult out;
  out.z = setup.z;
  out.nu = setup.nu;
  out.l0 = setup.l0;
  out.l1 = setup.l1;

  VecX r(nw);
  for (int iter = 0; iter <= opts.max_newton; ++iter) {
    const VecX y = B * out.z;
    FourierLoop loop = unpack_loop(y, dim, L, out.nu);
    CMatX fc;
    try {
      fc = fourier_residual(loop, out.nu, sys);
    } catch (const std::domain_error&) {
      out.collided = true;
      out.residual = std::numeric_limits<double>::infinity();
      out.iters = iter;
      return out;
    }
    VecX fp(bd.D);
    fp.head(dim) = fc.col(0).real();
    for (int l = 1; l <= L; ++l) {
      fp.segment(re_offset(dim, l), dim) = fc.col(l).real();
      fp.segment(im_offset(dim, l), dim) = fc.col(l).imag();
    }
    const VecX a0y = bd.a0 * y;
    const VecX a1y = bd.a1 * y;
    fp += out.l0 * a0y;
    if (bd.rot) fp += out.l1 * a1y;

    r.head(ds) = B.transpose() * fp;
    int row = ds;
    r(row++) = y(ir1) - phase_target;
    if (bd.rot) {
      if (angle_gauge)
        r(row) = wrap_pi(std::atan2(y(by), y(bx)) - angle_target);
      else
        r(row) = rot_row_packed.dot(y - setup.y_ref);
      ++row;
    }
    if (setup.extra == ExtraRow::amplitude) {
      r(row++) = y(rr1) - setup.amp_target;
    } else if (setup.extra == ExtraRow::arclength) {
      VecX w(nw);
      w.head(ds) = out.z;
      if (setup.free_nu) w(col_nu) = out.nu;
      w(col_l0) = out.l0;
      if (bd.rot) w(col_l1) = out.l1;
      r(row++) = setup.tau.dot(w - setup.w_pred);
    }

    out.residual = r.lpNorm<Eigen::Infinity>();
    out.iters = iter;
    if (!std::isfinite(out.residual)) return out;
    if (out.residual <= opts.tol) {
      out.converged = true;
      return out;
    }
    if (iter == opts.max_newton) return out;

    MatX jp;
    try {
      jp = fourier_jacobian(loop, out.nu, sys);
    } catch (const std::domain_error&) {
      out.collided = true;
      return out;
    }
    jp += out.l0 * bd.a0;
    if (bd.rot) jp += out.l1 * bd.a1;

    MatX A = MatX::Zero(nw, nw);
    A.topLeftCorner(ds, ds) = B.transpose() * (jp * B);
    if (setup.free_nu) {
      VecX dfdnu = VecX::Zero(bd.D);
      const MatX kmat = sys.mass.asDiagonal() * bd.gmat;
      for (int l = 1; l <= L; ++l) {
        const int ro = re_offset(dim, l);
        const int io = im_offset(dim, l);
        const VecX a = y.segment(ro, dim);
        const VecX b = y.segment(io, dim);
        const double w2 = 2.0 * l * l * out.nu;
        const double cor = 2.0 * l * sys.sqrt_omega;
        dfdnu.segment(ro, dim) =
            w2 * sys.mass.cwiseProduct(a) + cor * (kmat * b);
        dfdnu.segment(io, dim) =
            w2 * sys.mass.cwiseProduct(b) - cor * (kmat * a);
      }
      A.block(0, col_nu, ds, 1) = B.transpose() * dfdnu;
    }
    A.block(0, col_l0, ds, 1) = B.transpose() * a0y;
    if (bd.rot) A.block(0, col_l1, ds, 1) = B.transpose() * a1y;

    int arow = ds;
    A.row(arow++).head(ds) = B.row(ir1);
    if (bd.rot) {
      if (angle_gauge) {
        const double rx = y(bx), ry = y(by);
        const double r2 = rx * rx + ry * ry;
        if (r2 < kTinyRadius) {
          out.residual = std::numeric_limits<double>::infinity();
          return out;
        }
        A.row(arow).head(ds) =
            (-ry / r2) * B.row(bx) + (rx / r2) * B.row(by);
      } else {
        A.row(arow).head(ds) = rot_row_packed.transpose() * B;
      }
      ++arow;
    }
    if (setup.extra == ExtraRow::amplitude) {
      A.row(arow++).head(ds) = B.row(rr1);
    } else if (setup.extra == ExtraRow::arclength) {
      A.row(arow++) = setup.tau.transpose();
    }

    const VecX delta = A.colPivHouseholderQr().solve(-r);
    if (!delta.allFinite()) return out;
    out.z += delta.head(ds);
    if (setup.free_nu) out.nu += delta(col_nu);
    out.l0 += delta(col_l0);
    if (bd.rot) out.l1 += delta(col_l1);
  }
  return out;
}

BranchPoint point_from(const Border& bd, const NewtonResult& nr, double arclength) {
  BranchPoint pt;
  pt.loop = unpack_loop(bd.pb->basis * nr.z, bd.dim, bd.L, nr.nu);
  pt.lambda0 = nr.l0;
  pt.lambda1 = nr.l1;
  pt.arclength = arclength;
  pt.residual = nr.residual;
  pt.newton_iters = nr.iters;
  return pt;
}

VecX w_of(const Border& bd, const NewtonResult& nr) {
  const int nw = bd.ds + 1 + bd.multipliers();
  VecX w(nw);
  w.head(bd.ds) = nr.z;
  w(bd.ds) = nr.nu;
  w(bd.ds + 1) = nr.l0;
  if (bd.rot) w(bd.ds + 2) = nr.l1;
  return w;
}

int pick_pin(const CVecX& c1, int current) {
  int best = 0;
  double top = 0.0;
  for (int i = 0; i < c1.size(); ++i) {
    if (std::abs(c1(i)) > top) {
      top = std::abs(c1(i));
      best = i;
    }
  }
  if (current >= 0 && current < c1.size() &&
      std::abs(c1(current)) >= 0.1 * top)
    return current;
  return best;
}

double min_grid_separation(const FourierLoop& loop, const LoopSystem& sys) {
  const int np = quadrature_points(loop.L);
  const auto root = unit_roots(np);
  const MatX xs = sample_grid(loop.c, loop.L, root);
  double best = std::numeric_limits<double>::infinity();
  for (int q = 0; q < np; ++q)
    best = std::min(best, sys.separation(xs.col(q)));
  return best;
}

}  // namespace

Branch branch_from_event(const LoopSystem& sys, const VecX& equilibrium,
                         const SpectralBlock& block, const BifurcationEvent& event,
                         const ContinuationOptions& opts) {
  if (equilibrium.size() != sys.dim)
    throw std::invalid_argument("equilibrium dimension does not match the system");
  if (event.block_id != block.id)
    throw std::invalid_argument("event does not belong to the given block");
  if (event.kernel.size() != block.basis.cols())
    throw std::invalid_argument("event kernel does not match the block size");

  Branch br;
  br.label = event.label;
  br.origin = event;

  PeriodicProblem pb = make_problem(sys, event.label, opts.L);
  Border bd(pb);
  const MatX& B = pb.basis;
  const int dim = sys.dim;

  CVecX phi = block.basis * event.kernel;
  const double phin = phi.norm();
  if (phin < 1e-12)
    throw std::invalid_argument("event kernel direction is numerically zero");
  phi /= phin;

  const double eps0 = std::clamp(opts.eps0, 1e-4, 1e-2);
  for (int attempt = 0; attempt <= 4; ++attempt) {
    const double eps = eps0 / double(1 << attempt);

    FourierLoop seed = make_loop(dim, pb.L, event.nu0);
    seed.c.col(0) = equilibrium.cast<Complex>();
    seed.c.col(1) = eps * phi;
    VecX z = B.transpose() * pack_loop(seed);
    VecX y = B * z;

    CVecX c1 = y.segment(re_offset(dim, 1), dim) +
               Complex(0, 1) * y.segment(im_offset(dim, 1), dim);
    if (c1.norm() < 0.25 * eps)
      throw std::invalid_argument(
          "event kernel leaves the symmetry class of its label");
    const int pin = pick_pin(c1, -1);
    const double alpha = std::arg(c1(pin));
    FourierLoop rotated = unpack_loop(y, dim, pb.L, event.nu0);
    for (int l = 1; l <= pb.L; ++l)
      rotated.c.col(l) *= std::polar(1.0, -double(l) * alpha);
    c1 = rotated.c.col(1);
    rotated.c.col(1) = c1 * (eps / c1.norm());
    const double amp = rotated.c(pin, 1).real();
    z = B.transpose() * pack_loop(rotated);
    y = B * z;

    NewtonSetup setup;
    setup.z = z;
    setup.nu = event.nu0;
    setup.y_ref = y;
    setup.pin = pin;
    setup.free_nu = true;
    setup.extra = ExtraRow::amplitude;
    setup.amp_target = amp;
    NewtonResult first = bordered_newton(bd, setup, opts);
    if (!first.converged) continue;

    // Seed the second point by scaling mode l like amplitude^l.
    FourierLoop grown = unpack_loop(B * first.z, dim, pb.L, first.nu);
    for (int l = 1; l <= pb.L; ++l)
      grown.c.col(l) *= double(1 << std::min(l, 30));
    NewtonSetup second;
    second.z = B.transpose() * pack_loop(grown);
    second.nu = first.nu;
    second.y_ref = B * second.z;
    second.pin = pick_pin(grown.c.col(1), pin);
    second.free_nu = true;
    second.extra = ExtraRow::amplitude;
    second.amp_target = 2.0 * amp;
    NewtonResult secondr = bordered_newton(bd, second, opts);
    if (!secondr.converged) continue;

    br.points.push_back(point_from(bd, first, 0.0));
    br.points.push_back(
        point_from(bd, secondr, (w_of(bd, secondr) - w_of(bd, first)).norm()));
    return br;
  }
  br.termination = Termination::corrector_failure;
  return br;
}

void continue_branch(Branch& branch, const LoopSystem& sys,
                     const std::vector<VecX>& known_equilibria, int max_steps,
                     const ContinuationOptions& opts) {
  if (branch.points.size() < 2) {
    if (branch.termination == Termination::none)
      branch.termination = Termination::corrector_failure;
    return;
  }
  const int L = branch.points.back().loop.L;
  PeriodicProblem pb = make_problem(sys, branch.label, L);
  Border bd(pb);
  const MatX& B = pb.basis;
  const int dim = sys.dim;

  const auto as_result = [&](const BranchPoint& pt) {
    NewtonResult nr;
    nr.z = B.transpose() * pack_loop(pt.loop);
    nr.nu = pt.loop.nu;
    nr.l0 = pt.lambda0;
    nr.l1 = pt.lambda1;
    return nr;
  };
  NewtonResult prev = as_result(branch.points[branch.points.size() - 2]);
  NewtonResult cur = as_result(branch.points.back());
  double s = branch.points.back().arclength;
  double h = opts.h0;
  int pin = pick_pin(branch.points.back().loop.c.col(1), -1);
  bool armed =
      loop_amplitude(branch.points.back().loop) > 3.0 * opts.equilibrium_tol;

  for (int step = 0; step < max_steps; ++step) {
    VecX tau = w_of(bd, cur) - w_of(bd, prev);
    const double tn = tau.norm();
    if (tn < 1e-14) {
      branch.termination = Termination::corrector_failure;
      return;
    }
    tau /= tn;

    bool accepted = false;
    bool collided = false;
    while (true) {
      const VecX w_pred = w_of(bd, cur) + h * tau;
      const VecX z_pred = w_pred.head(bd.ds);
      const VecX y_pred = B * z_pred;
      FourierLoop pred = unpack_loop(y_pred, dim, L, w_pred(bd.ds));
      pin = pick_pin(pred.c.col(1), pin);

      NewtonSetup setup;
      setup.z = z_pred;
      setup.nu = w_pred(bd.ds);
      setup.l0 = w_pred(bd.ds + 1);
      setup.l1 = bd.rot ? w_pred(bd.ds + 2) : 0.0;
      setup.y_ref = y_pred;
      setup.pin = pin;
      setup.free_nu = true;
      setup.extra = ExtraRow::arclength;
      setup.tau = tau;
      setup.w_pred = w_pred;
      NewtonResult next = bordered_newton(bd, setup, opts);
      if (next.converged && next.nu > 0.0) {
        s += (w_of(bd, next) - w_of(bd, cur)).norm();
        branch.points.push_back(point_from(bd, next, s));
        if (next.iters <= 5)
          h = std::min(2.0 * h, opts.h_max);
        else if (next.iters >= 15)
          h = std::max(0.5 * h, opts.h_min);
        prev = cur;
        cur = next;
        accepted = true;
        break;
      }
      collided = next.collided;
      if (next.converged && next.nu <= 0.0) {
        branch.termination = Termination::period_blowup;
        return;
      }
      h *= 0.5;
      if (h < opts.h_min) {
        branch.termination =
            collided ? Termination::collision_approach : Termination::corrector_failure;
        return;
      }
    }
    if (!accepted) continue;

    const BranchPoint& pt = branch.points.back();
    const VecX y = pack_loop(pt.loop);
    if (y.norm() > opts.norm_stop) {
      branch.termination = Termination::norm_blowup;
      return;
    }
    if (2.0 * M_PI / pt.loop.nu > opts.period_stop) {
      branch.termination = Termination::period_blowup;
      return;
    }
    if (min_grid_separation(pt.loop, sys) < 10.0 * kCollisionEps) {
      branch.termination = Termination::collision_approach;
      return;
    }
    const double amp = loop_amplitude(pt.loop);
    if (amp > 3.0 * opts.equilibrium_tol) armed = true;
    if (armed && amp < opts.equilibrium_tol) {
      const VecX mean = pt.loop.c.col(0).real();
      for (const VecX& eq : known_equilibria) {
        if (eq.size() == mean.size() &&
            (mean - eq).norm() < opts.equilibrium_tol) {
          branch.termination = Termination::equilibrium_return;
          return;
        }
      }
    }
  }
  branch.termination = Termination::max_steps;
}

BranchPoint correct_loop(const FourierLoop& guess, const PeriodicProblem& problem,
                         const ContinuationOptions& opts) {
  if (guess.dim != problem.system.dim || guess.L != problem.L)
    throw std::invalid_argument("guess does not match the problem layout");
  Border bd(problem);
  const MatX& B = problem.basis;

  NewtonSetup setup;
  setup.z = B.transpose() * pack_loop(guess);
  setup.nu = guess.nu;
  setup.y_ref = B * setup.z;
  const CVecX c1 = guess.c.col(1);
  setup.pin = pick_pin(c1, problem.pin);
  setup.free_nu = false;
  setup.extra = ExtraRow::none;
  NewtonResult nr = bordered_newton(bd, setup, opts);
  return point_from(bd, nr, 0.0);
}

}  // namespace ringbif
