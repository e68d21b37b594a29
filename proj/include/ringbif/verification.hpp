#pragma once

// Independent numerical checks.  Everything here deliberately avoids the
// analytic machinery it is checking: derivatives are re-derived by central
// differences, mode spectra by a dense eigensolver on the unreduced matrix,
// and periodic orbits by direct time integration of the equations of
// motion.  Time is the rescaled loop time throughout, so one period is
// always 2 pi and dt is a fraction of that.

#include <string>
#include <vector>

#include "ringbif/dynamics.hpp"
#include "ringbif/equilibria.hpp"
#include "ringbif/symmetry.hpp"
#include "ringbif/types.hpp"

namespace ringbif {

struct IntegrationReport {
  State final;
  double t_end = 0.0;               // time actually reached
  double energy_drift = 0.0;        // max |E(t) - E(0)|
  double angular_momentum_drift = 0.0;  // n-body runs only; 0 otherwise
  bool collision = false;
  std::vector<double> times;   // decimated trajectory, final state included
  std::vector<State> samples;
};

// Fixed-step RK4.  Stops early (collision = true) when bodies come within
// ten collision radii of each other, or when one step would cross a quarter
// of the closest separation (the encounter is no longer resolved at this
// dt).  max_samples > 0 keeps a decimated trajectory; 0 keeps endpoints
// only.
IntegrationReport integrate(const State& s0, double nu, double t_end, double dt,
                            const SatelliteSystem& sys, int max_samples = 0);
IntegrationReport integrate(const State& s0, double nu, double t_end, double dt,
                            const BodySystem& sys, int max_samples = 0);

// Distance between the loop's initial state and the state reached by
// integrating one period.  The n-body variant first quotients out the
// planar frame rotation (the closed-form optimal rotation of the final
// state onto the initial one).
double closure_error(const FourierLoop& loop, const SatelliteSystem& sys, double dt);
double closure_error(const FourierLoop& loop, const BodySystem& sys, double dt);

// Central finite differences, the oracle for every analytic derivative.
template <class F>
VecX fd_gradient(F&& f, const VecX& x, double h = 1e-5) {
  VecX g(x.size());
  VecX p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    double fp = f(p);
    p[i] = x[i] - h;
    double fm = f(p);
    p[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

template <class F>
MatX fd_jacobian(F&& f, const VecX& x, double h = 1e-5) {
  VecX p = x;
  p[0] = x[0] + h;
  VecX probe = f(p);
  p[0] = x[0];
  MatX j(probe.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    VecX fp = f(p);
    p[i] = x[i] - h;
    VecX fm = f(p);
    p[i] = x[i];
    j.col(i) = (fp - fm) / (2.0 * h);
  }
  return j;
}

struct OracleCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool all_pass = false;
};

// Cross-checks the analytic building blocks on one ring (needs mu > 0):
// gradients and Hessians against finite differences, the equilibrium
// residual, Hessian equivariance, block spectra against the dense mode
// matrix, and RK4 conservation/order on a perturbed ring trajectory.
OracleReport oracle_suite(const RingConfiguration& cfg, unsigned seed = 12345);

}  // namespace ringbif
