#include "ringbif/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "ringbif/continuation.hpp"
#include "ringbif/equilibria.hpp"
#include "ringbif/spectral.hpp"
#include "ringbif/symmetry.hpp"
#include "ringbif/verification.hpp"

namespace ringbif {

namespace {

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string label_string(const IsotropyLabel& label) {
  switch (label.kind) {
    case IsotropyKind::PlanarZnk:
      return "planar-z" + std::to_string(label.n) + "k" + std::to_string(label.k);
    case IsotropyKind::SpatialZnk:
      return "spatial-z" + std::to_string(label.n) + "k" + std::to_string(label.k);
    default:
      return to_string(label.kind);
  }
}

std::ofstream open_table(const RunConfig& cfg, const std::string& name,
                         std::string* full_path = nullptr) {
  std::filesystem::create_directories(cfg.out);
  const auto path = std::filesystem::path(cfg.out) / name;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  if (full_path) *full_path = path.string();
  return f;
}

ScanOptions scan_options(const RunConfig& cfg) {
  ScanOptions so;
  so.nu_min = cfg.nu_min;
  so.nu_max = cfg.nu_max;
  so.step = cfg.nu_step;
  so.refine = cfg.refine_tol;
  return so;
}

struct EventRow {
  int eq = -1;  // equilibrium index; -1 for the ring problem
  SpectralBlock block;
  BifurcationEvent event;
};

const SpectralBlock& block_by_id(const std::vector<SpectralBlock>& blocks,
                                 const std::string& id) {
  for (const auto& b : blocks)
    if (b.id == id) return b;
  throw std::logic_error("scan produced an event for an unknown block");
}

std::vector<EventRow> enumerate_events(const RunConfig& cfg,
                                       std::vector<EquilibriumPoint>* eqs_out = nullptr) {
  const ScanOptions so = scan_options(cfg);
  const RingConfiguration ring = maxwell_ring(cfg.n, cfg.mu);
  std::vector<EventRow> rows;
  if (cfg.problem == ProblemKind::nbody) {
    const auto blocks = ring_blocks(ring);
    for (const auto& ev : scan_bifurcations(blocks, so))
      rows.push_back({-1, block_by_id(blocks, ev.block_id), ev});
  } else {
    const SatelliteSystem sat = satellite_system_over_ring(ring);
    const auto eqs = find_satellite_equilibria(ring, cfg.grid);
    for (size_t i = 0; i < eqs.size(); ++i) {
      const auto blocks = satellite_blocks(eqs[i].u, sat);
      for (const auto& ev : scan_bifurcations(blocks, so))
        rows.push_back({static_cast<int>(i), block_by_id(blocks, ev.block_id), ev});
    }
    if (eqs_out) *eqs_out = eqs;
  }
  return rows;
}

void write_event_rows(std::ofstream& f, const std::vector<EventRow>& rows) {
  f << "# schema_version=1\n"
    << "eq,block,k,spatial,label,nu0,width,index_left,index_right,eta,"
       "resonant,structural\n";
  for (const auto& r : rows) {
    const auto& e = r.event;
    f << r.eq << ',' << e.block_id << ',' << e.k << ',' << (e.spatial ? 1 : 0)
      << ',' << label_string(e.label) << ',' << fmt(e.nu0) << ',' << fmt(e.width)
      << ',' << e.index_left << ',' << e.index_right << ',' << e.eta << ','
      << (e.resonant ? 1 : 0) << ',' << (e.structural ? 1 : 0) << '\n';
  }
}

}  // namespace

int cmd_ring(const RunConfig& cfg, std::ostream& os) {
  const RingConfiguration ring = maxwell_ring(cfg.n, cfg.mu);
  os << "ring n=" << ring.n << " mu=" << fmt(ring.mu) << "\n"
     << "s1 = " << fmt(ring.s1) << "\n"
     << "omega = " << fmt(ring.omega) << "\n"
     << "residual = " << fmt(ring_residual(ring)) << "\n";
  for (int j = 0; j < ring.n; ++j)
    os << "body " << j + 1 << ": " << fmt(ring.positions[j].x()) << " "
       << fmt(ring.positions[j].y()) << "\n";
  return 0;
}

int cmd_equilibria(const RunConfig& cfg, std::ostream& os) {
  if (cfg.problem != ProblemKind::satellite)
    throw std::domain_error(
        "the equilibria command applies to the satellite problem; the ring "
        "itself is printed by the ring command");
  const RingConfiguration ring = maxwell_ring(cfg.n, cfg.mu);
  const auto eqs = find_satellite_equilibria(ring, cfg.grid);

  std::string path;
  auto f = open_table(cfg, "equilibria.csv", &path);
  f << "# schema_version=1\n"
    << "index,orbit_id,orbit_size,label,ux,uy,trace,det,morse_index,"
       "grad_norm,planar_criterion\n";
  for (size_t i = 0; i < eqs.size(); ++i) {
    const auto& p = eqs[i];
    // Degenerate points carry no event-count prediction; -1 marks them.
    const int predicted =
        std::abs(p.det) > 1e-8 ? planar_criterion(p.trace, p.det) : -1;
    f << i << ',' << p.orbit_id << ',' << p.orbit_size << ','
      << to_string(p.label) << ',' << fmt(p.u.x()) << ',' << fmt(p.u.y()) << ','
      << fmt(p.trace) << ',' << fmt(p.det) << ',' << p.morse_index << ','
      << fmt(p.grad_norm) << ',' << predicted << '\n';
  }
  os << eqs.size() << " equilibrium orbits -> " << path << "\n";
  return 0;
}

int cmd_scan(const RunConfig& cfg, std::ostream& os) {
  const auto rows = enumerate_events(cfg);
  std::string path;
  auto f = open_table(cfg, "events.csv", &path);
  write_event_rows(f, rows);
  os << rows.size() << " events -> " << path << "\n";

  if (cfg.problem == ProblemKind::nbody && cfg.mu_sweep_count > 0) {
    std::string spath;
    auto sf = open_table(cfg, "sweep.csv", &spath);
    sf << "# schema_version=1\n"
       << "mu,k,spatial,nu0,eta\n";
    const ScanOptions so = scan_options(cfg);
    for (int i = 0; i < cfg.mu_sweep_count; ++i) {
      const double t = cfg.mu_sweep_count == 1
                           ? 0.0
                           : double(i) / (cfg.mu_sweep_count - 1);
      const double mu =
          cfg.mu_sweep_min * std::pow(cfg.mu_sweep_max / cfg.mu_sweep_min, t);
      const auto blocks = ring_blocks(maxwell_ring(cfg.n, mu));
      for (const auto& ev : scan_bifurcations(blocks, so))
        sf << fmt(mu) << ',' << ev.k << ',' << (ev.spatial ? 1 : 0) << ','
           << fmt(ev.nu0) << ',' << ev.eta << '\n';
    }
    os << cfg.mu_sweep_count << " sweep values -> " << spath << "\n";
  }
  return 0;
}

int cmd_continue(const RunConfig& cfg, std::ostream& os) {
  std::vector<EquilibriumPoint> eqs;
  const auto rows = enumerate_events(cfg, &eqs);
  if (rows.empty()) throw std::domain_error("the scan found no events to continue");
  if (cfg.event >= static_cast<int>(rows.size()))
    throw std::domain_error("event index " + std::to_string(cfg.event) +
                            " out of range: the scan found " +
                            std::to_string(rows.size()) + " events");
  const EventRow& row = rows[cfg.event];

  const RingConfiguration ring = maxwell_ring(cfg.n, cfg.mu);
  ContinuationOptions copts;
  copts.L = effective_L(cfg);
  copts.eps0 = cfg.eps0;
  copts.tol = cfg.newton_tol;
  copts.h0 = cfg.h0;

  LoopSystem ls;
  VecX equilibrium;
  std::vector<VecX> known;
  SatelliteSystem sat;
  BodySystem nb;
  if (cfg.problem == ProblemKind::nbody) {
    nb = body_system(ring);
    ls = loop_system(nb);
    equilibrium = ring_state(ring);
    known.push_back(equilibrium);
  } else {
    sat = satellite_system_over_ring(ring);
    ls = loop_system(sat);
    for (const auto& p : eqs) {
      for (const Vec2& u : orbit_points(p, ring)) {
        VecX e(3);
        e << u.x(), u.y(), 0.0;
        known.push_back(e);
      }
    }
    equilibrium = VecX(3);
    equilibrium << eqs[row.eq].u.x(), eqs[row.eq].u.y(), 0.0;
  }

  Branch branch = branch_from_event(ls, equilibrium, row.block, row.event, copts);
  if (!branch.points.empty())
    continue_branch(branch, ls, known, cfg.steps, copts);

  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["problem"] = to_string(cfg.problem);
  doc["n"] = cfg.n;
  doc["mu"] = cfg.mu;
  doc["event"] = {{"index", cfg.event},
                  {"eq", row.eq},
                  {"block", row.event.block_id},
                  {"k", row.event.k},
                  {"spatial", row.event.spatial},
                  {"nu0", row.event.nu0},
                  {"eta", row.event.eta},
                  {"resonant", row.event.resonant},
                  {"structural", row.event.structural}};
  doc["label"] = label_string(branch.label);
  doc["L"] = copts.L;
  doc["termination"] = to_string(branch.termination);
  doc["points"] = nlohmann::ordered_json::array();

  for (const auto& pt : branch.points) {
    nlohmann::ordered_json jp;
    jp["arclength"] = pt.arclength;
    jp["nu"] = pt.loop.nu;
    jp["period"] = 2.0 * M_PI / pt.loop.nu;
    jp["lambda0"] = pt.lambda0;
    jp["lambda1"] = pt.lambda1;
    jp["residual"] = pt.residual;
    jp["newton_iters"] = pt.newton_iters;
    jp["amplitude"] = loop_amplitude(pt.loop);
    jp["symmetry_residual"] = symmetry_residual(pt.loop, branch.label);
    double closure = -1.0;  // -1: integration aborted near a collision
    try {
      closure = cfg.problem == ProblemKind::nbody
                    ? closure_error(pt.loop, nb, cfg.closure_dt)
                    : closure_error(pt.loop, sat, cfg.closure_dt);
    } catch (const std::domain_error&) {
    }
    jp["closure_error"] = closure;
    auto modes = nlohmann::ordered_json::array();
    for (int l = 0; l <= pt.loop.L; ++l) {
      auto mode = nlohmann::ordered_json::array();
      for (int i = 0; i < pt.loop.dim; ++i)
        mode.push_back({pt.loop.c(i, l).real(), pt.loop.c(i, l).imag()});
      modes.push_back(std::move(mode));
    }
    jp["c"] = std::move(modes);
    doc["points"].push_back(std::move(jp));
  }

  std::string path;
  auto f = open_table(cfg, "branch.json", &path);
  f << doc.dump(1) << "\n";
  os << "branch: " << branch.points.size() << " points, termination "
     << to_string(branch.termination) << " -> " << path << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& os) {
  const OracleReport report = oracle_suite(maxwell_ring(cfg.n, cfg.mu), cfg.seed);
  std::string path;
  auto f = open_table(cfg, "verify.csv", &path);
  f << "# schema_version=1\n"
    << "name,pass,measured,threshold\n";
  for (const auto& c : report.checks) {
    f << c.name << ',' << (c.pass ? 1 : 0) << ',' << fmt(c.measured) << ','
      << fmt(c.threshold) << '\n';
    os << (c.pass ? "PASS " : "FAIL ") << c.name << "  measured=" << fmt(c.measured)
       << " threshold=" << fmt(c.threshold) << "\n";
  }
  os << (report.all_pass ? "all checks passed" : "verification FAILED") << " -> "
     << path << "\n";
  return report.all_pass ? 0 : 3;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& os) {
  try {
    if (name == "ring") return cmd_ring(cfg, os);
    if (name == "equilibria") return cmd_equilibria(cfg, os);
    if (name == "scan") return cmd_scan(cfg, os);
    if (name == "continue") return cmd_continue(cfg, os);
    if (name == "verify") return cmd_verify(cfg, os);
    os << "error: unknown command '" << name << "'\n";
    return 2;
  } catch (const std::exception& e) {
    os << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ringbif
