// Experiment driver for the coupled two-state Schrodinger laboratory.
// Subcommands run one experiment each, fully determined by a config file;
// reruns with the same config produce byte-identical outputs.
//
// Exit codes: 0 success, 1 config/usage error, 2 property-check
// counterexample, 3 numerical-tolerance warning.

#include <CLI11.hpp>

#include "tss/carleman.hpp"
#include "tss/coefficients.hpp"
#include "tss/config.hpp"
#include "tss/forward.hpp"
#include "tss/geometry.hpp"
#include "tss/inverse.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCounterexample = 2;
constexpr int kExitWarning = 3;

std::filesystem::path output_dir(const tss::ExperimentConfig& cfg) {
  const char* env = std::getenv("TSSLAB_OUTPUT_DIR");
  std::filesystem::path dir = env && *env ? env : cfg.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

tss::TwoStateField initial_state(const tss::SpatialGrid& grid, const tss::ExperimentConfig& cfg,
                                 const tss::ProbeSuite& probes, int* probe_index) {
  *probe_index = -1;
  if (cfg.initial == "eigenmode") {
    tss::TwoStateField u0 = tss::TwoStateField::zero(grid);
    const auto& dom = grid.domain();
    for (int node = 0; node < grid.num_nodes(); ++node) {
      const auto x = grid.coords(node);
      double v = std::sin(M_PI * (x[0] - dom.lo[0]) / (dom.hi[0] - dom.lo[0]));
      if (grid.dim() == 2) {
        v *= std::sin(M_PI * (x[1] - dom.lo[1]) / (dom.hi[1] - dom.lo[1]));
      }
      u0.up[node] = v;
    }
    return u0;
  }
  if (cfg.initial.rfind("probe", 0) == 0) {
    const int k = std::stoi(cfg.initial.substr(5)) - 1;
    if (k < 0 || k >= static_cast<int>(probes.probes.size())) {
      throw tss::ConfigError("forward.initial: no such probe '" + cfg.initial + "'");
    }
    *probe_index = k;
    return probes.probes[k].u0;
  }
  throw tss::ConfigError("forward.initial: expected 'eigenmode' or 'probeK', got '" +
                         cfg.initial + "'");
}

int cmd_forward(const tss::ExperimentConfig& cfg, bool mms) {
  const tss::SpatialGrid grid = cfg.make_grid();
  const tss::CoefficientSet baseline = cfg.make_baseline(grid);
  const auto dir = output_dir(cfg);

  const tss::TimeGrid tg = tss::TimeGrid::forward(cfg.domain.time_horizon, cfg.steps);
  const tss::ProbeSuite probes =
      tss::build_probes(grid, baseline, cfg.alpha, cfg.order, tg);

  int probe_index = -1;
  const tss::TwoStateField u0 = initial_state(grid, cfg, probes, &probe_index);
  const tss::BoundaryData g = probe_index >= 0 ? probes.probes[probe_index].g
                                               : tss::BoundaryData::zero(grid, tg);

  const tss::TwoStateTrajectory traj =
      tss::solve_ibvp(grid, baseline, u0, g, nullptr, cfg.dt(), cfg.steps);
  tss::write_trajectory((dir / "trajectory.csv").string(), grid, traj);

  const tss::ObservationBoundary obs = tss::select_observation_boundary(grid, cfg.weights.x0);
  tss::write_observation((dir / "observation.csv").string(), tss::observe(grid, traj, obs));

  const double n0 = tss::l2_norm(grid, traj.states.front());
  double drift = 0.0;
  for (const auto& s : traj.states) {
    drift = std::max(drift, std::abs(tss::l2_norm(grid, s) - n0));
  }
  const double rel_drift = n0 > 0 ? drift / n0 : 0.0;

  std::ofstream diag(dir / "diagnostics.txt");
  diag << "initial = " << cfg.initial << "\n";
  diag << "l2_norm_initial = " << fmt(n0) << "\n";
  diag << "norm_drift_rel = " << fmt(rel_drift) << "\n";
  std::cout << "forward: norm drift (relative) = " << fmt(rel_drift) << "\n";

  const bool zero_coeffs = cfg.p0 == 0 && cfg.qplus0 == 0 && cfg.qminus0 == 0 &&
                           cfg.a0[0] == 0 && cfg.a0[1] == 0;
  if (cfg.initial == "eigenmode" && zero_coeffs) {
    // analytic phase of the lowest Dirichlet mode
    double kap2 = std::pow(M_PI / (cfg.domain.hi[0] - cfg.domain.lo[0]), 2);
    if (grid.dim() == 2) kap2 += std::pow(M_PI / (cfg.domain.hi[1] - cfg.domain.lo[1]), 2);
    tss::ComplexField ref = u0.up;
    const tss::Complex phase = std::exp(tss::Complex(0, -kap2 * cfg.domain.time_horizon));
    double err = grid.l2_norm(tss::ComplexField(traj.states.back().up - phase * ref));
    diag << "eigenmode_l2_error = " << fmt(err) << "\n";
    std::cout << "forward: eigenmode L2 error = " << fmt(err) << "\n";
  }

  if (mms) {
    tss::ManufacturedCase mc{cfg.domain, cfg.a0, cfg.p0, cfg.qplus0, cfg.qminus0};
    const std::array<int, 2> base{
        std::min(cfg.nodes[0], grid.dim() == 2 ? 21 : 41),
        std::min(cfg.nodes[1], grid.dim() == 2 ? 21 : 41)};
    const tss::MmsStudy study = manufactured_convergence(mc, base, 40, 3);
    diag << "mms_errors =";
    for (double e : study.errors) diag << " " << fmt(e);
    diag << "\nmms_orders =";
    for (double o : study.orders) diag << " " << fmt(o);
    diag << "\n";
    std::cout << "forward: manufactured-solution orders =";
    for (double o : study.orders) std::cout << " " << fmt(o);
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_carleman_scan(const tss::ExperimentConfig& cfg) {
  const tss::SpatialGrid grid = cfg.make_grid();
  const auto dir = output_dir(cfg);
  const tss::TimeGrid tg =
      tss::TimeGrid::symmetric_open(cfg.domain.time_horizon, cfg.weight_time_cells);
  const tss::CarlemanWeights weights = tss::CarlemanWeights::build(grid, cfg.weights, tg);
  const tss::ObservationBoundary obs = tss::select_observation_boundary(grid, cfg.weights.x0);

  const auto family = tss::make_scan_family(grid, tg, cfg.family_size, cfg.family_seed);
  const auto rows = tss::empirical_constant_scan(weights, family, cfg.s_values, obs);
  tss::write_scan_csv((dir / "carleman_scan.csv").string(), rows);

  bool counterexample = false;
  for (const auto& row : rows) {
    std::cout << "s = " << fmt(row.s) << "  worst lhs/rhs = " << fmt(row.worst_ratio)
              << "  (member " << row.argmax_id << ")\n";
    counterexample = counterexample || row.counterexample;
  }
  if (counterexample) {
    std::cerr << "carleman-scan: counterexample candidate (rhs = 0 with lhs > 0); "
                 "inspect the discretization\n";
    return kExitCounterexample;
  }
  return kExitOk;
}

int cmd_stability(const tss::ExperimentConfig& cfg, bool weighted) {
  const tss::SpatialGrid grid = cfg.make_grid();
  const tss::CoefficientSet baseline = cfg.make_baseline(grid);
  const auto dir = output_dir(cfg);

  const tss::TimeGrid tg = tss::TimeGrid::forward(cfg.domain.time_horizon, cfg.steps);
  const tss::ProbeSuite probes = tss::build_probes(grid, baseline, cfg.alpha, cfg.order, tg);
  const tss::ObservationBoundary obs = tss::select_observation_boundary(grid, cfg.weights.x0);

  const auto rows = tss::stability_scaling_study(grid, baseline, cfg.amplitudes, cfg.seeds,
                                                 probes, obs, cfg.dt(), cfg.steps);
  tss::write_stability_csv((dir / "stability.csv").string(), rows);

  bool counterexample = false;
  double worst = 0.0;
  for (const auto& row : rows) {
    if (row.ratio) worst = std::max(worst, *row.ratio);
    if (row.lhs > 0.0 && row.rhs_raw == 0.0) counterexample = true;
  }
  std::cout << "stability: " << rows.size() << " rows, worst finite ratio = " << fmt(worst)
            << "\n";

  if (weighted) {
    // weighted trace functionals at the smallest scan s, reported alongside
    const tss::TimeGrid wtg =
        tss::TimeGrid::symmetric_open(cfg.domain.time_horizon, cfg.weight_time_cells);
    const tss::CarlemanWeights weights = tss::CarlemanWeights::build(grid, cfg.weights, wtg);
    const double s = cfg.s_values.front();
    std::ofstream os(dir / "stability_weighted.csv");
    os << "seed,amplitude,mu_weighted,s\n";
    for (double a : cfg.amplitudes) {
      for (auto seed : cfg.seeds) {
        const tss::CoefficientSet pert =
            tss::sample_admissible_perturbation(grid, baseline, a, seed);
        double mu = 0.0;
        for (const auto& probe : probes.probes) {
          const auto t1 = tss::solve_ibvp(grid, pert, probe.u0, probe.g, nullptr, cfg.dt(),
                                          cfg.steps);
          const auto t2 = tss::solve_ibvp(grid, baseline, probe.u0, probe.g, nullptr, cfg.dt(),
                                          cfg.steps);
          mu += tss::weighted_mu(weights, s, tss::observe(grid, t1, obs),
                                 tss::observe(grid, t2, obs), obs);
        }
        os << seed << ',' << fmt(a) << ',' << fmt(mu) << ',' << fmt(s) << '\n';
      }
    }
  }
  return counterexample ? kExitCounterexample : kExitOk;
}

int cmd_reconstruct(const tss::ExperimentConfig& cfg) {
  const tss::SpatialGrid grid = cfg.make_grid();
  const tss::CoefficientSet baseline = cfg.make_baseline(grid);
  const auto dir = output_dir(cfg);

  const tss::TimeGrid tg = tss::TimeGrid::forward(cfg.domain.time_horizon, cfg.steps);
  const tss::ProbeSuite probes = tss::build_probes(grid, baseline, cfg.alpha, cfg.order, tg);
  const tss::CoefficientSet perturbed =
      tss::sample_admissible_perturbation(grid, baseline, cfg.recon_amplitude, cfg.recon_seed);

  std::vector<tss::TwoStateField> snapshots;
  for (const auto& probe : probes.probes) {
    snapshots.push_back(tss::snapshot_v0(grid, perturbed, baseline, probe, cfg.dt()));
  }
  const tss::ReconstructionResult rec = tss::linearized_reconstruct(grid, snapshots, probes);
  const tss::ReconstructionErrors err = tss::reconstruction_errors(grid, rec, perturbed, baseline);

  tss::CoefficientSet delta = tss::zero_coefficients(grid, baseline.bound);
  delta.p = rec.p;
  delta.qplus = rec.qplus;
  delta.qminus = rec.qminus;
  delta.A1 = rec.A[0];
  if (grid.dim() == 2) delta.A2 = rec.A[1];
  tss::write_coefficients((dir / "recovered_delta.csv").string(), grid, delta);

  std::ofstream os(dir / "reconstruction_summary.txt");
  auto line = [&](const std::string& k, double v) {
    os << k << " = " << fmt(v) << "\n";
    std::cout << "reconstruct: " << k << " = " << fmt(v) << "\n";
  };
  line("rel_err_p", err.p);
  line("rel_err_qplus", err.qplus);
  line("rel_err_qminus", err.qminus);
  line("rel_err_A1", err.A[0]);
  if (grid.dim() == 2) line("rel_err_A2", err.A[1]);
  line("p_crosscheck_rel", rec.p_crosscheck_rel);
  line("A1_crosscheck_rel", rec.A_crosscheck_rel[0]);
  if (grid.dim() == 2) line("A2_crosscheck_rel", rec.A_crosscheck_rel[1]);
  line("imag_residual_rel", rec.imag_residual_rel);

  double cross = std::max(rec.p_crosscheck_rel, rec.A_crosscheck_rel[0]);
  if (grid.dim() == 2) cross = std::max(cross, rec.A_crosscheck_rel[1]);
  if (cross > cfg.crosscheck_tol) {
    std::cerr << "reconstruct: cross-checks diverge beyond tolerance ("
              << fmt(cross) << " > " << fmt(cfg.crosscheck_tol)
              << "); the discretization is too coarse\n";
    return kExitWarning;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled two-state Schrodinger laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  bool mms = false, weighted = false;

  auto add_cmd = [&](const std::string& name, const std::string& desc) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->add_option("config", config_path, "experiment config file")->required();
    return cmd;
  };

  CLI::App* forward = add_cmd("forward", "solve the forward problem, write diagnostics");
  forward->add_flag("--mms", mms, "run the manufactured-solution convergence study");
  CLI::App* scan = add_cmd("carleman-scan", "empirical constants of the weighted inequality");
  CLI::App* stability = add_cmd("stability", "probe-suite stability study over seeds/amplitudes");
  stability->add_flag("--weighted", weighted, "also write the weighted trace functionals");
  CLI::App* reconstruct = add_cmd("reconstruct", "linearized coefficient recovery");
  CLI::App* validate = add_cmd("validate-config", "parse and validate a config file");

  CLI11_PARSE(app, argc, argv);

  try {
    const tss::ExperimentConfig cfg = tss::ExperimentConfig::parse(config_path);
    if (validate->parsed()) {
      std::cout << "config OK: " << config_path << "\n";
      return kExitOk;
    }
    if (forward->parsed()) return cmd_forward(cfg, mms);
    if (scan->parsed()) return cmd_carleman_scan(cfg);
    if (stability->parsed()) return cmd_stability(cfg, weighted);
    if (reconstruct->parsed()) return cmd_reconstruct(cfg);
  } catch (const tss::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
