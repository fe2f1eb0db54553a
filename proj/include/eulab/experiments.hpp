#pragma once

// Experiment runner: executes a validated configuration, writes the CSV/JSON
// artifacts with fixed column contracts, and stamps everything with the
// config hash. Identical config and seed give byte-identical numeric output.

#include <chrono>
#include <filesystem>

#include "eulab/attractor.hpp"
#include "eulab/bounds.hpp"
#include "eulab/config.hpp"
#include "eulab/io.hpp"
#include "eulab/version.hpp"

namespace eulab {

enum class ExitCode : int {
  ok = 0,
  violation = 1,
  invalid_config = 2,
  blowup = 3,
  io_error = 4,
};

struct RunResult {
  ExitCode code = ExitCode::ok;
  std::string message;
  std::vector<std::string> artifacts;
};

namespace detail {

inline OuPath build_noise(const ExperimentConfig& c, WienerPath* w_out = nullptr) {
  WienerPath w = sample_wiener(c.noise_t_min, c.noise_t_max, c.noise_dt, c.seed);
  OuPath y = ou_from_wiener(w);
  if (w_out) *w_out = w;
  return y;
}

inline void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& c,
                           const RunResult& result, double wall_s,
                           const nlohmann::json& extra = {}) {
  nlohmann::json m;
  m["config"] = c.raw;
  m["config_hash"] = c.hash();
  m["code_version"] = kVersion;
  m["wall_time_s"] = wall_s;
  m["exit_code"] = static_cast<int>(result.code);
  if (!result.message.empty()) m["message"] = result.message;
  m["artifacts"] = result.artifacts;
  if (!extra.is_null() && !extra.empty()) m["extra"] = extra;
  io::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace detail

inline RunResult run_simulate(const ExperimentConfig& c, const std::filesystem::path& dir) {
  RunResult res;
  std::string hash = c.hash();
  SolverConfig scfg = make_solver_config(c);
  ForcingSpec spec = make_forcing(c, scfg.grid);
  WienerPath w;
  OuPath y = detail::build_noise(c, &w);
  ScalarField rho_u = make_initial_vorticity(c, scfg.grid);
  PoissonSolver solver(scfg.grid);
  VorticityState u = make_state(solver, std::move(rho_u), c.t_start);
  RecordOptions rec;
  rec.interval = c.record_interval;
  rec.keep_states = false;
  TrajectoryRecord traj = evolve(u, c.t_start, c.t_end, y, spec, scfg, rec);
  io::save_trajectory_csv(dir / "trajectory.csv", traj, hash);
  io::save_noise_csv(dir / "ou_path.csv", w, y, hash);
  if (c.keep_states) io::save_field(dir / "final_rho.bin", traj.final_state.rho, hash);
  res.artifacts = {"trajectory.csv", "ou_path.csv"};
  if (c.keep_states) res.artifacts.push_back("final_rho.bin");
  res.message = "simulated " + std::to_string(traj.step_count) + " steps";
  return res;
}

inline RunResult run_sweep_nu(const ExperimentConfig& c, const std::filesystem::path& dir) {
  RunResult res;
  std::string hash = c.hash();
  SolverConfig scfg = make_solver_config(c);
  ForcingSpec spec = make_forcing(c, scfg.grid);
  OuPath y = detail::build_noise(c);
  ScalarField rho_u = make_initial_vorticity(c, scfg.grid);
  ViscositySweepReport rep = vanishing_viscosity_sweep(
      rho_u, c.nu_list, scfg, y, spec, c.t_start, c.t_end - c.t_start, c.record_interval);
  io::CsvDoc doc;
  doc.meta["config_hash"] = hash;
  doc.meta["non_increasing"] = rep.non_increasing ? "1" : "0";
  doc.header = {"nu", "error_h", "error_rate", "blowup"};
  for (std::size_t k = 0; k < rep.nus.size(); ++k)
    doc.rows.push_back(
        {rep.nus[k], rep.errors[k], rep.error_rate[k], rep.blowup[k] ? 1.0 : 0.0});
  doc.save(dir / "sweep.csv");
  res.artifacts = {"sweep.csv"};
  for (bool b : rep.blowup)
    if (b) {
      res.code = ExitCode::blowup;
      res.message = "one or more viscosities blew up";
    }
  return res;
}

inline RunResult run_bounds(const ExperimentConfig& c, const std::filesystem::path& dir) {
  RunResult res;
  std::string hash = c.hash();
  std::filesystem::path tdir(c.trajectory_dir);
  TrajectoryRecord traj = io::load_trajectory_csv(tdir / "trajectory.csv");
  nlohmann::json stored =
      nlohmann::json::parse(io::read_text(tdir / "manifest.json"));
  ExperimentConfig source = parse_config(stored.at("config"));
  ForcingSpec spec = make_forcing(source, traj.cfg.grid);
  traj.cfg.cfl = source.cfl;
  traj.cfg.dt_max = source.dt_max;

  Calibration cal = calibrate(traj.cfg.grid, traj.cfg.sigma);
  BoundCheckReport energy = check_energy_bound(traj, spec, cal.energy_c);
  BoundCheckReport enstrophy = check_enstrophy_bound(traj, spec);
  BoundCheckReport linf = check_vorticity_linf(traj, spec);
  BoundCheckReport lp = check_vorticity_lp(traj, c.p_list, cal.lp_c);
  io::save_report_csv(dir / "report_energy.csv", energy, hash);
  io::save_report_csv(dir / "report_enstrophy.csv", enstrophy, hash);
  io::save_report_csv(dir / "report_linf.csv", linf, hash);
  io::save_report_csv(dir / "report_lp.csv", lp, hash);

  nlohmann::json summary;
  summary["config_hash"] = hash;
  summary["source_config_hash"] = stored.value("config_hash", "");
  summary["calibration"] = {{"energy_c", cal.energy_c},
                            {"lp_c", cal.lp_c},
                            {"trace_c", cal.trace_c},
                            {"grad_curl_c", cal.grad_curl_c},
                            {"provenance", cal.provenance}};
  bool any_violation = false;
  for (const auto* rep : {&energy, &enstrophy, &linf, &lp}) {
    summary["reports"][rep->name] = {{"violated", rep->violated},
                                     {"worst_margin", rep->worst_margin},
                                     {"rel_tolerance", rep->rel_tolerance}};
    any_violation = any_violation || rep->violated;
  }
  io::write_text(dir / "bounds_summary.json", summary.dump(2) + "\n");
  res.artifacts = {"report_energy.csv", "report_enstrophy.csv", "report_linf.csv",
                   "report_lp.csv", "bounds_summary.json"};
  if (any_violation) {
    res.code = ExitCode::violation;
    res.message = "one or more bounds violated";
  }
  return res;
}

inline RunResult run_attractor(const ExperimentConfig& c, const std::filesystem::path& dir) {
  RunResult res;
  std::string hash = c.hash();
  SolverConfig scfg = make_solver_config(c);
  ForcingSpec spec = make_forcing(c, scfg.grid);
  OuPath y = detail::build_noise(c);
  InitialFamily fam = make_initial_family(scfg.grid, c.ensemble, c.radius_v,
                                          c.radius_curl_inf, derive_seed(c.seed, 500));
  AttractorEstimate est =
      pullback_estimate(c.attractor_time, y, fam, c.horizons, scfg, spec);
  AbsorbingRadii radii = absorbing_radii(c.attractor_time, y, spec, c.sigma, c.t_trunc);

  io::CsvDoc diam;
  diam.meta["config_hash"] = hash;
  diam.header = {"horizon", "diameter"};
  for (std::size_t k = 0; k < est.pullback_horizons.size(); ++k)
    diam.rows.push_back({est.pullback_horizons[k], est.diameters[k]});
  diam.save(dir / "diameters.csv");

  io::CsvDoc rad;
  rad.meta["config_hash"] = hash;
  rad.header = {"t", "L1", "L2", "tail1", "tail2"};
  rad.rows.push_back({radii.t, radii.L1, radii.L2, radii.tail1, radii.tail2});
  rad.save(dir / "radii.csv");

  std::filesystem::create_directories(dir / "cloud");
  int stored = 0;
  for (std::size_t m = 0; m < est.points.size(); ++m) {
    if (est.blowup[m]) continue;
    std::string name = "point_" + std::to_string(m) + ".bin";
    io::save_field(dir / "cloud" / name, est.points[m].rho, hash);
    res.artifacts.push_back("cloud/" + name);
    ++stored;
  }
  nlohmann::json summary;
  summary["config_hash"] = hash;
  summary["t"] = est.t;
  summary["diam_delta"] = est.diam_delta;
  summary["converged"] = est.converged;
  summary["points_stored"] = stored;
  std::vector<CloudPoint> good;
  for (std::size_t m = 0; m < est.points.size(); ++m)
    if (!est.blowup[m]) good.push_back(est.points[m]);
  summary["noise_floor"] = ensemble_noise_floor(good);
  summary["L1"] = radii.L1;
  summary["L2"] = radii.L2;
  io::write_text(dir / "attractor_summary.json", summary.dump(2) + "\n");
  for (const char* name : {"diameters.csv", "radii.csv", "attractor_summary.json"})
    res.artifacts.push_back(name);
  return res;
}

inline RunResult run_autonomy(const ExperimentConfig& c, const std::filesystem::path& dir) {
  RunResult res;
  std::string hash = c.hash();
  SolverConfig scfg = make_solver_config(c);
  ForcingSpec spec_na = make_forcing(c, scfg.grid);
  ForcingSpec spec_auto = make_autonomous_limit(c, scfg.grid);
  OuPath y = detail::build_noise(c);
  InitialFamily fam = make_initial_family(scfg.grid, c.ensemble, c.radius_v,
                                          c.radius_curl_inf, derive_seed(c.seed, 500));
  AutonomyReport rep =
      asymptotic_autonomy_sweep(c.autonomy_times, y, fam, scfg, spec_na, spec_auto, c.horizons);
  io::CsvDoc doc;
  doc.meta["config_hash"] = hash;
  doc.meta["decreasing"] = rep.decreasing ? "1" : "0";
  doc.header = {"t", "distance", "diam_nonautonomous", "diam_autonomous"};
  for (const auto& row : rep.rows)
    doc.rows.push_back({row.t, row.distance, row.diam_na, row.diam_auto});
  doc.save(dir / "autonomy.csv");
  nlohmann::json summary;
  summary["config_hash"] = hash;
  summary["decreasing"] = rep.decreasing;
  io::write_text(dir / "autonomy_summary.json", summary.dump(2) + "\n");
  res.artifacts = {"autonomy.csv", "autonomy_summary.json"};
  return res;
}

/// Validates, executes and stamps one experiment. Returns the exit status;
/// all artifacts land in the config's output_dir.
inline RunResult run_experiment(const ExperimentConfig& c) {
  auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  std::vector<std::string> violations = validate(c);
  if (!violations.empty()) {
    res.code = ExitCode::invalid_config;
    res.message = violations.front();
    return res;
  }
  std::filesystem::path dir(c.output_dir);
  try {
    std::filesystem::create_directories(dir);
    if (c.variant == "simulate") res = run_simulate(c, dir);
    else if (c.variant == "sweep-nu") res = run_sweep_nu(c, dir);
    else if (c.variant == "bounds") res = run_bounds(c, dir);
    else if (c.variant == "attractor") res = run_attractor(c, dir);
    else if (c.variant == "autonomy") res = run_autonomy(c, dir);
  } catch (const BlowupError& e) {
    res.code = ExitCode::blowup;
    res.message = std::string("blowup: ") + e.what() + " at t=" + io::fmt(e.t) +
                  " (vmax=" + io::fmt(e.vmax) + ", |rho|_inf=" + io::fmt(e.rho_linf) + ")";
  } catch (const io::IoError& e) {
    res.code = ExitCode::io_error;
    res.message = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    res.code = ExitCode::io_error;
    res.message = e.what();
  }
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    detail::write_manifest(dir, c, res, wall);
  } catch (const io::IoError& e) {
    res.code = ExitCode::io_error;
    res.message = e.what();
  }
  return res;
}

}  // namespace eulab
