#pragma once

// Experiment configuration: one JSON file per experiment, versioned schema.
// Only output_dir and seed may be overridden from the command line, so the
// manifest's config echo stays authoritative.

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "eulab/dynamics.hpp"
#include "eulab/sha256.hpp"

namespace eulab {

struct ExperimentConfig {
  int schema_version = 1;
  std::uint64_t seed = 1;
  std::string output_dir;

  int grid_n = 64;

  double nu = 0.0;
  double sigma = 1.0;
  double dt_max = 0.01;
  double cfl = 0.3;

  double noise_t_min = -2.0;
  double noise_t_max = 2.0;
  double noise_dt = 0.01;

  std::string forcing_kind = "autonomous";
  double forcing_amplitude = 0.0;
  int forcing_modes = 2;
  double forcing_rate = 1.0;

  std::string variant;  // simulate | sweep-nu | bounds | attractor | autonomy

  // simulate
  double t_start = 0.0;
  double t_end = 1.0;
  double record_interval = 0.05;
  std::string initial_kind = "band_limited";  // band_limited | zero
  double initial_amplitude = 1.0;             // target max speed
  int initial_modes = 8;
  bool keep_states = false;

  // sweep-nu
  std::vector<double> nu_list;

  // bounds
  std::string trajectory_dir;
  std::vector<double> p_list{2, 4, 8, 16, 32};

  // attractor / autonomy
  int ensemble = 16;
  double radius_v = 1.0;
  double radius_curl_inf = 10.0;
  std::vector<double> horizons{1, 2, 4, 8};
  double attractor_time = 0.0;
  double t_trunc = 8.0;
  std::vector<double> autonomy_times{2, 6, 10};

  nlohmann::json raw;

  std::string hash() const { return sha256_hex(raw.dump()); }
};

class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig c;
  c.raw = j;
  try {
    c.schema_version = j.at("schema_version").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
    const auto& grid = j.at("grid");
    c.grid_n = grid.at("n").get<int>();
    const auto& solver = j.at("solver");
    c.nu = solver.value("nu", 0.0);
    c.sigma = solver.value("sigma", 1.0);
    c.dt_max = solver.value("dt_max", 0.01);
    c.cfl = solver.value("cfl", 0.3);
    const auto& noise = j.at("noise");
    c.noise_t_min = noise.at("t_min").get<double>();
    c.noise_t_max = noise.at("t_max").get<double>();
    c.noise_dt = noise.at("dt").get<double>();
    const auto& forcing = j.at("forcing");
    c.forcing_kind = forcing.at("kind").get<std::string>();
    c.forcing_amplitude = forcing.value("amplitude", 0.0);
    c.forcing_modes = forcing.value("modes", 2);
    c.forcing_rate = forcing.value("rate", 1.0);
    const auto& exp = j.at("experiment");
    c.variant = exp.at("variant").get<std::string>();
    c.t_start = exp.value("t_start", 0.0);
    c.t_end = exp.value("t_end", 1.0);
    c.record_interval = exp.value("record_interval", 0.05);
    c.keep_states = exp.value("keep_states", false);
    if (exp.contains("initial")) {
      const auto& init = exp.at("initial");
      c.initial_kind = init.value("kind", std::string("band_limited"));
      c.initial_amplitude = init.value("amplitude", 1.0);
      c.initial_modes = init.value("modes", 8);
    }
    if (exp.contains("nu_list")) c.nu_list = exp.at("nu_list").get<std::vector<double>>();
    if (exp.contains("trajectory_dir"))
      c.trajectory_dir = exp.at("trajectory_dir").get<std::string>();
    if (exp.contains("p_list")) c.p_list = exp.at("p_list").get<std::vector<double>>();
    c.ensemble = exp.value("ensemble", 16);
    c.radius_v = exp.value("radius_v", 1.0);
    c.radius_curl_inf = exp.value("radius_curl_inf", 10.0);
    if (exp.contains("horizons")) c.horizons = exp.at("horizons").get<std::vector<double>>();
    c.attractor_time = exp.value("time", 0.0);
    c.t_trunc = exp.value("t_trunc", 8.0);
    if (exp.contains("times")) c.autonomy_times = exp.at("times").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigParseError(std::string("config parse error: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigParseError("config parse error in " + path + " at byte " +
                           std::to_string(e.byte) + ": " + e.what());
  }
  return parse_config(j);
}

/// Returns all violations (empty list = valid). Never runs a simulation; the
/// viscosity ceiling check measures the static trace constant of the grid.
inline std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> out;
  auto fail = [&](const std::string& msg) { out.push_back(msg); };

  if (c.schema_version != 1)
    fail("unrecognized schema_version " + std::to_string(c.schema_version));
  if (c.grid_n < 3) fail("grid.n must be at least 3");
  if (c.output_dir.empty()) fail("output_dir must be set");
  if (!(c.cfl > 0.0 && c.cfl < 1.0)) fail("solver.cfl must lie in (0, 1)");
  if (!(c.dt_max > 0.0)) fail("solver.dt_max must be positive");
  if (c.nu < 0.0) fail("solver.nu must be non-negative");
  if (c.sigma < 0.0) fail("solver.sigma must be non-negative");
  if (!(c.noise_dt > 0.0)) fail("noise.dt must be positive");
  if (c.noise_t_min > 0.0 || c.noise_t_max < 0.0) fail("noise window must contain t = 0");
  if (c.noise_t_min >= c.noise_t_max) fail("noise window is empty");

  if (c.forcing_kind != "autonomous" && c.forcing_kind != "decaying_to_autonomous" &&
      c.forcing_kind != "zero")
    fail("forcing.kind must be autonomous, decaying_to_autonomous or zero");
  if (c.forcing_kind == "decaying_to_autonomous" && !(c.forcing_rate > 0.0))
    fail("forcing.rate must be positive for decaying_to_autonomous");

  auto check_nu_ceiling = [&](double nu) {
    if (nu <= 0.0 || c.grid_n < 3) return;
    if (c.sigma <= 0.0) {
      fail("viscous runs need sigma > 0: the noise-dominance positivity requirement "
           "sigma^2/2 - 2 nu C_trace > sigma^2/4 cannot hold with sigma = 0");
      return;
    }
    double ct = calibrate_trace_constant(Grid(c.grid_n));
    double nu0 = nu_ceiling(c.sigma, ct);
    if (nu > nu0)
      fail("nu = " + std::to_string(nu) +
           " violates the noise-dominance positivity requirement sigma^2/2 - 2 nu C_trace > "
           "sigma^2/4 (nu0 = " +
           std::to_string(nu0) + " with measured C_trace = " + std::to_string(ct) + ")");
  };

  double horizon_floor = c.noise_t_min;
  double horizon_ceil = c.noise_t_max;
  auto check_window = [&](double a, double b, const std::string& what) {
    if (a < horizon_floor - 1e-9 || b > horizon_ceil + 1e-9)
      fail(what + " [" + std::to_string(a) + ", " + std::to_string(b) +
           "] falls outside the noise window [" + std::to_string(horizon_floor) + ", " +
           std::to_string(horizon_ceil) + "]");
  };

  if (c.variant == "simulate") {
    if (c.t_start > c.t_end) fail("experiment.t_start must not exceed t_end");
    check_nu_ceiling(c.nu);
    check_window(c.t_start, c.t_end, "simulation span");
  } else if (c.variant == "sweep-nu") {
    if (c.nu_list.empty()) fail("sweep-nu needs experiment.nu_list");
    for (double nu : c.nu_list) {
      if (nu < 0.0) fail("nu_list entries must be non-negative");
      check_nu_ceiling(nu);
    }
    for (std::size_t k = 1; k < c.nu_list.size(); ++k)
      if (c.nu_list[k] >= c.nu_list[k - 1]) fail("nu_list must decrease");
    check_window(c.t_start, c.t_end, "simulation span");
  } else if (c.variant == "bounds") {
    if (c.trajectory_dir.empty()) fail("bounds needs experiment.trajectory_dir");
    for (double p : c.p_list)
      if (p < 2.0 || p > 64.0) fail("p_list entries must lie in [2, 64]");
  } else if (c.variant == "attractor") {
    if (c.ensemble < 1) fail("ensemble must be positive");
    if (c.horizons.empty()) fail("attractor needs experiment.horizons");
    for (std::size_t k = 1; k < c.horizons.size(); ++k)
      if (c.horizons[k] <= c.horizons[k - 1]) fail("horizons must increase");
    if (!c.horizons.empty())
      check_window(c.attractor_time - c.horizons.back(), c.attractor_time, "pullback span");
    if (!(c.t_trunc > 0.0)) fail("t_trunc must be positive");
    if (c.attractor_time - c.t_trunc < c.noise_t_min - 1e-9)
      fail("t_trunc reaches beyond the noise window");
    check_nu_ceiling(c.nu);
  } else if (c.variant == "autonomy") {
    if (c.ensemble < 1) fail("ensemble must be positive");
    if (c.autonomy_times.empty()) fail("autonomy needs experiment.times");
    for (std::size_t k = 1; k < c.autonomy_times.size(); ++k)
      if (c.autonomy_times[k] <= c.autonomy_times[k - 1]) fail("times must increase");
    if (c.horizons.empty()) fail("autonomy needs experiment.horizons");
    if (c.forcing_kind != "decaying_to_autonomous" && c.forcing_kind != "autonomous")
      fail("autonomy needs a forcing family with an autonomous limit");
    if (!c.autonomy_times.empty() && !c.horizons.empty()) {
      check_window(c.autonomy_times.front() - c.horizons.back(), c.autonomy_times.back(),
                   "autonomy span");
    }
    check_nu_ceiling(c.nu);
  } else {
    fail("unknown experiment.variant '" + c.variant + "'");
  }
  return out;
}

inline ForcingSpec make_forcing(const ExperimentConfig& c, Grid grid) {
  if (c.forcing_kind == "zero" || c.forcing_amplitude == 0.0) return make_zero_forcing(grid);
  ForcingKind kind = c.forcing_kind == "decaying_to_autonomous"
                         ? ForcingKind::decaying_to_autonomous
                         : ForcingKind::autonomous;
  return make_band_limited_forcing(grid, kind, c.forcing_amplitude, c.forcing_modes,
                                   c.forcing_rate);
}

inline ForcingSpec make_autonomous_limit(const ExperimentConfig& c, Grid grid) {
  if (c.forcing_kind == "zero" || c.forcing_amplitude == 0.0) return make_zero_forcing(grid);
  return make_band_limited_forcing(grid, ForcingKind::autonomous, c.forcing_amplitude,
                                   c.forcing_modes, c.forcing_rate);
}

inline SolverConfig make_solver_config(const ExperimentConfig& c) {
  SolverConfig s;
  s.nu = c.nu;
  s.sigma = c.sigma;
  s.grid = Grid(c.grid_n);
  s.dt_max = c.dt_max;
  s.cfl = c.cfl;
  return s;
}

/// Initial physical vorticity for simulate-style experiments: band-limited
/// sample rescaled so the initial max speed equals the requested amplitude.
inline ScalarField make_initial_vorticity(const ExperimentConfig& c, Grid grid) {
  if (c.initial_kind == "zero" || c.initial_amplitude == 0.0) return ScalarField(grid);
  ScalarField rho = band_limited_vorticity(grid, c.initial_modes, derive_seed(c.seed, 9000));
  VectorField vel = velocity_from_vorticity(rho);
  double vmax = norm_linf(vel);
  if (vmax > 0.0) scale_in_place(rho, c.initial_amplitude / vmax);
  return rho;
}

}  // namespace eulab
