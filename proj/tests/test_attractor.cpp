#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "eulab/attractor.hpp"

using namespace eulab;

namespace {

OuPath constant_ou(double value, double t0, double t1, double dt) {
  OuPath y;
  y.t0 = t0;
  y.dt = dt;
  y.values.assign(static_cast<std::size_t>(std::llround((t1 - t0) / dt)) + 1, value);
  return y;
}

SolverConfig basic_cfg(int n, double sigma = 1.0) {
  SolverConfig cfg;
  cfg.grid = Grid(n);
  cfg.sigma = sigma;
  cfg.nu = 0.0;
  cfg.dt_max = 0.02;
  cfg.cfl = 0.3;
  return cfg;
}

CloudPoint point_from(const PoissonSolver& solver, ScalarField rho) {
  CloudPoint p;
  p.vel = velocity_from_vorticity(solver, rho);
  p.rho = std::move(rho);
  return p;
}

}  // namespace

TEST_CASE("initial family respects its declared radii") {
  Grid g(48);
  InitialFamily fam = make_initial_family(g, 6, 2.0, 15.0, 71);
  PoissonSolver solver(g);
  for (const auto& rho : fam.members_rho) {
    VectorField vel = velocity_from_vorticity(solver, rho);
    REQUIRE(norm_h1(vel) <= 2.0 * (1 + 1e-9));
    REQUIRE(norm_linf(rho) <= 15.0 * (1 + 1e-9));
    // one radius binds exactly
    bool v_binds = std::abs(norm_h1(vel) - 2.0) <= 2e-9;
    bool i_binds = std::abs(norm_linf(rho) - 15.0) <= 15e-9;
    REQUIRE((v_binds || i_binds));
  }
}

TEST_CASE("hausdorff semi-distance") {
  Grid g(24);
  PoissonSolver solver(g);
  std::vector<CloudPoint> A, B;
  for (int k = 0; k < 4; ++k)
    A.push_back(point_from(solver, band_limited_vorticity(g, 4, 200 + k)));
  B = {A[0], A[1]};

  SECTION("identical clouds: zero") { REQUIRE(hausdorff_semidistance(A, A) == 0.0); }
  SECTION("subset direction vanishes, superset direction does not") {
    REQUIRE(hausdorff_semidistance(B, A) == 0.0);
    REQUIRE(hausdorff_semidistance(A, B) > 0.0);
  }
  SECTION("singletons reduce to the plain distance") {
    std::vector<CloudPoint> a{A[0]}, b{A[1]};
    VectorField d = A[0].vel - A[1].vel;
    REQUIRE(hausdorff_semidistance(a, b) == Catch::Approx(norm_l2(d)).epsilon(1e-14));
  }
  SECTION("triangle-type bound on random clouds") {
    std::vector<CloudPoint> C;
    for (int k = 0; k < 3; ++k)
      C.push_back(point_from(solver, band_limited_vorticity(g, 4, 300 + k)));
    double ac = hausdorff_semidistance(A, C);
    double ab = hausdorff_semidistance(A, B);
    double bc = hausdorff_semidistance(B, C);
    REQUIRE(ac <= ab + bc + 1e-14);
  }
  SECTION("empty clouds rejected") {
    std::vector<CloudPoint> empty;
    REQUIRE_THROWS_AS(hausdorff_semidistance(empty, A), std::invalid_argument);
  }
}

TEST_CASE("absorbing radii") {
  Grid g(32);
  SECTION("zero forcing gives zero radii") {
    ForcingSpec spec = make_zero_forcing(g);
    OuPath y = constant_ou(0.0, -12.0, 1.0, 0.05);
    AbsorbingRadii r = absorbing_radii(0.0, y, spec, 1.0, 8.0);
    REQUIRE(r.L1 == 0.0);
    REQUIRE(r.L2 == 0.0);
  }
  SECTION("flat-noise harness matches the closed form") {
    ForcingSpec spec = make_band_limited_forcing(g, ForcingKind::autonomous, 0.4, 2);
    OuPath y = constant_ou(0.0, -20.0, 1.0, 0.01);
    double sigma = 1.0, T = 10.0;
    AbsorbingRadii r = absorbing_radii(0.0, y, spec, sigma, T);
    double F1 = spec.f_inf_l2 * spec.f_inf_l2 + spec.curl_f_inf_l2 * spec.curl_f_inf_l2;
    double s2 = 0.5 * sigma * sigma;
    double exact1 = 2.0 * F1 * (1.0 - std::exp(-s2 * T)) / s2 + r.tail1;
    REQUIRE(r.L1 == Catch::Approx(exact1).epsilon(1e-3));
    double F2 = spec.curl_f_inf_linf;
    double exact2 = 2.0 * F2 * (1.0 - std::exp(-s2 * T)) / s2 + r.tail2;
    REQUIRE(r.L2 == Catch::Approx(exact2).epsilon(1e-3));
  }
  SECTION("doubling the horizon moves the value by less than the tail bound") {
    ForcingSpec spec = make_band_limited_forcing(g, ForcingKind::autonomous, 0.4, 2);
    WienerPath w = sample_wiener(-40.0, 1.0, 0.02, 61);
    OuPath y = ou_from_wiener(w);
    AbsorbingRadii a = absorbing_radii(0.0, y, spec, 1.0, 16.0);
    AbsorbingRadii b = absorbing_radii(0.0, y, spec, 1.0, 32.0);
    REQUIRE(std::abs(b.L1 - a.L1) <= a.tail1);
    REQUIRE(std::abs(b.L2 - a.L2) <= a.tail2);
  }
  SECTION("horizon beyond the noise window is rejected") {
    ForcingSpec spec = make_zero_forcing(g);
    OuPath y = constant_ou(0.0, -4.0, 1.0, 0.05);
    REQUIRE_THROWS_AS(absorbing_radii(0.0, y, spec, 1.0, 8.0), std::out_of_range);
  }
}

TEST_CASE("pullback estimate") {
  SolverConfig cfg = basic_cfg(32);
  ForcingSpec spec = make_zero_forcing(cfg.grid);
  WienerPath w = sample_wiener(-10.0, 1.0, 0.01, 5);
  OuPath y = ou_from_wiener(w);

  SECTION("singleton family has zero diameter at every depth") {
    InitialFamily fam = make_initial_family(cfg.grid, 1, 0.5, 10.0, 3);
    AttractorEstimate est = pullback_estimate(0.0, y, fam, {1, 2, 4}, cfg, spec);
    for (double d : est.diameters) REQUIRE(d == 0.0);
  }
  SECTION("contracting dynamics shrinks the diameters") {
    InitialFamily fam = make_initial_family(cfg.grid, 5, 0.5, 10.0, 3);
    AttractorEstimate est = pullback_estimate(0.0, y, fam, {1, 2, 4, 8}, cfg, spec);
    CAPTURE(est.diameters);
    for (std::size_t k = 1; k < est.diameters.size(); ++k)
      REQUIRE(est.diameters[k] < est.diameters[k - 1]);
    REQUIRE(est.diam_delta == est.diameters.back());
    for (bool b : est.blowup) REQUIRE_FALSE(b);
  }
  SECTION("diameter is permutation invariant") {
    InitialFamily fam = make_initial_family(cfg.grid, 5, 0.5, 10.0, 3);
    InitialFamily shuffled = fam;
    std::rotate(shuffled.members_rho.begin(), shuffled.members_rho.begin() + 2,
                shuffled.members_rho.end());
    AttractorEstimate a = pullback_estimate(0.0, y, fam, {1, 2}, cfg, spec);
    AttractorEstimate b = pullback_estimate(0.0, y, shuffled, {1, 2}, cfg, spec);
    REQUIRE(a.diam_delta == b.diam_delta);
  }
  SECTION("horizons must increase and stay inside the window") {
    InitialFamily fam = make_initial_family(cfg.grid, 2, 0.5, 10.0, 3);
    REQUIRE_THROWS_AS(pullback_estimate(0.0, y, fam, {2, 1}, cfg, spec),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(pullback_estimate(0.0, y, fam, {1, 50}, cfg, spec),
                      std::invalid_argument);
  }
}

TEST_CASE("autonomous estimate agrees bitwise under the grid-aligned shift") {
  // dyadic times keep every time computation exact, so the shifted run
  // reproduces the original step schedule bit for bit
  SolverConfig cfg = basic_cfg(33);
  cfg.dt_max = 0.00390625;  // 2^-8
  ForcingSpec spec = make_band_limited_forcing(cfg.grid, ForcingKind::autonomous, 1e-4, 2);
  WienerPath w = sample_wiener(-16.0, 16.0, 0.125, 23);
  OuPath y = ou_from_wiener(w);
  InitialFamily fam = make_initial_family(cfg.grid, 3, 1e-3, 0.05, 7);

  double t = 2.0;
  AttractorEstimate at_t = autonomous_estimate(y, fam, {0.5, 1.0}, cfg, spec, t);
  AttractorEstimate at_0 = autonomous_estimate(ou_shift(y, t), fam, {0.5, 1.0}, cfg, spec, 0.0);
  REQUIRE(at_t.diameters == at_0.diameters);
  for (std::size_t m = 0; m < at_t.points.size(); ++m)
    REQUIRE(at_t.points[m].rho.data == at_0.points[m].rho.data);
}

TEST_CASE("autonomous estimate collapses to the origin without forcing") {
  SolverConfig cfg = basic_cfg(32);
  ForcingSpec spec = make_zero_forcing(cfg.grid);
  WienerPath w = sample_wiener(-10.0, 1.0, 0.01, 29);
  OuPath y = ou_from_wiener(w);
  InitialFamily fam = make_initial_family(cfg.grid, 4, 0.5, 10.0, 17);
  AttractorEstimate est = autonomous_estimate(y, fam, {4, 8}, cfg, spec, 0.0);
  REQUIRE(est.diameters[1] < est.diameters[0]);
  for (std::size_t m = 0; m < est.points.size(); ++m) {
    REQUIRE_FALSE(est.blowup[m]);
    REQUIRE(norm_l2(est.points[m].vel) < 0.25);  // deep-pullback decay toward 0
  }
}

TEST_CASE("autonomous estimate requires autonomous forcing") {
  SolverConfig cfg = basic_cfg(32);
  ForcingSpec spec =
      make_band_limited_forcing(cfg.grid, ForcingKind::decaying_to_autonomous, 0.1, 2, 1.0);
  OuPath y = constant_ou(0.0, -4.0, 1.0, 0.1);
  InitialFamily fam = make_initial_family(cfg.grid, 2, 0.5, 10.0, 3);
  REQUIRE_THROWS_AS(autonomous_estimate(y, fam, {1}, cfg, spec), std::invalid_argument);
}

TEST_CASE("invariance diagnostic stays near the ensemble floor") {
  SolverConfig cfg = basic_cfg(32);
  ForcingSpec spec = make_band_limited_forcing(cfg.grid, ForcingKind::autonomous, 0.05, 2);
  WienerPath w = sample_wiener(-10.0, 2.0, 0.01, 37);
  OuPath y = ou_from_wiener(w);
  InitialFamily fam = make_initial_family(cfg.grid, 8, 0.5, 10.0, 11);

  AttractorEstimate c0 = autonomous_estimate(y, fam, {2, 4, 8}, cfg, spec, 0.0);
  AttractorEstimate c1 = autonomous_estimate(y, fam, {2, 4, 8}, cfg, spec, 1.0);
  // push the time-0 cloud forward one unit and compare against the time-1 cloud
  PoissonSolver solver(cfg.grid);
  std::vector<CloudPoint> pushed;
  double y1 = y.value(1.0);
  for (std::size_t m = 0; m < c0.points.size(); ++m) {
    if (c0.blowup[m]) continue;
    VorticityState u = make_state(solver, c0.points[m].rho, 0.0);
    TrajectoryRecord run = evolve(u, 0.0, 1.0, y, spec, cfg, {1.0, false});
    CloudPoint p;
    p.rho = run.final_state.rho;
    p.vel = run.final_state.vel;
    scale_in_place(p.rho, std::exp(cfg.sigma * y1));
    scale_in_place(p.vel, std::exp(cfg.sigma * y1));
    pushed.push_back(std::move(p));
  }
  std::vector<CloudPoint> target;
  for (std::size_t m = 0; m < c1.points.size(); ++m)
    if (!c1.blowup[m]) target.push_back(c1.points[m]);
  double dist = hausdorff_semidistance(pushed, target);
  double floor = ensemble_noise_floor(target);
  INFO("invariance distance " << dist << " vs ensemble floor " << floor);
  CHECK_NOFAIL(dist <= 2.0 * floor);  // soft: finite clouds cannot be exactly invariant
  REQUIRE(dist < 10.0 * std::max(floor, 1e-12));
}

TEST_CASE("autonomy sweep") {
  SolverConfig cfg = basic_cfg(32);
  WienerPath w = sample_wiener(-10.0, 4.0, 0.01, 51);
  OuPath y = ou_from_wiener(w);
  InitialFamily fam = make_initial_family(cfg.grid, 4, 0.5, 10.0, 13);
  ForcingSpec spec_auto = make_band_limited_forcing(cfg.grid, ForcingKind::autonomous, 0.01, 2);

  SECTION("identical dynamics yields exactly zero distance") {
    AutonomyReport rep =
        asymptotic_autonomy_sweep({1.0, 2.0}, y, fam, cfg, spec_auto, spec_auto, {1, 2});
    for (const auto& row : rep.rows) REQUIRE(row.distance == 0.0);
  }
  SECTION("decaying transient forcing approaches the autonomous system") {
    // the transient shrinks by e^{-3} between evaluation times, well clear of
    // the pathwise envelope fluctuation
    ForcingSpec spec_na = make_band_limited_forcing(
        cfg.grid, ForcingKind::decaying_to_autonomous, 0.01, 2, 1.0);
    AutonomyReport rep =
        asymptotic_autonomy_sweep({0.0, 3.0}, y, fam, cfg, spec_na, spec_auto, {2});
    CAPTURE(rep.rows[0].distance, rep.rows[1].distance);
    REQUIRE(rep.decreasing);
    REQUIRE(rep.rows.front().distance > 0.0);
  }
}

TEST_CASE("forward convergence diagnostic decays with the start time") {
  SolverConfig cfg = basic_cfg(32);
  WienerPath w = sample_wiener(-20.0, 2.0, 0.01, 67);
  OuPath y = ou_from_wiener(w);
  ForcingSpec spec_na =
      make_band_limited_forcing(cfg.grid, ForcingKind::decaying_to_autonomous, 0.02, 2, 1.0);
  ForcingSpec spec_auto = make_band_limited_forcing(cfg.grid, ForcingKind::autonomous, 0.02, 2);
  PoissonSolver solver(cfg.grid);
  ScalarField base = band_limited_vorticity(cfg.grid, 4, 81);
  scale_in_place(base, 0.3 / norm_linf(velocity_from_vorticity(solver, base)));
  ScalarField pert = band_limited_vorticity(cfg.grid, 4, 82);
  scale_in_place(pert, 0.2 / norm_linf(pert));
  std::vector<double> dists =
      forward_convergence_diagnostic({2.0, 4.0, 8.0, 16.0}, 1.0, y, base, cfg, spec_na,
                                     spec_auto, pert);
  CAPTURE(dists);
  for (std::size_t k = 1; k < dists.size(); ++k) REQUIRE(dists[k] < dists[k - 1]);
}
