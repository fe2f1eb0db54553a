#pragma once

// Numerical estimation of pullback attracting sets: a finite family of
// admissible initial states is evolved from increasingly deep starting times
// along one noise realization, and the endpoint cloud stands in for the
// attractor section. Distances and diameters live in the H (L2 velocity)
// metric; boundedness of the family is declared in the strong metric through
// the V-norm and vorticity sup-norm radii.

#include <algorithm>
#include <cmath>
#include <vector>

#include "eulab/bounds.hpp"
#include "eulab/dynamics.hpp"
#include "eulab/sampler.hpp"

namespace eulab {

/// One physical-variable endpoint.
struct CloudPoint {
  ScalarField rho;
  VectorField vel;
};

struct InitialFamily {
  std::vector<ScalarField> members_rho;  // physical vorticity fields
  double radius_v = 0.0;
  double radius_curl_inf = 0.0;
};

/// Fixed-seed band-limited family rescaled into the declared radii: every
/// member satisfies ||u||_V <= radius_v and ||curl u||_inf <= radius_curl_inf,
/// with the binding radius attained exactly.
inline InitialFamily make_initial_family(Grid grid, int count, double radius_v,
                                         double radius_curl_inf, std::uint64_t seed) {
  require(count >= 1, "family needs at least one member");
  require(radius_v > 0.0 && radius_curl_inf > 0.0, "radii must be positive");
  InitialFamily fam;
  fam.radius_v = radius_v;
  fam.radius_curl_inf = radius_curl_inf;
  PoissonSolver solver(grid);
  for (int m = 0; m < count; ++m) {
    ScalarField rho = band_limited_vorticity(grid, 8, derive_seed(seed, m));
    VectorField vel = velocity_from_vorticity(solver, rho);
    double nv = norm_h1(vel);
    double ni = norm_linf(rho);
    double scale = std::min(nv > 0 ? radius_v / nv : 0.0, ni > 0 ? radius_curl_inf / ni : 0.0);
    scale_in_place(rho, scale);
    fam.members_rho.push_back(std::move(rho));
  }
  return fam;
}

struct AttractorEstimate {
  double t = 0.0;
  std::vector<double> pullback_horizons;
  std::vector<CloudPoint> points;   // endpoints at the deepest horizon
  std::vector<bool> blowup;         // per member at the deepest horizon
  std::vector<double> diameters;    // H-metric diameter per horizon
  double diam_delta = 0.0;          // diameter at the deepest horizon
  bool converged = false;
};

namespace detail {
inline double cloud_diameter(const std::vector<CloudPoint>& pts, const std::vector<bool>& bad) {
  double diam = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    if (bad[a]) continue;
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      if (bad[b]) continue;
      VectorField d = pts[a].vel - pts[b].vel;
      diam = std::max(diam, norm_l2(d));
    }
  }
  return diam;
}
}  // namespace detail

/// Evolves every member of B from tau = t - s to t along the same noise path
/// for each pullback depth s; the returned points are the endpoints at the
/// deepest horizon. Members that blow up are flagged and excluded.
inline AttractorEstimate pullback_estimate(double t, const OuPath& ou, const InitialFamily& B,
                                           const std::vector<double>& horizons,
                                           const SolverConfig& cfg, const ForcingSpec& spec) {
  require(!horizons.empty(), "need at least one pullback depth");
  for (std::size_t k = 1; k < horizons.size(); ++k)
    require(horizons[k] > horizons[k - 1], "pullback depths must increase");
  require(t - horizons.back() >= ou.t0 - 1e-9, "deepest horizon outside the noise window");
  require(t <= ou.t_end() + 1e-9, "estimate time outside the noise window");

  const int nm = static_cast<int>(B.members_rho.size());
  const int nh = static_cast<int>(horizons.size());
  std::vector<std::vector<CloudPoint>> clouds(nh, std::vector<CloudPoint>(nm));
  std::vector<std::vector<bool>> bad(nh, std::vector<bool>(nm, false));
  const double y_t = ou.value(t);

  parallel_for(nh * nm, [&](int task) {
    int hi = task / nm;
    int mi = task % nm;
    double tau = t - horizons[hi];
    try {
      PoissonSolver solver(cfg.grid);
      VorticityState u = make_state(solver, B.members_rho[mi], tau);
      TrajectoryRecord run = evolve(u, tau, t, ou, spec, cfg, {t - tau, false});
      double c = std::exp(cfg.sigma * y_t);
      CloudPoint pt;
      pt.rho = run.final_state.rho;
      scale_in_place(pt.rho, c);
      pt.vel = run.final_state.vel;
      scale_in_place(pt.vel, c);
      clouds[hi][mi] = std::move(pt);
    } catch (const BlowupError&) {
      bad[hi][mi] = true;
    }
  });

  AttractorEstimate est;
  est.t = t;
  est.pullback_horizons = horizons;
  for (int hi = 0; hi < nh; ++hi) est.diameters.push_back(detail::cloud_diameter(clouds[hi], bad[hi]));
  est.points = std::move(clouds.back());
  est.blowup = bad.back();
  est.diam_delta = est.diameters.back();
  est.converged = true;
  for (std::size_t k = 1; k < est.diameters.size(); ++k)
    if (est.diameters[k] > est.diameters[k - 1] * (1.0 + 1e-9)) est.converged = false;
  if (est.diameters.size() >= 2) {
    double last = est.diameters.back(), prev = est.diameters[est.diameters.size() - 2];
    if (prev > 0.0 && std::abs(last - prev) >= 0.05 * prev) est.converged = false;
  }
  return est;
}

/// Estimate for the autonomous system. Anchored at time t (default 0); by the
/// shift property the estimate at time t along omega coincides with the
/// estimate at time 0 along the shifted path.
inline AttractorEstimate autonomous_estimate(const OuPath& ou, const InitialFamily& B,
                                             const std::vector<double>& horizons,
                                             const SolverConfig& cfg,
                                             const ForcingSpec& spec_autonomous,
                                             double t = 0.0) {
  require(spec_autonomous.kind == ForcingKind::autonomous,
          "autonomous estimate needs autonomous forcing");
  return pullback_estimate(t, ou, B, horizons, cfg, spec_autonomous);
}

/// Exact finite-set Hausdorff semi-distance sup_a inf_b ||a - b||_H.
inline double hausdorff_semidistance(const std::vector<CloudPoint>& A,
                                     const std::vector<CloudPoint>& B) {
  require(!A.empty() && !B.empty(), "clouds must be non-empty");
  double worst = 0.0;
  for (const auto& a : A) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : B) {
      require(a.vel.grid == b.vel.grid, "clouds live on different grids");
      VectorField d = a.vel - b.vel;
      best = std::min(best, norm_l2(d));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

/// Median nearest-neighbour distance inside a cloud; the resolution floor for
/// all soft set-valued assertions.
inline double ensemble_noise_floor(const std::vector<CloudPoint>& cloud) {
  if (cloud.size() < 2) return 0.0;
  std::vector<double> nn;
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < cloud.size(); ++b) {
      if (a == b) continue;
      VectorField d = cloud[a].vel - cloud[b].vel;
      best = std::min(best, norm_l2(d));
    }
    nn.push_back(best);
  }
  std::sort(nn.begin(), nn.end());
  std::size_t m = nn.size();
  return m % 2 == 1 ? nn[m / 2] : 0.5 * (nn[m / 2 - 1] + nn[m / 2]);
}

// --- absorbing radii ----------------------------------------------------------

struct AbsorbingRadii {
  double t = 0.0;
  double L1 = 0.0;     // squared V-norm radius (quadrature + tail)
  double L2 = 0.0;     // vorticity sup-norm radius (quadrature + tail)
  double tail1 = 0.0;  // analytic tail estimate included in L1
  double tail2 = 0.0;
  double t_trunc = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
};

namespace detail {
/// integral_{-inf}^{u} e^{delta (xi - t)} (1 + e^{-r xi})^pow dxi for pow in
/// {1, 2}; +inf when the transient part diverges.
inline double decaying_tail_integral(double delta, double rate, double t, double u, int pow) {
  double acc = std::exp(delta * (u - t)) / delta;
  if (pow >= 1) {
    if (delta <= rate * (pow >= 2 ? 2.0 : 1.0)) return std::numeric_limits<double>::infinity();
    if (pow == 1) {
      acc += std::exp(delta * (u - t)) * std::exp(-rate * u) / (delta - rate);
    } else {
      acc += 2.0 * std::exp(delta * (u - t)) * std::exp(-rate * u) / (delta - rate);
      acc += std::exp(delta * (u - t)) * std::exp(-2.0 * rate * u) / (delta - 2.0 * rate);
    }
  }
  return acc;
}
}  // namespace detail

/// Quadrature of the two absorbing-set integrals over [t - t_trunc, t] with
/// the sampled noise exponents, plus the analytic tail bound taken with
/// delta_1 = delta_2 = sigma^2/4.
inline AbsorbingRadii absorbing_radii(double t, const OuPath& ou, const ForcingSpec& spec,
                                      double sigma, double t_trunc) {
  require(t_trunc > 0.0, "truncation horizon must be positive");
  if (t - t_trunc < ou.t0 - 1e-9 || t > ou.t_end() + 1e-9)
    throw std::out_of_range("truncation horizon exceeds the noise window");
  AbsorbingRadii out;
  out.t = t;
  out.t_trunc = t_trunc;
  out.delta1 = 0.25 * sigma * sigma;
  out.delta2 = 0.25 * sigma * sigma;

  const double y_t = ou.value(t);
  // quadrature nodes on the noise grid
  std::vector<double> xs;
  {
    double a = t - t_trunc;
    xs.push_back(a);
    int k0 = static_cast<int>(std::ceil((a - ou.t0) / ou.dt - 1e-12));
    int k1 = static_cast<int>(std::floor((t - ou.t0) / ou.dt + 1e-12));
    for (int k = k0; k <= k1; ++k) {
      double xk = ou.t0 + k * ou.dt;
      if (xk > a + 1e-14 && xk < t - 1e-14) xs.push_back(xk);
    }
    xs.push_back(t);
  }
  double i1 = 0.0, i2 = 0.0, g1_prev = 0.0, g2_prev = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double xi = xs[k];
    double iy = ou.integral(xi, t);
    double y_xi = ou.value(xi);
    double e_common = -0.5 * sigma * sigma * (t - xi);
    double g1 = std::exp(e_common + 2.0 * sigma * iy + 2.0 * sigma * (y_t - y_xi)) *
                (std::pow(spec.f_l2(xi), 2) + std::pow(spec.curl_f_l2(xi), 2));
    double g2 = std::exp(e_common + sigma * iy + sigma * (y_t - y_xi)) * spec.curl_f_linf(xi);
    if (k > 0) {
      double h = xs[k] - xs[k - 1];
      i1 += 0.5 * (g1_prev + g1) * h;
      i2 += 0.5 * (g2_prev + g2) * h;
    }
    g1_prev = g1;
    g2_prev = g2;
  }

  double u = t - t_trunc;
  double F1 = std::pow(spec.f_inf_l2, 2) + std::pow(spec.curl_f_inf_l2, 2);
  double F2 = spec.curl_f_inf_linf;
  switch (spec.kind) {
    case ForcingKind::autonomous:
      out.tail1 = 2.0 * F1 * std::exp(-out.delta1 * t_trunc) / out.delta1;
      out.tail2 = 2.0 * F2 * std::exp(-out.delta2 * t_trunc) / out.delta2;
      break;
    case ForcingKind::decaying_to_autonomous:
      out.tail1 = 2.0 * F1 * detail::decaying_tail_integral(out.delta1, spec.rate, t, u, 2);
      out.tail2 = 2.0 * F2 * detail::decaying_tail_integral(out.delta2, spec.rate, t, u, 1);
      break;
    case ForcingKind::custom_table: {
      // bounded-forcing fallback: sup of the tabulated norms
      double s1 = 0.0, s2 = 0.0;
      for (const auto& smp : spec.table) {
        s1 = std::max(s1, std::pow(norm_l2(smp.f), 2) + std::pow(norm_l2(smp.curl_f), 2));
        s2 = std::max(s2, norm_linf(smp.curl_f));
      }
      out.tail1 = 2.0 * s1 * std::exp(-out.delta1 * t_trunc) / out.delta1;
      out.tail2 = 2.0 * s2 * std::exp(-out.delta2 * t_trunc) / out.delta2;
      break;
    }
  }
  out.L1 = 2.0 * i1 + out.tail1;
  out.L2 = 2.0 * i2 + out.tail2;
  return out;
}

// --- weak asymptotic autonomy --------------------------------------------------

struct AutonomyRow {
  double t = 0.0;
  double distance = 0.0;   // Hausdorff semi-distance in H
  double diam_na = 0.0;    // diameter of the non-autonomous cloud
  double diam_auto = 0.0;  // diameter of the shift-aligned autonomous cloud
};

struct AutonomyReport {
  std::vector<AutonomyRow> rows;
  bool decreasing = false;
};

/// For each time, estimates the pullback cloud of the non-autonomous system
/// and the shift-aligned cloud of the autonomous limit system along the same
/// realization, and reports the Hausdorff semi-distance between them.
inline AutonomyReport asymptotic_autonomy_sweep(const std::vector<double>& times,
                                                const OuPath& ou, const InitialFamily& B,
                                                const SolverConfig& cfg,
                                                const ForcingSpec& spec_nonautonomous,
                                                const ForcingSpec& spec_autonomous,
                                                const std::vector<double>& horizons) {
  require(!times.empty(), "need at least one evaluation time");
  for (std::size_t k = 1; k < times.size(); ++k)
    require(times[k] > times[k - 1], "evaluation times must increase");
  require(spec_nonautonomous.kind == ForcingKind::decaying_to_autonomous ||
              spec_nonautonomous.kind == ForcingKind::autonomous,
          "sweep forcing must converge to the autonomous limit");
  AutonomyReport rep;
  for (double t : times) {
    AttractorEstimate na = pullback_estimate(t, ou, B, horizons, cfg, spec_nonautonomous);
    AttractorEstimate au = pullback_estimate(t, ou, B, horizons, cfg, spec_autonomous);
    std::vector<CloudPoint> pa, pb;
    for (std::size_t m = 0; m < na.points.size(); ++m)
      if (!na.blowup[m]) pa.push_back(na.points[m]);
    for (std::size_t m = 0; m < au.points.size(); ++m)
      if (!au.blowup[m]) pb.push_back(au.points[m]);
    AutonomyRow row;
    row.t = t;
    row.distance = hausdorff_semidistance(pa, pb);
    row.diam_na = na.diam_delta;
    row.diam_auto = au.diam_delta;
    rep.rows.push_back(row);
  }
  rep.decreasing = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    if (!(rep.rows[k].distance < rep.rows[k - 1].distance)) rep.decreasing = false;
  return rep;
}

/// Single-trajectory forward-convergence diagnostic: distance in H between
/// the non-autonomous solution started at tau along the pulled-back path and
/// the autonomous solution, at matched horizon T, for growing tau with
/// initial data approaching the autonomous one.
inline std::vector<double> forward_convergence_diagnostic(
    const std::vector<double>& taus, double T, const OuPath& ou, const ScalarField& base_rho,
    const SolverConfig& cfg, const ForcingSpec& spec_nonautonomous,
    const ForcingSpec& spec_autonomous, const ScalarField& perturbation) {
  PoissonSolver solver(cfg.grid);
  VorticityState base = make_state(solver, base_rho, 0.0);
  TrajectoryRecord auto_run =
      evolve(base, 0.0, T, ou, spec_autonomous, cfg, {T, false});
  std::vector<double> dists;
  for (double tau : taus) {
    OuPath shifted = ou_shift(ou, -tau);
    ScalarField rho = base_rho;
    for (std::size_t k = 0; k < rho.data.size(); ++k)
      rho.data[k] += perturbation.data[k] / tau;
    VorticityState u = make_state(solver, rho, tau);
    TrajectoryRecord na_run =
        evolve(u, tau, tau + T, shifted, spec_nonautonomous, cfg, {T, false});
    VectorField d = na_run.final_state.vel - auto_run.final_state.vel;
    dists.push_back(norm_l2(d));
  }
  return dists;
}

}  // namespace eulab
