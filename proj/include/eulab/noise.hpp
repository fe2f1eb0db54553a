#pragma once

// Two-sided Wiener paths and the stationary Ornstein-Uhlenbeck evaluation
// driving the pathwise conjugation. Paths are immutable after construction
// and live on one uniform time grid; shifts are exact re-indexing.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "eulab/common.hpp"

namespace eulab {

struct WienerPath {
  double t0 = 0.0;   // earliest grid time
  double dt = 0.0;   // grid spacing, > 0
  std::vector<double> values;
  std::uint64_t seed = 0;

  double t_end() const { return t0 + dt * static_cast<double>(values.size() - 1); }
  int size() const { return static_cast<int>(values.size()); }

  int index_of(double t) const {
    auto k = std::llround((t - t0) / dt);
    require(k >= 0 && k < static_cast<long long>(values.size()),
            "time outside the sampled window");
    require(std::abs((t0 + static_cast<double>(k) * dt) - t) <= 1e-9 * std::max(1.0, dt),
            "time not grid-aligned");
    return static_cast<int>(k);
  }
};

struct OuPath {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;
  double stationary_var = 0.5;  // drift -1, diffusion 1

  double t_end() const { return t0 + dt * static_cast<double>(values.size() - 1); }
  int size() const { return static_cast<int>(values.size()); }

  /// Linear interpolation of y between grid samples.
  double value(double t) const {
    double s = (t - t0) / dt;
    require(s >= -1e-9 && s <= static_cast<double>(values.size() - 1) + 1e-9,
            "time outside the sampled window");
    if (s <= 0.0) return values.front();
    int k = static_cast<int>(s);
    if (k >= size() - 1) return values.back();
    double w = s - static_cast<double>(k);
    return (1.0 - w) * values[k] + w * values[k + 1];
  }

  /// Exact integral of the piecewise-linear interpolant over [a, b].
  double integral(double a, double b) const {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) { std::swap(a, b); sign = -1.0; }
    double sa = (a - t0) / dt, sb = (b - t0) / dt;
    require(sa >= -1e-9 && sb <= static_cast<double>(size() - 1) + 1e-9,
            "integration bounds outside the sampled window");
    sa = std::max(sa, 0.0);
    sb = std::min(sb, static_cast<double>(size() - 1));
    int ka = static_cast<int>(sa), kb = static_cast<int>(sb);
    auto seg = [&](int k, double u0, double u1) {
      // integral over local coordinates [u0, u1] of cell k, times dt
      double y0 = values[k], y1 = values[std::min(k + 1, size() - 1)];
      double m0 = y0 + (y1 - y0) * u0, m1 = y0 + (y1 - y0) * u1;
      return 0.5 * (m0 + m1) * (u1 - u0) * dt;
    };
    if (ka == kb) return sign * seg(ka, sa - ka, sb - kb);
    double acc = seg(ka, sa - ka, 1.0);
    for (int k = ka + 1; k < kb; ++k) acc += 0.5 * (values[k] + values[k + 1]) * dt;
    acc += seg(kb, 0.0, sb - kb);
    return sign * acc;
  }
};

/// Samples a two-sided Brownian path pinned at W(0) = 0. The forward part is
/// built by cumulative Gaussian increments from 0 to t_max, the backward part
/// by independent cumulative increments from 0 down to t_min.
inline WienerPath sample_wiener(double t_min, double t_max, double dt, std::uint64_t seed) {
  require(dt > 0.0, "dt must be positive");
  require(t_min <= 0.0 && t_max >= 0.0, "window must contain t = 0");
  int n_neg = static_cast<int>(std::ceil(-t_min / dt - 1e-12));
  int n_pos = static_cast<int>(std::ceil(t_max / dt - 1e-12));
  WienerPath w;
  w.dt = dt;
  w.seed = seed;
  w.t0 = -static_cast<double>(n_neg) * dt;
  w.values.assign(n_neg + n_pos + 1, 0.0);
  double sd = std::sqrt(dt);
  {
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::normal_distribution<double> gauss(0.0, sd);
    for (int k = 1; k <= n_pos; ++k) w.values[n_neg + k] = w.values[n_neg + k - 1] + gauss(rng);
  }
  {
    std::mt19937_64 rng(derive_seed(seed, 1));
    std::normal_distribution<double> gauss(0.0, sd);
    for (int k = 1; k <= n_neg; ++k) w.values[n_neg - k] = w.values[n_neg - k + 1] - gauss(rng);
  }
  return w;
}

/// Builds y along w with a prescribed value at the leftmost grid time.
/// One step of the recursion: y_{k+1} = e^{-dt} y_k + c dW_k with c chosen so
/// the Gaussian term carries the exact conditional variance (1 - e^{-2dt})/2.
inline OuPath ou_from_wiener(const WienerPath& w, double y_left) {
  require(!w.values.empty(), "empty Wiener path");
  OuPath y;
  y.t0 = w.t0;
  y.dt = w.dt;
  y.stationary_var = 0.5;
  y.values.resize(w.values.size());
  y.values[0] = y_left;
  double decay = std::exp(-w.dt);
  double amp = std::sqrt((1.0 - std::exp(-2.0 * w.dt)) / (2.0 * w.dt));
  for (std::size_t k = 1; k < w.values.size(); ++k) {
    y.values[k] = decay * y.values[k - 1] + amp * (w.values[k] - w.values[k - 1]);
  }
  return y;
}

/// Stationary evaluation: the leftmost sample is drawn from N(0, 1/2)
/// deterministically from the path seed.
inline OuPath ou_from_wiener(const WienerPath& w) {
  require(!w.values.empty(), "empty Wiener path");
  std::mt19937_64 rng(derive_seed(w.seed, 2));
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  return ou_from_wiener(w, gauss(rng));
}

/// Returns the path t -> y(t + s): pure re-indexing along the same
/// realization. s must be grid-aligned.
inline OuPath ou_shift(const OuPath& y, double s) {
  auto k = std::llround(s / y.dt);
  if (std::abs(static_cast<double>(k) * y.dt - s) > 1e-9 * std::max(1.0, y.dt))
    throw std::out_of_range("shift is not grid-aligned");
  if (std::abs(s) > (y.t_end() - y.t0) + 1e-9)
    throw std::out_of_range("shift outside the sampled window");
  OuPath out = y;
  out.t0 = y.t0 - static_cast<double>(k) * y.dt;
  return out;
}

struct OuExponentials {
  double i1 = 0.0;  // integral of y
  double i2 = 0.0;  // integral of exp(-2 sigma y)
  double i3 = 0.0;  // integral of exp(-sigma y)
};

/// Trapezoid-rule values of the exponent integrals over [a, b].
inline OuExponentials ou_exponential_functionals(const OuPath& y, double a, double b,
                                                 double sigma) {
  require(a <= b, "integration bounds must be ordered");
  require(sigma > 0.0, "sigma must be positive");
  OuExponentials out;
  if (a == b) return out;
  double sa = (a - y.t0) / y.dt, sb = (b - y.t0) / y.dt;
  require(sa >= -1e-9 && sb <= static_cast<double>(y.size() - 1) + 1e-9,
          "integration bounds outside the sampled window");
  // nodes: a, the grid points strictly inside, b
  std::vector<double> ts;
  ts.push_back(a);
  int k0 = static_cast<int>(std::ceil(sa - 1e-12));
  int k1 = static_cast<int>(std::floor(sb + 1e-12));
  for (int k = k0; k <= k1; ++k) {
    double t = y.t0 + static_cast<double>(k) * y.dt;
    if (t > a + 1e-14 && t < b - 1e-14) ts.push_back(t);
  }
  ts.push_back(b);
  double y_prev = y.value(ts[0]);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    double y_cur = y.value(ts[i]);
    double h = ts[i] - ts[i - 1];
    out.i1 += 0.5 * (y_prev + y_cur) * h;
    out.i2 += 0.5 * (std::exp(-2.0 * sigma * y_prev) + std::exp(-2.0 * sigma * y_cur)) * h;
    out.i3 += 0.5 * (std::exp(-sigma * y_prev) + std::exp(-sigma * y_cur)) * h;
    y_prev = y_cur;
  }
  return out;
}

/// Largest |y(t)|/(1 + |t|) over the window; the trend of this quantity over
/// growing windows is reported as a sublinearity diagnostic, never asserted.
inline double sublinearity_diagnostic(const OuPath& y, double window) {
  double worst = 0.0;
  for (int k = 0; k < y.size(); ++k) {
    double t = y.t0 + static_cast<double>(k) * y.dt;
    if (std::abs(t) > window) continue;
    worst = std::max(worst, std::abs(y.values[k]) / (1.0 + std::abs(t)));
  }
  return worst;
}

}  // namespace eulab
