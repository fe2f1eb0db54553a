#pragma once

// Time-dependent forcing families with an autonomous limit. The vorticity
// dynamics consumes curl f only; f itself enters the energy-type bounds.
// Built-in forcings are divergence-free (f = grad_perp of a potential), so
// the normal trace vanishes and the curl has a closed form.

#include <cmath>
#include <string>
#include <vector>

#include "eulab/field.hpp"
#include "eulab/operators.hpp"

namespace eulab {

enum class ForcingKind { autonomous, decaying_to_autonomous, custom_table };

struct ForcingSample {
  VectorField f;
  ScalarField curl_f;
};

struct ForcingSpec {
  ForcingKind kind = ForcingKind::autonomous;
  VectorField f_inf;
  ScalarField curl_f_inf;
  double rate = 1.0;  // decay exponent of the transient part

  // custom_table only: strictly increasing times with per-time fields
  std::vector<double> table_times;
  std::vector<ForcingSample> table;

  // cached norms of the autonomous limit
  double f_inf_l2 = 0.0;
  double curl_f_inf_l2 = 0.0;
  double curl_f_inf_linf = 0.0;

  /// Scalar time profile: f(t) = profile(t) * f_inf for the built-in kinds.
  double profile(double t) const {
    switch (kind) {
      case ForcingKind::autonomous:
        return 1.0;
      case ForcingKind::decaying_to_autonomous:
        return 1.0 + std::exp(-rate * t);
      case ForcingKind::custom_table:
        throw std::logic_error("custom_table forcing has no scalar profile");
    }
    return 1.0;
  }

  double f_l2(double t) const {
    if (kind == ForcingKind::custom_table) return norm_l2(eval_table(t).f);
    return profile(t) * f_inf_l2;
  }
  double curl_f_l2(double t) const {
    if (kind == ForcingKind::custom_table) return norm_l2(eval_table(t).curl_f);
    return profile(t) * curl_f_inf_l2;
  }
  double curl_f_linf(double t) const {
    if (kind == ForcingKind::custom_table) return norm_linf(eval_table(t).curl_f);
    return profile(t) * curl_f_inf_linf;
  }

  ForcingSample eval_table(double t) const {
    if (table_times.empty() || t < table_times.front() - 1e-12 ||
        t > table_times.back() + 1e-12)
      throw std::out_of_range("time outside the forcing table range");
    if (t <= table_times.front()) return table.front();
    if (t >= table_times.back()) return table.back();
    std::size_t k = 1;
    while (table_times[k] < t) ++k;
    double w = (t - table_times[k - 1]) / (table_times[k] - table_times[k - 1]);
    ForcingSample out;
    out.f = VectorField(f_inf.grid);
    out.curl_f = ScalarField(f_inf.grid);
    const ForcingSample& a = table[k - 1];
    const ForcingSample& b = table[k];
    for (std::size_t m = 0; m < out.f.u.size(); ++m) {
      out.f.u[m] = (1.0 - w) * a.f.u[m] + w * b.f.u[m];
      out.f.v[m] = (1.0 - w) * a.f.v[m] + w * b.f.v[m];
      out.curl_f.data[m] = (1.0 - w) * a.curl_f.data[m] + w * b.curl_f.data[m];
    }
    return out;
  }
};

inline void cache_forcing_norms(ForcingSpec& spec) {
  spec.f_inf_l2 = norm_l2(spec.f_inf);
  spec.curl_f_inf_l2 = norm_l2(spec.curl_f_inf);
  spec.curl_f_inf_linf = norm_linf(spec.curl_f_inf);
}

/// f(., t) and its curl. For the built-in kinds both scale identically.
inline ForcingSample forcing_eval(const ForcingSpec& spec, double t) {
  if (spec.kind == ForcingKind::custom_table) return spec.eval_table(t);
  double s = spec.profile(t);
  ForcingSample out{spec.f_inf, spec.curl_f_inf};
  scale_in_place(out.f, s);
  scale_in_place(out.curl_f, s);
  return out;
}

/// Divergence-free band-limited forcing: f_inf = grad_perp(phi) with
/// phi = amplitude * sum_{k,l<=modes} sin(k pi x) sin(l pi y) / (k^2 + l^2).
/// curl f_inf = -lap phi is stored in closed form, so the discrete curl of
/// the field agrees with it to O(h^2).
inline ForcingSpec make_band_limited_forcing(Grid grid, ForcingKind kind, double amplitude,
                                             int modes, double rate = 1.0) {
  require(modes >= 1, "forcing needs at least one mode");
  ScalarField phi(grid), minus_lap(grid);
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      double x = grid.x(i), y = grid.y(j);
      double p = 0.0, q = 0.0;
      for (int k = 1; k <= modes; ++k) {
        for (int l = 1; l <= modes; ++l) {
          double c = 1.0 / (k * k + l * l);
          double s = std::sin(k * M_PI * x) * std::sin(l * M_PI * y);
          p += c * s;
          q += c * (k * k + l * l) * M_PI * M_PI * s;
        }
      }
      phi.at(i, j) = amplitude * p;
      minus_lap.at(i, j) = amplitude * q;
    }
  }
  ForcingSpec spec;
  spec.kind = kind;
  spec.rate = rate;
  spec.f_inf = grad_perp(phi);
  spec.curl_f_inf = minus_lap;
  cache_forcing_norms(spec);
  return spec;
}

inline ForcingSpec make_zero_forcing(Grid grid) {
  ForcingSpec spec;
  spec.kind = ForcingKind::autonomous;
  spec.f_inf = VectorField(grid);
  spec.curl_f_inf = ScalarField(grid);
  cache_forcing_norms(spec);
  return spec;
}

}  // namespace eulab
