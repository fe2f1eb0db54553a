#pragma once

// Differential operators and norms on interior-point fields.
//
// Conventions: centered second-order differences throughout. Dirichlet scalar
// fields (vorticity, streamfunction) use the implicit zero boundary, so the
// centered stencil is valid up to the first interior line. Velocity fields
// carry no boundary data; their derivative stencils fall back to one-sided
// second-order forms on the first/last interior lines.

#include <algorithm>
#include <cmath>

#include "eulab/field.hpp"

namespace eulab {

/// perp-gradient of a Dirichlet scalar: (d/dy, -d/dx) psi.
inline VectorField grad_perp(const ScalarField& psi) {
  const Grid g = psi.grid;
  VectorField out(g);
  const double inv2h = 1.0 / (2.0 * g.h);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      out.ux(i, j) = (psi.at0(i, j + 1) - psi.at0(i, j - 1)) * inv2h;
      out.vy(i, j) = -(psi.at0(i + 1, j) - psi.at0(i - 1, j)) * inv2h;
    }
  }
  return out;
}

namespace detail {
/// d/dx of a velocity component: centered inside, one-sided second order at
/// the first/last interior lines.
inline double ddx(const VectorField& f, const std::vector<double>& c, int i, int j) {
  const int n = f.grid.n;
  const double inv2h = 1.0 / (2.0 * f.grid.h);
  auto a = [&](int ii, int jj) { return c[static_cast<std::size_t>(ii) * n + jj]; };
  if (i == 0) return (-3.0 * a(0, j) + 4.0 * a(1, j) - a(2, j)) * inv2h;
  if (i == n - 1) return (3.0 * a(n - 1, j) - 4.0 * a(n - 2, j) + a(n - 3, j)) * inv2h;
  return (a(i + 1, j) - a(i - 1, j)) * inv2h;
}

inline double ddy(const VectorField& f, const std::vector<double>& c, int i, int j) {
  const int n = f.grid.n;
  const double inv2h = 1.0 / (2.0 * f.grid.h);
  auto a = [&](int ii, int jj) { return c[static_cast<std::size_t>(ii) * n + jj]; };
  if (j == 0) return (-3.0 * a(i, 0) + 4.0 * a(i, 1) - a(i, 2)) * inv2h;
  if (j == n - 1) return (3.0 * a(i, n - 1) - 4.0 * a(i, n - 2) + a(i, n - 3)) * inv2h;
  return (a(i, j + 1) - a(i, j - 1)) * inv2h;
}
}  // namespace detail

/// curl of a planar field: d v / dx - d u / dy.
inline ScalarField curl(const VectorField& f) {
  ScalarField out(f.grid);
  for (int i = 0; i < f.grid.n; ++i)
    for (int j = 0; j < f.grid.n; ++j)
      out.at(i, j) = detail::ddx(f, f.v, i, j) - detail::ddy(f, f.u, i, j);
  return out;
}

inline ScalarField divergence(const VectorField& f) {
  ScalarField out(f.grid);
  for (int i = 0; i < f.grid.n; ++i)
    for (int j = 0; j < f.grid.n; ++j)
      out.at(i, j) = detail::ddx(f, f.u, i, j) + detail::ddy(f, f.v, i, j);
  return out;
}

/// Five-point Laplacian of a Dirichlet scalar (spacing h).
inline ScalarField laplacian_5pt(const ScalarField& f) {
  const Grid g = f.grid;
  ScalarField out(g);
  const double invh2 = 1.0 / (g.h * g.h);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      out.at(i, j) = (f.at0(i + 1, j) + f.at0(i - 1, j) + f.at0(i, j + 1) + f.at0(i, j - 1) -
                      4.0 * f.at(i, j)) *
                     invh2;
  return out;
}

/// Laplacian formed by composing the centered first-difference stencils
/// (effective spacing 2h). curl(grad_perp(psi)) equals minus this operator
/// exactly wherever all stencils are centered.
inline ScalarField laplacian_wide(const ScalarField& f) {
  const Grid g = f.grid;
  ScalarField out(g);
  const double inv4h2 = 1.0 / (4.0 * g.h * g.h);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      out.at(i, j) = (f.at0(i + 2, j) - 2.0 * f.at(i, j) + f.at0(i - 2, j) + f.at0(i, j + 2) -
                      2.0 * f.at(i, j) + f.at0(i, j - 2)) *
                     inv4h2;
  return out;
}

// --- quadrature and norms -------------------------------------------------

inline double inner_l2(const ScalarField& a, const ScalarField& b) {
  require(a.grid == b.grid, "grid mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) acc += a.data[k] * b.data[k];
  return acc * a.grid.h * a.grid.h;
}

inline double norm_l2(const ScalarField& f) { return std::sqrt(inner_l2(f, f)); }

inline double norm_l2(const VectorField& f) {
  double acc = 0.0;
  for (std::size_t k = 0; k < f.u.size(); ++k) acc += f.u[k] * f.u[k] + f.v[k] * f.v[k];
  return std::sqrt(acc * f.grid.h * f.grid.h);
}

inline double norm_linf(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.data) m = std::max(m, std::abs(v));
  return m;
}

inline double norm_linf(const VectorField& f) {
  double m = 0.0;
  for (std::size_t k = 0; k < f.u.size(); ++k)
    m = std::max(m, f.u[k] * f.u[k] + f.v[k] * f.v[k]);
  return std::sqrt(m);
}

namespace detail {
/// Lp norm of sampled magnitudes, computed against the sup to stay in range
/// for large p.
inline double norm_lp_from_mags(const std::vector<double>& mag, double h, double p) {
  double sup = 0.0;
  for (double m : mag) sup = std::max(sup, m);
  if (sup == 0.0) return 0.0;
  double acc = 0.0;
  for (double m : mag) acc += std::pow(m / sup, p);
  return sup * std::pow(acc * h * h, 1.0 / p);
}
}  // namespace detail

inline double norm_lp(const ScalarField& f, double p) {
  require(p >= 1.0, "p must be >= 1");
  std::vector<double> mag(f.data.size());
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(f.data[k]);
  return detail::norm_lp_from_mags(mag, f.grid.h, p);
}

inline double norm_lp(const VectorField& f, double p) {
  require(p >= 1.0, "p must be >= 1");
  std::vector<double> mag(f.u.size());
  for (std::size_t k = 0; k < mag.size(); ++k)
    mag[k] = std::sqrt(f.u[k] * f.u[k] + f.v[k] * f.v[k]);
  return detail::norm_lp_from_mags(mag, f.grid.h, p);
}

/// Squared L2 norm of the gradient of a Dirichlet scalar (zero-extended
/// centered differences).
inline double grad_sq_l2(const ScalarField& f) {
  const Grid g = f.grid;
  const double inv2h = 1.0 / (2.0 * g.h);
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      double fx = (f.at0(i + 1, j) - f.at0(i - 1, j)) * inv2h;
      double fy = (f.at0(i, j + 1) - f.at0(i, j - 1)) * inv2h;
      acc += fx * fx + fy * fy;
    }
  }
  return acc * g.h * g.h;
}

/// Squared L2 norm of the velocity gradient tensor.
inline double grad_sq_l2(const VectorField& f) {
  const Grid g = f.grid;
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      double a = detail::ddx(f, f.u, i, j);
      double b = detail::ddy(f, f.u, i, j);
      double c = detail::ddx(f, f.v, i, j);
      double d = detail::ddy(f, f.v, i, j);
      acc += a * a + b * b + c * c + d * d;
    }
  }
  return acc * g.h * g.h;
}

inline double norm_h1(const ScalarField& f) {
  double l2 = norm_l2(f);
  return std::sqrt(l2 * l2 + grad_sq_l2(f));
}

inline double norm_h1(const VectorField& f) {
  double l2 = norm_l2(f);
  return std::sqrt(l2 * l2 + grad_sq_l2(f));
}

/// Lp norm of the velocity gradient tensor (pointwise Frobenius magnitude).
inline double grad_norm_lp(const VectorField& f, double p) {
  const Grid g = f.grid;
  std::vector<double> mag(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      double a = detail::ddx(f, f.u, i, j);
      double b = detail::ddy(f, f.u, i, j);
      double c = detail::ddx(f, f.v, i, j);
      double d = detail::ddy(f, f.v, i, j);
      mag[static_cast<std::size_t>(i) * g.n + j] = std::sqrt(a * a + b * b + c * c + d * d);
    }
  }
  return detail::norm_lp_from_mags(mag, g.h, p);
}

template <typename FieldT>
NormReport norms(const FieldT& f, std::initializer_list<double> ps = {2, 4, 8, 16, 32, 64}) {
  require(f.finite(), "field has non-finite entries");
  NormReport r;
  r.l2 = norm_l2(f);
  r.h1 = norm_h1(f);
  r.linf = norm_linf(f);
  for (double p : ps) r.lp[p] = norm_lp(f, p);
  return r;
}

/// ||v||_Lp / (sqrt(p) ||v||_H1): the ratio whose p-uniform boundedness the
/// bounds module monitors.
inline double sobolev_ratio(const VectorField& v, double p) {
  require(p >= 2.0 && p <= 64.0, "p outside [2, 64]");
  double h1 = norm_h1(v);
  if (h1 == 0.0) throw std::invalid_argument("sobolev_ratio undefined for the zero field");
  return norm_lp(v, p) / (std::sqrt(p) * h1);
}

/// Boundary line integral of |v|^2 with the tangential trace taken from the
/// streamfunction (one-sided second-order normal derivative, psi = 0 on the
/// boundary). Used to calibrate the empirical trace constant.
inline double boundary_speed_sq_integral(const ScalarField& psi) {
  const Grid g = psi.grid;
  const double inv2h = 1.0 / (2.0 * g.h);
  double acc = 0.0;
  for (int k = 0; k < g.n; ++k) {
    double tb = (4.0 * psi.at(k, 0) - psi.at(k, 1)) * inv2h;          // y = 0 edge
    double tt = (4.0 * psi.at(k, g.n - 1) - psi.at(k, g.n - 2)) * inv2h;  // y = 1 edge
    double tl = (4.0 * psi.at(0, k) - psi.at(1, k)) * inv2h;          // x = 0 edge
    double tr = (4.0 * psi.at(g.n - 1, k) - psi.at(g.n - 2, k)) * inv2h;  // x = 1 edge
    acc += tb * tb + tt * tt + tl * tl + tr * tr;
  }
  return acc * g.h;
}

}  // namespace eulab
