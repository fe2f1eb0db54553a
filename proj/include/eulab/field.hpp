#pragma once

// Square-domain grids and interior-point fields. Fields store the n x n
// interior values row-major in x (index i) then y (index j); homogeneous
// Dirichlet fields are zero-extended implicitly at the boundary.

#include <cmath>
#include <map>
#include <vector>

#include "eulab/common.hpp"

namespace eulab {

struct Grid {
  int n = 0;      // interior points per axis
  double h = 0;   // spacing, h (n + 1) = 1 on the unit square

  Grid() = default;
  explicit Grid(int n_) : n(n_), h(1.0 / (n_ + 1)) {
    require(n_ >= 3, "grid needs at least 3 interior points per axis");
  }

  double x(int i) const { return (i + 1) * h; }
  double y(int j) const { return (j + 1) * h; }
  int size() const { return n * n; }
  bool operator==(const Grid& o) const { return n == o.n; }
  bool operator!=(const Grid& o) const { return n != o.n; }
};

struct ScalarField {
  Grid grid;
  std::vector<double> data;  // data[i * n + j]

  ScalarField() = default;
  explicit ScalarField(Grid g) : grid(g), data(static_cast<std::size_t>(g.size()), 0.0) {}

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * grid.n + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * grid.n + j]; }

  /// Zero-extended access: boundary and exterior read as 0.
  double at0(int i, int j) const {
    if (i < 0 || j < 0 || i >= grid.n || j >= grid.n) return 0.0;
    return at(i, j);
  }

  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

struct VectorField {
  Grid grid;
  std::vector<double> u, v;

  VectorField() = default;
  explicit VectorField(Grid g)
      : grid(g),
        u(static_cast<std::size_t>(g.size()), 0.0),
        v(static_cast<std::size_t>(g.size()), 0.0) {}

  double& ux(int i, int j) { return u[static_cast<std::size_t>(i) * grid.n + j]; }
  double ux(int i, int j) const { return u[static_cast<std::size_t>(i) * grid.n + j]; }
  double& vy(int i, int j) { return v[static_cast<std::size_t>(i) * grid.n + j]; }
  double vy(int i, int j) const { return v[static_cast<std::size_t>(i) * grid.n + j]; }

  bool finite() const {
    for (double w : u)
      if (!std::isfinite(w)) return false;
    for (double w : v)
      if (!std::isfinite(w)) return false;
    return true;
  }
};

struct NormReport {
  double l2 = 0.0;
  double h1 = 0.0;
  double linf = 0.0;
  std::map<double, double> lp;
};

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require(a.grid == b.grid, "grid mismatch");
  ScalarField out(a.grid);
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] = a.data[k] - b.data[k];
  return out;
}

inline VectorField operator-(const VectorField& a, const VectorField& b) {
  require(a.grid == b.grid, "grid mismatch");
  VectorField out(a.grid);
  for (std::size_t k = 0; k < out.u.size(); ++k) {
    out.u[k] = a.u[k] - b.u[k];
    out.v[k] = a.v[k] - b.v[k];
  }
  return out;
}

inline void scale_in_place(ScalarField& f, double s) {
  for (double& v : f.data) v *= s;
}

inline void scale_in_place(VectorField& f, double s) {
  for (double& v : f.u) v *= s;
  for (double& v : f.v) v *= s;
}

}  // namespace eulab
