#pragma once

// Streamfunction solve: -lap_h psi = rho with psi = 0 on the boundary.
// The five-point system is diagonalized exactly by the type-I discrete sine
// transform, so the residual is at round-off level; the solve sits inside
// every time step and must not accumulate iteration error.

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "eulab/field.hpp"
#include "eulab/operators.hpp"

namespace eulab {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace detail

/// Owns FFTW plans and scratch; one instance per thread of execution.
class PoissonSolver {
 public:
  explicit PoissonSolver(Grid g) : grid_(g), eig_(static_cast<std::size_t>(g.size())) {
    const int n = g.n;
    buf_ = fftw_alloc_real(static_cast<std::size_t>(n) * n);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      plan_ = fftw_plan_r2r_2d(n, n, buf_, buf_, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
    }
    std::vector<double> lam(n);
    for (int k = 0; k < n; ++k) {
      double s = std::sin(0.5 * M_PI * (k + 1) * g.h);
      lam[k] = 4.0 * s * s / (g.h * g.h);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) eig_[static_cast<std::size_t>(i) * n + j] = lam[i] + lam[j];
    norm_ = 1.0 / (4.0 * (n + 1.0) * (n + 1.0));
  }

  ~PoissonSolver() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }

  PoissonSolver(const PoissonSolver&) = delete;
  PoissonSolver& operator=(const PoissonSolver&) = delete;

  const Grid& grid() const { return grid_; }

  void solve(const double* rhs, double* psi) const {
    const std::size_t m = static_cast<std::size_t>(grid_.size());
    for (std::size_t k = 0; k < m; ++k) buf_[k] = rhs[k];
    fftw_execute(plan_);
    for (std::size_t k = 0; k < m; ++k) buf_[k] /= eig_[k];
    fftw_execute(plan_);
    for (std::size_t k = 0; k < m; ++k) psi[k] = buf_[k] * norm_;
  }

  ScalarField solve(const ScalarField& rhs) const {
    require(rhs.grid == grid_, "grid mismatch");
    require(rhs.finite(), "rhs has non-finite entries");
    ScalarField psi(grid_);
    solve(rhs.data.data(), psi.data.data());
    return psi;
  }

 private:
  Grid grid_;
  std::vector<double> eig_;
  double* buf_;
  fftw_plan plan_;
  double norm_;
};

inline ScalarField poisson_solve(const ScalarField& rhs) {
  PoissonSolver solver(rhs.grid);
  return solver.solve(rhs);
}

/// Biot-Savart on the square: grad_perp of the streamfunction solve.
/// Divergence-free at interior centered-stencil points; tangential slip
/// allowed, normal component zero through psi = 0.
inline VectorField velocity_from_vorticity(const ScalarField& rho) {
  return grad_perp(poisson_solve(rho));
}

inline VectorField velocity_from_vorticity(const PoissonSolver& solver, const ScalarField& rho) {
  return grad_perp(solver.solve(rho));
}

}  // namespace eulab
