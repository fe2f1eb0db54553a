#pragma once

// Reproducible band-limited vorticity samples: lowest modes x modes sine
// coefficients drawn from a seeded Gaussian. These are the stock initial
// data for tests, calibration runs and ensemble families.

#include <random>

#include "eulab/field.hpp"

namespace eulab {

inline ScalarField band_limited_vorticity(Grid grid, int modes, std::uint64_t seed) {
  require(modes >= 1, "need at least one mode");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> coeff(static_cast<std::size_t>(modes) * modes);
  for (auto& c : coeff) c = gauss(rng);
  ScalarField rho(grid);
  std::vector<double> sx(static_cast<std::size_t>(modes) * grid.n);
  for (int k = 0; k < modes; ++k)
    for (int i = 0; i < grid.n; ++i)
      sx[static_cast<std::size_t>(k) * grid.n + i] = std::sin((k + 1) * M_PI * grid.x(i));
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < modes; ++k)
        for (int l = 0; l < modes; ++l)
          acc += coeff[static_cast<std::size_t>(k) * modes + l] *
                 sx[static_cast<std::size_t>(k) * grid.n + i] *
                 sx[static_cast<std::size_t>(l) * grid.n + j];
      rho.at(i, j) = acc;
    }
  }
  return rho;
}

}  // namespace eulab
