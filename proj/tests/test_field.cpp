#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "eulab/bounds.hpp"
#include "eulab/operators.hpp"
#include "eulab/poisson.hpp"
#include "eulab/sampler.hpp"

using namespace eulab;

namespace {

ScalarField eigenfunction(Grid g, int k = 1, int l = 1) {
  ScalarField f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      f.at(i, j) = std::sin(k * M_PI * g.x(i)) * std::sin(l * M_PI * g.y(j));
  return f;
}

ScalarField random_field(Grid g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ScalarField f(g);
  for (double& v : f.data) v = gauss(rng);
  return f;
}

double poisson_l2_error(int n) {
  Grid g(n);
  ScalarField exact = eigenfunction(g);
  ScalarField rhs = exact;
  scale_in_place(rhs, 2.0 * M_PI * M_PI);
  ScalarField psi = poisson_solve(rhs);
  return norm_l2(psi - exact);
}

}  // namespace

TEST_CASE("grid invariants") {
  Grid g(63);
  REQUIRE(g.h * (g.n + 1) == Catch::Approx(1.0).epsilon(1e-15));
  REQUIRE_THROWS_AS(Grid(2), std::invalid_argument);
}

TEST_CASE("poisson solve") {
  Grid g(64);
  PoissonSolver solver(g);

  SECTION("zero rhs gives zero solution") {
    ScalarField psi = solver.solve(ScalarField(g));
    REQUIRE(norm_linf(psi) == 0.0);
  }
  SECTION("analytic eigenfunction recovered at second order") {
    double e64 = poisson_l2_error(64);
    double e128 = poisson_l2_error(128);
    REQUIRE(e64 < 2e-4);
    REQUIRE(e64 / e128 == Catch::Approx(4.0).epsilon(0.2));
  }
  SECTION("discrete residual at round-off for random rhs") {
    ScalarField rhs = random_field(g, 7);
    ScalarField psi = solver.solve(rhs);
    ScalarField residual = laplacian_5pt(psi);
    scale_in_place(residual, -1.0);
    double worst = norm_linf(residual - rhs);
    REQUIRE(worst <= 1e-10 * std::max(1.0, norm_linf(rhs)));
  }
  SECTION("non-finite rhs rejected") {
    ScalarField rhs(g);
    rhs.at(3, 3) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(solver.solve(rhs), std::invalid_argument);
  }
}

TEST_CASE("grad_perp") {
  Grid g(96);
  SECTION("zero field maps to zero") {
    VectorField v = grad_perp(ScalarField(g));
    REQUIRE(norm_linf(v) == 0.0);
  }
  SECTION("analytic derivative of the eigenfunction") {
    ScalarField psi = eigenfunction(g);
    VectorField v = grad_perp(psi);
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.n; ++j) {
        double ux = M_PI * std::sin(M_PI * g.x(i)) * std::cos(M_PI * g.y(j));
        double vy = -M_PI * std::cos(M_PI * g.x(i)) * std::sin(M_PI * g.y(j));
        worst = std::max(worst, std::abs(v.ux(i, j) - ux));
        worst = std::max(worst, std::abs(v.vy(i, j) - vy));
      }
    }
    REQUIRE(worst < 10.0 * g.h * g.h);
  }
}

TEST_CASE("stencil identities on random fields") {
  Grid g(64);
  for (int trial = 0; trial < 10; ++trial) {
    ScalarField psi = random_field(g, 100 + trial);
    VectorField v = grad_perp(psi);
    ScalarField div = divergence(v);
    ScalarField rot = curl(v);
    ScalarField wide = laplacian_wide(psi);
    double scale = std::max(1.0, norm_linf(wide));
    for (int i = 2; i < g.n - 2; ++i) {
      for (int j = 2; j < g.n - 2; ++j) {
        REQUIRE(std::abs(div.at(i, j)) <= 1e-12 * scale);
        REQUIRE(std::abs(rot.at(i, j) + wide.at(i, j)) <= 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("curl") {
  Grid g(96);
  SECTION("constant field has zero curl") {
    VectorField v(g);
    for (double& u : v.u) u = 2.5;
    for (double& w : v.v) w = -1.0;
    REQUIRE(norm_linf(curl(v)) <= 1e-12);
  }
  SECTION("curl of grad_perp matches minus the Laplacian analytically") {
    ScalarField psi = eigenfunction(g);
    ScalarField rot = curl(grad_perp(psi));
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        worst = std::max(worst,
                         std::abs(rot.at(i, j) - 2.0 * M_PI * M_PI * psi.at(i, j)));
    REQUIRE(worst < 120.0 * g.h * g.h);
  }
  SECTION("biot-savart round-trip at second order") {
    auto roundtrip_error = [](int n) {
      Grid gg(n);
      ScalarField rho = eigenfunction(gg);
      scale_in_place(rho, 2.0 * M_PI * M_PI);
      ScalarField back = curl(velocity_from_vorticity(rho));
      return norm_l2(back - rho);
    };
    double e48 = roundtrip_error(48);
    double e96 = roundtrip_error(96);
    REQUIRE(e48 / e96 == Catch::Approx(4.0).margin(1.5));
  }
}

TEST_CASE("velocity_from_vorticity") {
  Grid g(64);
  SECTION("zero vorticity gives zero velocity") {
    REQUIRE(norm_linf(velocity_from_vorticity(ScalarField(g))) == 0.0);
  }
  SECTION("eigenfunction vorticity recovers the analytic velocity") {
    ScalarField rho = eigenfunction(g);
    scale_in_place(rho, 2.0 * M_PI * M_PI);
    VectorField v = velocity_from_vorticity(rho);
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.n; ++j) {
        double ux = M_PI * std::sin(M_PI * g.x(i)) * std::cos(M_PI * g.y(j));
        double vy = -M_PI * std::cos(M_PI * g.x(i)) * std::sin(M_PI * g.y(j));
        worst = std::max({worst, std::abs(v.ux(i, j) - ux), std::abs(v.vy(i, j) - vy)});
      }
    }
    REQUIRE(worst < 20.0 * g.h * g.h);
  }
  SECTION("divergence-free at interior centered-stencil points") {
    ScalarField rho = band_limited_vorticity(g, 8, 5);
    VectorField v = velocity_from_vorticity(rho);
    ScalarField div = divergence(v);
    double scale = std::max(1.0, norm_linf(v) / g.h);
    for (int i = 1; i < g.n - 1; ++i)
      for (int j = 1; j < g.n - 1; ++j)
        REQUIRE(std::abs(div.at(i, j)) <= 1e-12 * scale);
  }
  SECTION("gradient-to-vorticity ratio stays bounded over random fields") {
    PoissonSolver solver(g);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      ScalarField rho = band_limited_vorticity(g, 8, 1000 + t);
      VectorField v = velocity_from_vorticity(solver, rho);
      worst = std::max(worst, grad_norm_lp(v, 4) / norm_lp(rho, 4));
    }
    INFO("empirical L4 gradient/vorticity ratio: " << worst);
    CHECK(worst < 10.0);
  }
}

TEST_CASE("norms") {
  Grid g(64);
  SECTION("zero field") {
    NormReport r = norms(ScalarField(g));
    REQUIRE(r.l2 == 0.0);
    REQUIRE(r.h1 == 0.0);
    REQUIRE(r.linf == 0.0);
    for (auto& [p, v] : r.lp) REQUIRE(v == 0.0);
  }
  SECTION("constant scalar approaches its exact integral") {
    auto l2_of_const = [](int n) {
      Grid gg(n);
      ScalarField f(gg);
      for (double& v : f.data) v = 3.0;
      return norm_l2(f);
    };
    double e32 = std::abs(l2_of_const(32) - 3.0);
    double e64 = std::abs(l2_of_const(64) - 3.0);
    REQUIRE(e64 < e32);
    REQUIRE(e64 < 3.0 * 2.0 / 65.0);
  }
  SECTION("quadrature converges at second order or better on smooth fields") {
    // ||x(1-x)y(1-y)||_L2 = 1/30; for fields vanishing on the boundary the
    // grid-point rule is even fourth order (the h^2 end correction cancels)
    auto l2_err = [](int n) {
      Grid gg(n);
      ScalarField f(gg);
      for (int i = 0; i < gg.n; ++i)
        for (int j = 0; j < gg.n; ++j) {
          double x = gg.x(i), y = gg.y(j);
          f.at(i, j) = x * (1 - x) * y * (1 - y);
        }
      return std::abs(norm_l2(f) - 1.0 / 30.0);
    };
    double e32 = l2_err(32), e64 = l2_err(64);
    REQUIRE(e32 / e64 >= 3.2);
  }
  SECTION("lp ladder is monotone up to quadrature tolerance") {
    for (int t = 0; t < 5; ++t) {
      ScalarField f = random_field(g, 50 + t);
      NormReport r = norms(f);
      REQUIRE(r.lp[2] == Catch::Approx(r.l2).epsilon(1e-13));
      REQUIRE(r.lp[2] <= r.lp[4] * (1 + 1e-12));
      REQUIRE(r.lp[4] <= r.lp[8] * (1 + 1e-12));
      REQUIRE(r.lp[8] <= r.lp[16] * (1 + 1e-12));
      REQUIRE(r.lp[16] <= r.lp[32] * (1 + 1e-12));
      REQUIRE(r.lp[64] <= r.linf * (1 + 1e-12));
    }
  }
}

TEST_CASE("sobolev ratio") {
  Grid g(64);
  ScalarField rho = band_limited_vorticity(g, 6, 3);
  VectorField v = velocity_from_vorticity(rho);
  SECTION("p = 2 ratio cannot exceed 1/sqrt(2)") {
    REQUIRE(sobolev_ratio(v, 2.0) <= 1.0 / std::sqrt(2.0) + 1e-12);
  }
  SECTION("ratios settle into a non-increasing trend in p") {
    double r8 = sobolev_ratio(v, 8);
    double r16 = sobolev_ratio(v, 16);
    double r32 = sobolev_ratio(v, 32);
    INFO("ratios: " << r8 << " " << r16 << " " << r32);
    REQUIRE(r16 <= r8 * (1 + 1e-9));
    REQUIRE(r32 <= r16 * (1 + 1e-9));
  }
  SECTION("zero field rejected") {
    REQUIRE_THROWS_AS(sobolev_ratio(VectorField(g), 4.0), std::invalid_argument);
  }
  SECTION("p outside the supported range rejected") {
    REQUIRE_THROWS_AS(sobolev_ratio(v, 100.0), std::invalid_argument);
  }
}

TEST_CASE("gradient-curl comparison with a calibrated constant") {
  Grid g(64);
  double c = calibrate_grad_curl_constant(g, 8, 77);
  PoissonSolver solver(g);
  for (int t = 0; t < 6; ++t) {
    ScalarField rho = band_limited_vorticity(g, 8, 900 + t);  // held-out fields
    VectorField v = velocity_from_vorticity(solver, rho);
    for (double p : {2.0, 4.0, 8.0, 16.0, 32.0}) {
      double ratio = grad_norm_lp(v, p) * (p - 1.0) / (c * p * p * norm_lp(rho, p));
      REQUIRE(ratio <= 1.0);
    }
  }
}

TEST_CASE("boundary trace integral matches the analytic eigenfunction value") {
  Grid g(128);
  ScalarField psi = eigenfunction(g);
  // tangential speed on each edge is pi |sin(pi s)|; the line integral of its
  // square over the four edges is 4 * pi^2/2
  double num = boundary_speed_sq_integral(psi);
  REQUIRE(num == Catch::Approx(2.0 * M_PI * M_PI).epsilon(0.02));
}
