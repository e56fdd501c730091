#include <cmath>
#include <numbers>
#include <vector>

#include "cmcfol/diagnostics.hpp"
#include "cmcfol/errors.hpp"
#include "doctest.h"

using namespace cmcfol;
using namespace cmcfol::diag;
using spectral::ScalarField;

namespace {

constexpr double kPi = std::numbers::pi;

solver::SolverConfig small_config(int band = 16) {
  solver::SolverConfig cfg;
  cfg.band_limit = band;
  cfg.stability_band = 8;
  return cfg;
}

}  // namespace

TEST_CASE("decay fit") {
  SUBCASE("exact exponential") {
    std::vector<std::pair<double, double>> s;
    for (double r = 3.0; r <= 8.0; r += 1.0) s.emplace_back(r, std::exp(-3.0 * r));
    DecayFit fit = decay_fit(s);
    CHECK(fit.verdict == DecayFit::Verdict::fit);
    CHECK(fit.slope == doctest::Approx(-3.0).epsilon(1e-6));
    CHECK(fit.std_error < 1e-6);
  }
  SUBCASE("noisy exponential") {
    std::vector<std::pair<double, double>> s;
    for (double r = 3.0; r <= 8.0; r += 0.5) {
      s.emplace_back(r, std::exp(-3.0 * r) * (1.0 + 0.1 * std::sin(7.0 * r)));
    }
    DecayFit fit = decay_fit(s);
    CHECK(fit.slope == doctest::Approx(-3.0).epsilon(0.1 / 3.0));
  }
  SUBCASE("all values underflow") {
    std::vector<std::pair<double, double>> s = {{3, 0.0}, {4, 0.0}, {5, 1e-16}, {6, 0.0}};
    DecayFit fit = decay_fit(s);
    CHECK(fit.verdict == DecayFit::Verdict::underflow);
    CHECK(fit.points_used <= 1);
  }
  SUBCASE("too few points") {
    std::vector<std::pair<double, double>> s = {{3, 1.0}, {4, 0.1}};
    CHECK_THROWS_AS(decay_fit(s), std::invalid_argument);
  }
}

TEST_CASE("effective radius and mass estimate") {
  SUBCASE("round trip through the model curvature") {
    // the root is conditioned like 1/H'(r) ~ e^{2r}, so the attainable
    // accuracy degrades toward large radii
    for (double r : {3.0, 4.5, 7.0}) {
      const double h = solver::target_mean_curvature(1.0, r);
      CHECK(effective_radius(1.0, h) == doctest::Approx(r).epsilon(1e-9));
    }
  }
  SUBCASE("H <= 2 is out of range") {
    CHECK_THROWS_AS(effective_radius(1.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(effective_radius(1.0, 1.5), std::domain_error);
  }
  SUBCASE("mass recovery improves like e^{-2r} on exact round leaves") {
    ambient::AdsSchwarzschild bg(1.0);
    std::vector<std::pair<double, double>> série;
    for (double r = 4.0; r <= 8.01; r += 1.0) {
      const double s = bg.s_of_r(r);
      const double h = 2.0 * std::sqrt(1.0 + s * s - 1.0 / s) / s;
      const double area = 4.0 * kPi * s * s;
      série.emplace_back(r, std::abs(mass_estimate(h, area) - 1.0));
    }
    DecayFit fit = decay_fit(série);
    CHECK(fit.slope <= -2.0 + 0.3);
  }
}

TEST_CASE("hyperbolic leaf diagnostics are exact") {
  ambient::AmbientMetric metric{ambient::AdsSchwarzschild(0.0)};
  auto cfg = small_config();
  cfg.project_kernel = true;
  solver::LeafSolver lsolver(metric, cfg);
  solver::CmcLeaf leaf = lsolver.solve_leaf(3.0);
  REQUIRE(leaf.converged);

  SUBCASE("curvature-area residual vanishes: coth^2 - 1 = 1/sinh^2") {
    CHECK(std::abs(mean_curvature_estimate_residual(leaf)) < 1e-8);
  }
  SUBCASE("extracted mass is zero") {
    CHECK(std::abs(mass_estimate(leaf.achieved_h, leaf.geom.area)) < 1e-8);
  }
  SUBCASE("round leaf centers at the origin") {
    Centering c = kazdan_warner_centering(leaf, 3.0);
    CHECK(c.norm() < 1e-10);
    CHECK(c.denom > 0.0);
  }
  SUBCASE("conformal factor vanishes on the round leaf") {
    ConformalFactor cf = conformal_factor(leaf);
    CHECK(cf.sup_beta < 1e-8);
  }
}

TEST_CASE("Kazdan-Warner identity integrals") {
  auto grid = spectral::SphereGrid::create(16);
  auto x = spectral::coordinate_functions(grid);
  SUBCASE("constant curvature gives exact zeros") {
    ScalarField khat = ScalarField::constant(grid, 1.0);
    ScalarField beta = ScalarField::constant(grid, 0.0);
    auto resid = kazdan_warner_identity_residual(khat, beta);
    for (double v : resid) CHECK(std::abs(v) < 1e-14);
  }
  SUBCASE("a deliberately inconsistent pair shows the documented violation") {
    ScalarField khat = ScalarField::constant(grid, 1.0) + x[2] * 0.1;
    ScalarField beta = ScalarField::constant(grid, 0.0);
    auto resid = kazdan_warner_identity_residual(khat, beta);
    CHECK(std::abs(resid[0]) < 1e-12);
    CHECK(std::abs(resid[1]) < 1e-12);
    CHECK(resid[2] == doctest::Approx(0.1 * 8.0 * kPi / 3.0).epsilon(1e-10));
  }
}

TEST_CASE("translated hyperbolic leaf has a visible centering vector") {
  ambient::AmbientMetric metric{ambient::AdsSchwarzschild(0.0)};
  auto cfg = small_config();
  cfg.project_kernel = true;
  cfg.ball_check = false;
  solver::LeafSolver lsolver(metric, cfg);
  solver::CmcLeaf origin = lsolver.solve_leaf(4.0);
  auto x = spectral::coordinate_functions(lsolver.solver_grid());
  ScalarField seed = origin.phi + x[0] * 0.1;
  solver::CmcLeaf moved = lsolver.solve_leaf(4.0, &seed);
  REQUIRE(moved.converged);
  Centering c = kazdan_warner_centering(moved, 4.0);
  CHECK(std::abs(c.normalized[0]) > 0.05);
  CHECK(std::abs(c.normalized[1]) < 1e-6);
}

TEST_CASE("conformal factor on a genuinely bent leaf") {
  ambient::Perturbation q(1, 0, ambient::ChartComponent::thetatheta, 1e-2);
  ambient::AmbientMetric metric{ambient::AdsSchwarzschild(1.0), q};
  solver::LeafSolver lsolver(metric, small_config());
  solver::CmcLeaf leaf = lsolver.solve_leaf(4.0);
  REQUIRE(leaf.converged);

  ConformalFactor cf = conformal_factor(leaf);
  SUBCASE("uniformization equation satisfied off the kernel") {
    CHECK(cf.residual <= 1e-10);
    CHECK(cf.sup_beta > 0.0);
    CHECK(cf.sup_beta < 0.1);
  }
  SUBCASE("centering normalization holds") {
    for (double v : cf.centering) CHECK(std::abs(v) < 1e-9);
  }
  SUBCASE("conformal Gauss-Bonnet") {
    const auto& grid = *leaf.geometry_grid;
    std::vector<double> integrand = cf.k_hat.samples();
    const auto& bs = cf.beta.samples();
    for (int n = 0; n < grid.n_nodes(); ++n) integrand[n] *= std::exp(2.0 * bs[n]);
    double gb = 0.0;
    for (int j = 0; j < grid.n_theta(); ++j) {
      for (int k = 0; k < grid.n_phi(); ++k) gb += grid.node_weight(j) * integrand[grid.node_index(j, k)];
    }
    CHECK(gb == doctest::Approx(4.0 * kPi).epsilon(1e-6));
  }
  SUBCASE("Kazdan-Warner residual bounded by the approximation error") {
    auto resid = kazdan_warner_identity_residual(cf.k_hat, cf.beta);
    const double sup_grad =
        std::sqrt(spectral::gradient(cf.k_hat).norm_squared().sup_norm());
    const double norm = std::sqrt(resid[0] * resid[0] + resid[1] * resid[1] + resid[2] * resid[2]);
    CHECK(norm <= 1e-3 * std::max(sup_grad, 1e-6));
  }
}

TEST_CASE("full leaf report and foliation fits") {
  ambient::Perturbation q(1, 0, ambient::ChartComponent::rr, 1e-3);
  ambient::AmbientMetric metric{ambient::AdsSchwarzschild(1.0), q};
  solver::LeafSolver lsolver(metric, small_config());
  solver::Foliation fol = lsolver.foliate(4.0, 6.0, 0.5);
  REQUIRE(fol.complete);

  FoliationReport rep = make_foliation_report(fol, metric);
  REQUIRE(rep.leaves.size() == 5);
  CHECK(rep.min_separation > 0.0);
  CHECK(rep.mass_spread < 0.02);

  for (const auto& lr : rep.leaves) {
    CHECK(lr.converged);
    CHECK(std::abs(lr.gauss_bonnet_residual) < 1e-6 * 4.0 * kPi);
    CHECK(lr.dual_k_gap < 1e-5);
    CHECK(lr.lemma_h_residual < 0.0);  // the -2mH/sinh^3 term dominates for m > 0
    CHECK(std::abs(lr.mass_estimate - 1.0) < 0.02);
    CHECK(lr.lambda_min > -1e-6);
    CHECK(std::isfinite(lr.sup_beta));
    CHECK(std::isfinite(lr.kw_norm));
    CHECK(lr.r_tilde == doctest::Approx(lr.base_radius).epsilon(1e-3));
  }
  REQUIRE(rep.fits.count("lemma_h_residual") == 1);
  CHECK(rep.fits.at("lemma_h_residual").slope <= -3.0 + 0.3);
  REQUIRE(rep.fits.count("kw_centering") == 1);
  CHECK(rep.fits.at("kw_centering").slope <= -1.0 + 0.5);
  REQUIRE(rep.fits.count("sup_w") == 1);
  CHECK(rep.fits.at("sup_w").slope <= -1.0);
  REQUIRE(rep.fits.count("curvature_formula_residual") == 1);
  CHECK(rep.fits.at("curvature_formula_residual").slope <= -5.0 + 0.3);
  REQUIRE(rep.fits.count("rho_spread") == 1);
  CHECK(rep.fits.at("rho_spread").slope < 0.0);
  REQUIRE(rep.fits.count("laplace_identity") == 1);
  CHECK(rep.fits.at("laplace_identity").slope <= -5.0 + 0.3);

  // graph offsets shrink across the foliation at least like e^{-r}
  {
    std::vector<std::pair<double, double>> sup_phi;
    for (const auto& lr : rep.leaves) sup_phi.emplace_back(lr.min_rho, lr.sup_phi);
    CHECK(decay_fit(sup_phi).slope <= -1.0);
  }
  // Prop 3.4 residual on solved leaves: the constant carries the background
  // mass term, not just the perturbation amplitude
  for (const auto& lr : rep.leaves) {
    CHECK(lr.laplace_identity_sup <= 30.0 * (1.0 + 1e-3) * std::exp(-5.0 * lr.min_rho));
  }
  // chart-based Euclidean-area limit: integral of 4 e^{-2 rho} dmu -> 4 pi
  for (const auto& lr : rep.leaves) {
    CHECK(std::abs(lr.euclidean_area_proxy / (4.0 * kPi) - 1.0) <
          3.0 * std::exp(-2.0 * lr.min_rho));
  }
}
