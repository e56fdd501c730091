#pragma once

// Numerical verification of the geometric identities and asymptotic estimates
// on computed leaves: mean-curvature estimate, Kazdan-Warner centering and
// identity, uniformizing conformal factor, mass extraction, decay-rate fits.

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cmcfol/cmc_solver.hpp"

namespace cmcfol::diag {

using spectral::ScalarField;

struct DecayFit {
  enum class Verdict { fit, underflow };
  Verdict verdict = Verdict::fit;
  double slope = 0.0;
  double std_error = 0.0;
  int points_used = 0;
};

// Least-squares fit of log|value| against r; values at or below the underflow
// floor are dropped (all dropped -> "consistent with rapid decay" verdict).
DecayFit decay_fit(const std::vector<std::pair<double, double>>& series,
                   double underflow_floor = 1e-14);

// H^2 - 4 - 16 pi / |Sigma| for the leaf's constant mean curvature.
double mean_curvature_estimate_residual(const solver::CmcLeaf& leaf);

// Effective radius: solves H = 2 cosh(rt)/sinh(rt) - m/sinh^3(rt) with the
// known mass (Newton).  Throws std::domain_error when H <= 2.
double effective_radius(double mass, double h);

// Mass estimate from the leaf alone: m_hat = (2 cosh(ra)/sinh(ra) - H) sinh^3(ra)
// with ra the area radius; deliberately independent of the input mass.
double mass_estimate(double h, double area);

struct Centering {
  std::array<double, 3> raw = {};         // integral of x_i e^{-3w} dmu_0
  std::array<double, 3> normalized = {};  // raw / integral of e^{-3w} dmu_0
  double denom = 0.0;
  double norm() const;
  double normalized_norm() const;
};
Centering kazdan_warner_centering(const solver::CmcLeaf& leaf, double r_tilde);

// The three obstruction integrals: integral of <grad K_hat, grad x_i> e^{2 beta} dmu_0.
std::array<double, 3> kazdan_warner_identity_residual(const ScalarField& k_hat,
                                                      const ScalarField& beta);

struct ConformalFactor {
  ScalarField beta;
  ScalarField k_hat;  // curvature of the normalized metric, final parametrization
  double sup_beta = 0.0;
  int iterations = 0;
  double residual = 0.0;            // sup |Delta_0 beta - 1 + K_hat e^{2 beta}|, l != 1 part
  double kernel_obstruction = 0.0;  // sup of the l = 1 residual left by the projection
  std::array<double, 3> centering = {};  // integral of x_i e^{2 beta} after recentering
};

// Solves Delta_0 beta = 1 - K_hat e^{2 beta} for the normalized induced metric
// (4 pi / |Sigma|) ghat in the graph parametrization, with the l=1 kernel
// handled by projection and the normalization int x_i e^{2 beta} = 0 enforced
// by Moebius recentering of the parametrization.
ConformalFactor conformal_factor(const solver::CmcLeaf& leaf);

struct LeafReport {
  double base_radius = 0.0;
  double area = 0.0;
  double area_radius = 0.0;
  double target_h = 0.0;
  double achieved_h = 0.0;
  double sup_h_deviation = 0.0;
  double sup_phi = 0.0;
  int iterations = 0;
  bool converged = false;
  bool ball_violated = false;
  double lambda_min = 0.0;
  double eigen_residual = 0.0;
  double gauss_bonnet_residual = 0.0;  // integral of K dmu - 4 pi (Gauss-equation route)
  double dual_k_gap = 0.0;             // sup |K_gauss - K_brioschi|
  double lemma_h_residual = 0.0;       // H^2 - 4 - 16 pi / |Sigma|
  double r_tilde = 0.0;
  double mass_estimate = 0.0;
  std::array<double, 3> kw_raw = {};
  std::array<double, 3> kw_normalized = {};
  double kw_norm = 0.0;  // |normalized centering|
  double sup_beta = 0.0;
  double beta_residual = 0.0;
  double beta_kernel_obstruction = 0.0;
  std::array<double, 3> kw_identity = {};
  double kw_identity_norm = 0.0;
  double curvature_formula_residual = 0.0;  // Gauss-equation expansion, sup norm
  double laplace_identity_sup = 0.0;
  double sup_radial_tangent = 0.0;  // sup |d_r^T|^2
  double radial_tangent_integral = 0.0;
  double rho_spread = 0.0;  // max rho - min rho
  double min_rho = 0.0;
  double sup_w = 0.0;  // sup |rho - r_tilde|
  // integral of 4 e^{-2 rho} dmu: approaches 4 pi as the leaves grow (the
  // chart-based analogue of the Euclidean-area limit, which reads pi in the
  // unit-ball normalization)
  double euclidean_area_proxy = 0.0;
};

LeafReport make_leaf_report(const solver::CmcLeaf& leaf, const ambient::AmbientMetric& metric);

struct FoliationReport {
  std::vector<LeafReport> leaves;
  bool complete = false;
  int failure_index = -1;
  double min_separation = 0.0;
  double mass_spread = 0.0;  // max over leaves of |m_hat - m| / max(m, 1)
  std::map<std::string, DecayFit> fits;
};

// Per-leaf reports plus foliation-wide decay fits (abscissa: min rho).
FoliationReport make_foliation_report(const solver::Foliation& foliation,
                                      const ambient::AmbientMetric& metric);

}  // namespace cmcfol::diag
