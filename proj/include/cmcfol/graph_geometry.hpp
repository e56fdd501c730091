#pragma once

// Extrinsic and intrinsic geometry of radial-graph spheres
// Sigma = {(rho(omega), omega)} in an ambient metric: fundamental forms, mean
// curvature, Gauss curvature by two routes, radial decomposition, surface
// Laplacian, and the stability operator.

#include <Eigen/Dense>

#include "cmcfol/ambient_metric.hpp"
#include "cmcfol/sphere_spectral.hpp"

namespace cmcfol::geometry {

using spectral::GridPtr;
using spectral::ScalarField;

struct RadialGraph {
  GridPtr grid;
  ScalarField rho;
  const ambient::AmbientMetric* metric = nullptr;

  // Validates horizon clearance and finiteness.
  RadialGraph(GridPtr grid, ScalarField rho, const ambient::AmbientMetric& metric);
};

struct GeometryOptions {
  bool curvature = true;        // ambient curvature contractions, Gauss-equation K
  bool intrinsic_gauss = true;  // Brioschi K from the induced metric (third derivatives)
};

struct LeafGeometry {
  GridPtr grid;

  // induced metric in the (theta, phi) chart at the nodes, its inverse, and
  // the area element ratio J = sqrt(det ghat) / sin(theta)
  std::vector<double> g_tt, g_tp, g_pp;
  std::vector<double> inv_tt, inv_tp, inv_pp;
  std::vector<double> area_element;
  // surface Christoffel symbols, [node*6 + (k*3 + sym(ij))], sym: 00,01,11
  std::vector<double> surf_gamma;

  double area = 0.0;
  double area_radius = 0.0;  // |Sigma| = 4 pi sinh^2(area_radius)

  ScalarField mean_curvature;             // H, positive for coordinate spheres
  ScalarField second_form_norm_sq;        // |A|^2
  ScalarField traceless_norm_sq;          // |Aring|^2 = |A|^2 - H^2/2, clamped at 0
  ScalarField normal_radial;              // <d_r, nu>
  ScalarField radial_tangent_sq;          // |d_r^T|^2
  ScalarField ricci_normal;               // ambient Ric(nu, nu)
  ScalarField gauss_curvature;            // path A: Gauss equation
  ScalarField gauss_curvature_intrinsic;  // path B: Brioschi from ghat
};

LeafGeometry compute_geometry(const RadialGraph& graph, const GeometryOptions& opts = {});

// Laplace-Beltrami of f on the leaf: ghat^{ij} (f_ij - Gamma^k_ij f_k) with
// spectral derivatives of f and the stored surface Christoffels.
ScalarField surface_laplacian(const LeafGeometry& geom, const ScalarField& f);

// Pointwise residual of the detailed radial-Laplacian identity
//   Delta rho = 2 cosh rho/sinh rho - m/sinh^3 rho - H
//             + (H-2)(1 - <d_r,nu>) + (1 - <d_r,nu>)^2 - 2 |d_r^T|^2 e^{-2 rho},
// which should be O(e^{-5 rho}) on near-round leaves.
ScalarField laplace_identity_residual(const RadialGraph& graph, const LeafGeometry& geom);

// Weak-form matrices of the second-variation operator
//   L = -Delta_ghat - (|A|^2 + Ric(nu,nu))
// on harmonics of degree <= band_limit, quadrature on the geometry's grid:
//   op_jk   = int [ ghat^{ab} d_a Y_j d_b Y_k - W Y_j Y_k ] dmu
//   mass_jk = int Y_j Y_k dmu.
// Requires a geometry computed with curvature on.
void assemble_variation_matrices(const LeafGeometry& geom, int band_limit, Eigen::MatrixXd& op,
                                 Eigen::MatrixXd& mass);

struct StabilityReport {
  int band_limit = 0;          // harmonic subspace carrying the dense matrices
  int quadrature_band = 0;     // grid used for assembly
  Eigen::MatrixXd op_matrix;   // weak form of L = -Delta_ghat - (|A|^2 + Ric(nu,nu))
  Eigen::MatrixXd mass_matrix;
  double lambda_min = 0.0;     // smallest eigenvalue on the mean-zero subspace
  ScalarField eigenfield;
  double eigen_residual = 0.0;  // ||L f - lambda f||_mu / ||f||_mu
};

// Dense symmetric eigensolve of the second-variation operator restricted to
// harmonics of degree <= band_limit, with the constant mode projected out.
// quadrature_band < 0 selects max(2 * band_limit, 24).
StabilityReport stability_spectrum(const RadialGraph& graph, int band_limit,
                                   int quadrature_band = -1);

}  // namespace cmcfol::geometry
