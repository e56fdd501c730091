#pragma once

// Constructs CMC leaves and foliations by the contraction map
//   Delta_0 T(phi) + (2 - 3m/sinh r) T(phi) = P(phi) + Q(phi) + N,
// with optional Newton refinement and radial continuation.

#include <optional>
#include <vector>

#include "cmcfol/graph_geometry.hpp"

namespace cmcfol::solver {

using spectral::GridPtr;
using spectral::ScalarField;

struct SolverConfig {
  int band_limit = 32;
  double picard_tol = 1e-10;   // sup-norm of the iterate difference
  int max_iters = 200;
  bool newton = false;         // Newton refinement after a Picard warm-up
  bool ball_check = true;      // flag iterates leaving sup|phi| <= e^{-r}/r
  bool project_kernel = false; // m = 0 fallback: solve on the mean-zero, l != 1 complement
  double continuation_step = 0.25;
  double padding_factor = 1.5; // geometry grid oversampling for nonlinear terms
  int stability_band = 16;

  void validate() const;  // throws ConfigError
};

// The model target H(r) = 2 cosh r / sinh r - m / sinh^3 r.
// Checked to be strictly decreasing at r (throws std::domain_error otherwise).
double target_mean_curvature(double mass, double r);

struct TDecomposition {
  ScalarField n_term;    // N: phi-independent, O(e^{-3r})
  ScalarField p_plus_q;  // exact remainder P(phi) + Q(phi); zero at phi = 0
  ScalarField rhs() const { return n_term + p_plus_q; }
};

struct IterationRecord {
  double sup_phi = 0.0;
  double update = 0.0;
  bool in_ball = true;
};

struct CmcLeaf {
  double base_radius = 0.0;
  double target_h = 0.0;
  double achieved_h = 0.0;       // area average of H over the leaf
  double sup_h_deviation = 0.0;  // sup |H - target| on the geometry grid
  ScalarField phi;               // solver-band graph offset
  int iterations = 0;
  bool converged = false;
  bool ball_violated = false;
  double final_update = 0.0;
  double sup_phi = 0.0;
  double sup_grad_phi = 0.0;  // sup-norm surrogates for the C^2 ball monitor
  double sup_lap_phi = 0.0;
  double ball_radius = 0.0;   // e^{-r}/r
  std::vector<IterationRecord> history;
  geometry::LeafGeometry geom;  // on the padded geometry grid
  geometry::StabilityReport stability;
  GridPtr solver_grid, geometry_grid;
};

struct Foliation {
  std::vector<CmcLeaf> leaves;
  // min over consecutive pairs of the nodewise gap rho_{k+1} - rho_k
  double min_separation = 0.0;
  bool complete = false;
  int failure_index = -1;
};

struct ProbeReport {
  int axis = 0;
  double amplitude = 0.0;
  bool converged = false;
  bool returned_to_original = false;
  double distance = 0.0;  // sup |phi_probe - phi_original|
  int iterations = 0;
};

class LeafSolver {
 public:
  LeafSolver(const ambient::AmbientMetric& metric, SolverConfig config);

  const SolverConfig& config() const { return config_; }
  const ambient::AmbientMetric& metric() const { return *metric_; }
  GridPtr solver_grid() const { return sgrid_; }
  GridPtr geometry_grid() const { return ggrid_; }

  // Pointwise mean curvature of Sigma_r(phi), truncated to the solver band.
  ScalarField mean_curvature_field(double r, const ScalarField& phi) const;

  TDecomposition residual_decomposition(double r, const ScalarField& phi) const;
  ScalarField picard_step(double r, const ScalarField& phi) const;

  CmcLeaf solve_leaf(double r, const ScalarField* seed = nullptr) const;
  Foliation foliate(double r_min, double r_max, double dr) const;
  // step taken from the configured continuation_step
  Foliation foliate(double r_min, double r_max) const;
  ProbeReport uniqueness_probe(const CmcLeaf& leaf, int axis, double amplitude) const;

 private:
  struct LeafContext {
    double r = 0.0;
    double target = 0.0;
    double coeff = 0.0;       // c = 2 - 3 m / sinh r
    double round_area = 0.0;  // |Sigma_r(0)|
    ScalarField n_term;       // N
  };
  LeafContext make_context(double r) const;
  ScalarField curvature_gap(const LeafContext& ctx, const ScalarField& phi) const;
  ScalarField rhs_field(const LeafContext& ctx, const ScalarField& phi) const;
  ScalarField solve_linear(const LeafContext& ctx, const ScalarField& rhs,
                           const ScalarField& phi_kernel) const;
  ScalarField newton_correction(const LeafContext& ctx, const ScalarField& phi) const;

  const ambient::AmbientMetric* metric_;
  SolverConfig config_;
  GridPtr sgrid_, ggrid_;
};

}  // namespace cmcfol::solver
