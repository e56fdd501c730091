#pragma once

// Scalar fields on S^2 with dual grid/harmonic representation, exact-quadrature
// transforms, Laplace-Beltrami calculus and Helmholtz solves.

#include <array>
#include <functional>
#include <vector>

#include "cmcfol/sphere_grid.hpp"

namespace cmcfol::spectral {

// A real function on S^2, held as grid samples and/or harmonic coefficients.
// Whichever representation is missing is produced on demand; band limitation
// to the grid's L is enforced by hard truncation in analysis.
class ScalarField {
 public:
  ScalarField() = default;

  static ScalarField from_samples(GridPtr grid, std::vector<double> samples);
  static ScalarField from_coeffs(GridPtr grid, std::vector<double> coeffs);
  static ScalarField constant(GridPtr grid, double value);
  static ScalarField from_function(GridPtr grid, const std::function<double(double, double)>& f);

  bool empty() const { return grid_ == nullptr; }
  const GridPtr& grid() const { return grid_; }

  const std::vector<double>& samples() const;  // synthesizes if needed
  const std::vector<double>& coeffs() const;   // analyzes if needed (throws NumericError on non-finite samples)

  double coeff(int l, int m) const { return coeffs()[sh_index(l, m)]; }
  double sup_norm() const;
  double l2_norm() const;  // sqrt of integral of f^2 dmu_0

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double scale);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

 private:
  GridPtr grid_;
  mutable std::vector<double> samples_, coeffs_;
  mutable bool have_samples_ = false, have_coeffs_ = false;
};

// Tangent vector field in the orthonormal frame (e_theta, e_phi) of g_0.
struct TangentField {
  GridPtr grid;
  std::vector<double> comp_theta, comp_phi;

  // |V|^2 with respect to g_0 at every node.
  ScalarField norm_squared() const;
};

// Samples of a field and its coordinate derivatives at the grid nodes,
// synthesized from harmonic coefficients (exact for band-limited input).
struct FieldJet {
  int order = 0;
  std::vector<double> f, ft, fp;                  // order >= 1
  std::vector<double> ftt, ftp, fpp;              // order >= 2
  std::vector<double> fttt, fttp, ftpp, fppp;     // order >= 3
};

// Coefficients may belong to a smaller band limit than the grid (the square
// length determines the source band limit); they are implicitly zero-padded.
FieldJet synthesize_jet(const SphereGrid& grid, const std::vector<double>& coeffs, int order);

std::vector<double> analyze_samples(const SphereGrid& grid, const std::vector<double>& samples);
std::vector<double> synthesize_samples(const SphereGrid& grid, const std::vector<double>& coeffs);

// Truncate or zero-pad a coefficient vector to the given band limit.
std::vector<double> reband_coeffs(const std::vector<double>& coeffs, int band_limit);

// Pointwise synthesis at an arbitrary angle (no grid involved).
double evaluate_coeffs_at(const std::vector<double>& coeffs, double theta, double phi);

// --- module operations ---

ScalarField synthesize(GridPtr grid, std::vector<double> coeffs);

// Coefficients multiplied by -l(l+1).
ScalarField laplacian(const ScalarField& f);

TangentField gradient(const ScalarField& f);

// <grad a, grad b> with respect to g_0, pointwise.
ScalarField gradient_inner(const ScalarField& a, const ScalarField& b);

double integrate(const ScalarField& f);
double inner_product(const ScalarField& a, const ScalarField& b);

// Band-limited product: both factors synthesized on an oversampled grid,
// multiplied pointwise, analyzed there and truncated back, so that the
// retained coefficients are alias-free for band-limited inputs.
ScalarField multiply_dealiased(const ScalarField& a, const ScalarField& b,
                               double padding_factor = 1.5);

// Represent the field on another grid through its coefficients (zero-pad on
// refinement, hard-truncate on coarsening).
ScalarField resample(const ScalarField& f, GridPtr target);

// Solve (Delta_0 + c) u = f.  Constant c is a diagonal solve in the harmonic
// basis; a singular mode |c - l(l+1)| below the relative threshold raises
// SingularOperatorError carrying the offending eigenvalue and degree.
ScalarField solve_helmholtz(double c, const ScalarField& f,
                            double singular_threshold = 1e-8);

// Variable coefficient: dense operator in the harmonic basis (constant part
// diagonal, multiplication assembled by dealiased quadrature) and a direct
// solve with an SVD-based singularity check at the same relative threshold.
ScalarField solve_helmholtz(const ScalarField& c, const ScalarField& f,
                            double singular_threshold = 1e-8);

// Apply Delta_0 + c with the same dealiasing convention as the dense solve;
// the independent residual check for solve_helmholtz.
ScalarField apply_helmholtz(const ScalarField& c, const ScalarField& u);

// x_i(theta, phi) = (sin t cos p, sin t sin p, cos t).
std::array<ScalarField, 3> coordinate_functions(GridPtr grid);

}  // namespace cmcfol::spectral
