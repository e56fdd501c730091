#pragma once

// Quadrature grid and transform plan for scalar spherical-harmonic analysis
// on the round unit sphere: Gauss-Legendre latitudes x equispaced longitudes.

#include <memory>
#include <vector>

namespace cmcfol::spectral {

// Index of the real harmonic (l, m) in a flat coefficient array,
// l in [0, L], m in [-l, l].  m > 0 are cos(m phi) modes, m < 0 sin(|m| phi).
inline int sh_index(int l, int m) { return l * l + l + m; }

inline int sh_coeff_count(int band_limit) { return (band_limit + 1) * (band_limit + 1); }

// A band-limit-L grid with L+1 Gauss-Legendre latitudes and 2L+2 equispaced
// longitudes.  The quadrature is exact for integrands of spherical-harmonic
// degree <= 2L+1, so products of two band-limited fields integrate exactly.
// Immutable after construction; share freely across threads.
class SphereGrid {
 public:
  static constexpr int kMinBandLimit = 2;
  static constexpr int kMaxBandLimit = 512;

  static std::shared_ptr<const SphereGrid> create(int band_limit);

  int band_limit() const { return band_limit_; }
  int n_theta() const { return band_limit_ + 1; }
  int n_phi() const { return 2 * band_limit_ + 2; }
  int n_nodes() const { return n_theta() * n_phi(); }
  int n_coeffs() const { return sh_coeff_count(band_limit_); }

  // Latitudes run north to south: theta strictly increasing in (0, pi).
  double theta(int j) const { return theta_[j]; }
  double cos_theta(int j) const { return cos_theta_[j]; }
  double sin_theta(int j) const { return sin_theta_[j]; }
  double phi(int k) const { return dphi_ * k; }
  double dphi() const { return dphi_; }

  // Gauss-Legendre weight in x = cos(theta); sum over j equals 2.
  double gl_weight(int j) const { return gl_weight_[j]; }
  // Full measure weight of one node: sum over all nodes of f * node_weight
  // is the quadrature for integral of f dmu_0 (weights sum to 4 pi).
  double node_weight(int j) const { return gl_weight_[j] * dphi_; }

  // Longitude trig tables, m in [0, band_limit].
  double cos_m_phi(int m, int k) const { return trig_cos_[m * n_phi() + k]; }
  double sin_m_phi(int m, int k) const { return trig_sin_[m * n_phi() + k]; }

  int node_index(int j, int k) const { return j * n_phi() + k; }

 private:
  explicit SphereGrid(int band_limit);

  int band_limit_;
  double dphi_;
  std::vector<double> theta_, cos_theta_, sin_theta_, gl_weight_;
  std::vector<double> trig_cos_, trig_sin_;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

// Fully normalized associated Legendre column at a fixed colatitude:
// walks l = m, m+1, ..., producing Qbar_{lm}(cos theta) with
// integral over [-1,1] of Qbar^2 dx = 1, Condon-Shortley phase omitted.
// Real harmonics are Qbar_{l0}/sqrt(2 pi) and sqrt(1/pi) Qbar_{lm} trig(m phi).
class LegendreColumn {
 public:
  LegendreColumn(int m, double cos_theta, double sin_theta);

  // Value and theta-derivative at the current degree l.
  int l() const { return l_; }
  double value() const { return p_; }
  double dtheta() const { return dp_; }
  void advance();  // step l -> l+1

 private:
  int m_, l_;
  double x_, s_;        // cos theta, sin theta
  double p_, pm1_, dp_; // Qbar_l, Qbar_{l-1}, dQbar_l/dtheta
};

}  // namespace cmcfol::spectral
