#pragma once

// The Anti-de Sitter-Schwarzschild background: horizon, the s <-> r
// coordinate change, and the warp function psi(r) = s(r) of
//   g_m = dr^2 + psi(r)^2 g_0 = (1+s^2-m/s)^{-1} ds^2 + s^2 g_0.

namespace cmcfol::ambient {

// Positive root of 1 + s^2 - m/s (i.e. of s^3 + s = m); zero for m = 0.
double horizon_radius(double mass);

class AdsSchwarzschild {
 public:
  explicit AdsSchwarzschild(double mass);

  double mass() const { return mass_; }
  double horizon() const { return horizon_; }
  // Additive normalization of r: fixed so that psi(r)^2 = sinh^2 r +
  // m/(3 sinh r) + O(e^{-3r}); zero in this normalization.
  double matching_constant() const { return matching_constant_; }
  // r below which the chart is unusable (image of the horizon plus margin).
  double min_radius() const { return min_radius_; }

  // r(s) = arcsinh(s) - integral_s^inf [ (1+u^2-m/u)^{-1/2} - (1+u^2)^{-1/2} ] du.
  double r_of_s(double s) const;
  // Inverse of r_of_s by Newton iteration; ds/dr = sqrt(1+s^2-m/s).
  double s_of_r(double r) const;

  double psi(double r) const { return s_of_r(r); }
  // Radial derivatives of psi, exact functions of psi itself:
  //   psi'   = sqrt(1 + psi^2 - m/psi)
  //   psi''  = psi + m/(2 psi^2)
  //   psi''' = psi' (1 - m/psi^3)
  //   psi'''' = psi'' (1 - m/psi^3) + 3 m psi'^2 / psi^4
  double dpsi(double psi_value) const;
  double d2psi(double psi_value) const;
  double d3psi(double psi_value) const;
  double d4psi(double psi_value) const;

 private:
  double mass_, horizon_, matching_constant_, min_radius_;
};

// Warp evaluation for a cloud of radii near a common anchor, as produced by a
// radial graph: exact inversion at the anchor, quintic Taylor steps for the
// per-node offsets, exact fallback for offsets beyond the Taylor range.
class WarpSampler {
 public:
  static constexpr double kTaylorRange = 0.02;

  WarpSampler(const AdsSchwarzschild& background, double anchor_r);
  double psi(double r) const;

 private:
  const AdsSchwarzschild* background_;
  double anchor_r_, anchor_psi_;
  double c1_, c2_, c3_, c4_, c5_;  // Taylor coefficients of psi about the anchor
};

}  // namespace cmcfol::ambient
