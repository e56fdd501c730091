#include "cmcfol/ads_metric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cmcfol/errors.hpp"

namespace cmcfol::ambient {

namespace {

// Margin above the horizon image kept out of the working chart.
constexpr double kHorizonMargin = 0.1;

}  // namespace

double horizon_radius(double mass) {
  if (mass < 0.0) throw std::domain_error("mass must be nonnegative");
  if (mass == 0.0) return 0.0;
  // s^3 + s - m = 0 has a single real root; Newton from s = cbrt(m).
  double s = std::cbrt(mass);
  for (int it = 0; it < 100; ++it) {
    const double f = s * s * s + s - mass;
    const double df = 3.0 * s * s + 1.0;
    const double ds = f / df;
    s -= ds;
    if (std::abs(ds) <= 1e-15 * std::max(1.0, s)) break;
  }
  return s;
}

AdsSchwarzschild::AdsSchwarzschild(double mass)
    : mass_(mass), horizon_(horizon_radius(mass)), matching_constant_(0.0) {
  if (mass_ == 0.0) {
    min_radius_ = 1e-6;
  } else {
    min_radius_ = r_of_s(horizon_ * (1.0 + 1e-8)) + kHorizonMargin;
  }
}

double AdsSchwarzschild::r_of_s(double s) const {
  if (s <= horizon_) {
    throw std::domain_error("s = " + std::to_string(s) + " is at or below the horizon s0 = " +
                            std::to_string(horizon_));
  }
  if (mass_ == 0.0) return std::asinh(s) + matching_constant_;

  // integrand, cancellation-free:  f - g = g q / (sqrt(1-q) (1 + sqrt(1-q))),
  // q = (m/u) / (1+u^2); q < 1 exactly when u is above the horizon.
  const double m = mass_;
  auto tail = [m](double u) {
    if (u > 1e100) return 0.0;
    const double one_u2 = 1.0 + u * u;
    const double q = m / (u * one_u2);
    const double sq = std::sqrt(1.0 - q);
    return q / (std::sqrt(one_u2) * sq * (1.0 + sq));
  };
  // substitute u = s/x to map [s, inf) to (0, 1]
  auto integrand = [&tail, s](double x) {
    const double u = s / x;
    return tail(u) * s / (x * x);
  };
  double error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, 1.0, 15, 1e-14, &error);
  return std::asinh(s) - integral + matching_constant_;
}

double AdsSchwarzschild::s_of_r(double r) const {
  if (mass_ == 0.0) {
    if (r <= 0.0) throw std::domain_error("r must be positive for the hyperbolic chart");
    return std::sinh(r);
  }
  if (r < min_radius_ - kHorizonMargin) {
    throw std::domain_error("r = " + std::to_string(r) + " is below the horizon image");
  }
  const double sh = std::sinh(r);
  double s = sh + mass_ / (6.0 * sh * sh);
  s = std::max(s, horizon_ * (1.0 + 1e-6));
  for (int it = 0; it < 60; ++it) {
    const double f = r_of_s(s) - r;
    const double step = f * dpsi(s);  // ds/dr = psi'
    double snew = s - step;
    if (snew <= horizon_) snew = 0.5 * (s + horizon_);
    s = snew;
    if (std::abs(f) <= 1e-14 * std::max(1.0, std::abs(r))) return s;
  }
  throw NumericError("s_of_r failed to converge at r = " + std::to_string(r));
}

double AdsSchwarzschild::dpsi(double psi_value) const {
  return std::sqrt(1.0 + psi_value * psi_value - mass_ / psi_value);
}

double AdsSchwarzschild::d2psi(double psi_value) const {
  return psi_value + mass_ / (2.0 * psi_value * psi_value);
}

double AdsSchwarzschild::d3psi(double psi_value) const {
  return dpsi(psi_value) * (1.0 - mass_ / (psi_value * psi_value * psi_value));
}

double AdsSchwarzschild::d4psi(double psi_value) const {
  const double p3 = psi_value * psi_value * psi_value;
  const double dp = dpsi(psi_value);
  return d2psi(psi_value) * (1.0 - mass_ / p3) + 3.0 * mass_ * dp * dp / (p3 * psi_value);
}

WarpSampler::WarpSampler(const AdsSchwarzschild& background, double anchor_r)
    : background_(&background), anchor_r_(anchor_r) {
  anchor_psi_ = background.s_of_r(anchor_r);
  const double m = background.mass();
  const double p = anchor_psi_;
  const double d1 = background.dpsi(p);
  const double d2 = background.d2psi(p);
  const double d3 = background.d3psi(p);
  const double d4 = background.d4psi(p);
  const double p3 = p * p * p;
  const double d5 = d3 * (1.0 - m / p3) + 9.0 * m * d1 * d2 / (p3 * p) - 12.0 * m * d1 * d1 * d1 / (p3 * p * p);
  c1_ = d1;
  c2_ = d2 / 2.0;
  c3_ = d3 / 6.0;
  c4_ = d4 / 24.0;
  c5_ = d5 / 120.0;
}

double WarpSampler::psi(double r) const {
  if (background_->mass() == 0.0) return std::sinh(r);
  const double h = r - anchor_r_;
  if (std::abs(h) > kTaylorRange) return background_->s_of_r(r);
  return anchor_psi_ + h * (c1_ + h * (c2_ + h * (c3_ + h * (c4_ + h * c5_))));
}

}  // namespace cmcfol::ambient
