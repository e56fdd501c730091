#include "cmcfol/sphere_grid.hpp"

#include <cmath>
#include <numbers>

#include "cmcfol/errors.hpp"

namespace cmcfol::spectral {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double xi = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Recurrence for P_n(xi) and P'_n(xi).
      double p0 = 1.0, p1 = xi;
      for (int l = 2; l <= n; ++l) {
        double p2 = ((2 * l - 1) * xi * p1 - (l - 1) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[i] = -xi;  // ascending order
    x[n - 1 - i] = xi;
    double wi = 2.0 / ((1.0 - xi * xi) * dp * dp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
}

}  // namespace

std::shared_ptr<const SphereGrid> SphereGrid::create(int band_limit) {
  if (band_limit < kMinBandLimit || band_limit > kMaxBandLimit) {
    throw ConfigError("band limit " + std::to_string(band_limit) + " outside supported range [" +
                      std::to_string(kMinBandLimit) + ", " + std::to_string(kMaxBandLimit) + "]");
  }
  return std::shared_ptr<const SphereGrid>(new SphereGrid(band_limit));
}

SphereGrid::SphereGrid(int band_limit) : band_limit_(band_limit) {
  const int nt = band_limit + 1;
  const int np = 2 * band_limit + 2;
  dphi_ = 2.0 * std::numbers::pi / np;

  std::vector<double> x;
  gauss_legendre(nt, x, gl_weight_);
  theta_.resize(nt);
  cos_theta_.resize(nt);
  sin_theta_.resize(nt);
  for (int j = 0; j < nt; ++j) {
    // x ascending ->  theta descending; store north-to-south instead.
    double xi = x[nt - 1 - j];
    theta_[j] = std::acos(xi);
    cos_theta_[j] = xi;
    sin_theta_[j] = std::sqrt((1.0 - xi) * (1.0 + xi));
  }
  std::vector<double> wtmp = gl_weight_;
  for (int j = 0; j < nt; ++j) gl_weight_[j] = wtmp[nt - 1 - j];

  trig_cos_.resize(static_cast<size_t>(band_limit + 1) * np);
  trig_sin_.resize(static_cast<size_t>(band_limit + 1) * np);
  for (int m = 0; m <= band_limit; ++m) {
    for (int k = 0; k < np; ++k) {
      trig_cos_[static_cast<size_t>(m) * np + k] = std::cos(m * dphi_ * k);
      trig_sin_[static_cast<size_t>(m) * np + k] = std::sin(m * dphi_ * k);
    }
  }
}

LegendreColumn::LegendreColumn(int m, double cos_theta, double sin_theta)
    : m_(m), l_(m), x_(cos_theta), s_(sin_theta) {
  // Qbar_mm = sqrt((2m+1)!!/(2m)!! * (2m+1)/2 ... ) built by the diagonal
  // recurrence Qbar_mm = sqrt((2m+1)/(2m)) sin(theta) Qbar_{m-1,m-1}.
  double p = 1.0 / std::sqrt(2.0);
  for (int k = 1; k <= m; ++k) p *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s_;
  p_ = p;
  pm1_ = 0.0;
  // dQbar_mm/dtheta = m cot(theta) Qbar_mm (from the sin^m factor).
  dp_ = (m == 0) ? 0.0 : m * (x_ / s_) * p_;
}

void LegendreColumn::advance() {
  const int l = l_ + 1;
  const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m_) * m_));
  const double bnum = static_cast<double>(l - 1) * (l - 1) - static_cast<double>(m_) * m_;
  const double b = bnum <= 0.0 ? 0.0 : std::sqrt(bnum / (4.0 * static_cast<double>(l - 1) * (l - 1) - 1.0));
  const double pl = a * (x_ * p_ - b * pm1_);
  pm1_ = p_;
  p_ = pl;
  l_ = l;
  // dQbar_l/dtheta = (l x Qbar_l - c Qbar_{l-1}) / sin(theta),
  // c = sqrt((l^2 - m^2)(2l+1)/(2l-1)).
  const double c = std::sqrt((static_cast<double>(l) * l - static_cast<double>(m_) * m_) *
                             (2.0 * l + 1.0) / (2.0 * l - 1.0));
  dp_ = (l * x_ * p_ - c * pm1_) / s_;
}

}  // namespace cmcfol::spectral
