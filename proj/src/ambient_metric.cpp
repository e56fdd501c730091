#include "cmcfol/ambient_metric.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cmcfol/errors.hpp"
#include "cmcfol/sphere_grid.hpp"

namespace cmcfol::ambient {

namespace {

// 4th-order central difference weights for +/-h, +/-2h offsets.
constexpr double kD1W[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};   // f(-2h) f(-h) f(h) f(2h)
constexpr double kD2W[5] = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
constexpr int kD1Off[4] = {-2, -1, 1, 2};

// Background warped-product jet: g = dr^2 + psi^2 (dtheta^2 + sin^2 theta dphi^2).
MetricJet background_jet(const AdsSchwarzschild& bg, double theta, int order,
                         double psi) {
  MetricJet jet;
  jet.order = order;
  const double dpsi = bg.dpsi(psi), d2psi = bg.d2psi(psi);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double s2 = st * st;
  const double p2 = psi * psi;

  jet.g[0][0] = 1.0;
  jet.g[1][1] = p2;
  jet.g[2][2] = p2 * s2;
  if (order >= 1) {
    jet.dg[0][1][1] = 2.0 * psi * dpsi;
    jet.dg[0][2][2] = 2.0 * psi * dpsi * s2;
    jet.dg[1][2][2] = p2 * 2.0 * st * ct;
  }
  if (order >= 2) {
    const double w2 = 2.0 * (dpsi * dpsi + psi * d2psi);
    jet.d2g[0][0][1][1] = w2;
    jet.d2g[0][0][2][2] = w2 * s2;
    jet.d2g[0][1][2][2] = 2.0 * psi * dpsi * 2.0 * st * ct;
    jet.d2g[1][0][2][2] = jet.d2g[0][1][2][2];
    jet.d2g[1][1][2][2] = p2 * 2.0 * (ct * ct - st * st);
  }
  return jet;
}

void eval_q(const Perturbation& q, double r, double theta, double phi, double out[3][3]) {
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out[a][b] = 0.0;
  }
  q.add_components(r, theta, phi, out);
}

// Perturbation value and chart partial derivatives by 4th-order central
// differences; steps scale with max(1, r) per the working-range convention.
void perturbation_jet(const Perturbation& q, double r, double theta, double phi, int order,
                      double h, MetricJet& jet) {
  double qc[3][3];
  eval_q(q, r, theta, phi, qc);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) jet.g[a][b] += qc[a][b];
  }
  if (order < 1) return;

  const double x0[3] = {r, theta, phi};
  // single-direction stencils: first and pure second derivatives
  double qs[3][4][3][3];
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 4; ++i) {
      double x[3] = {x0[0], x0[1], x0[2]};
      x[c] += kD1Off[i] * h;
      eval_q(q, x[0], x[1], x[2], qs[c][i]);
    }
  }
  for (int c = 0; c < 3; ++c) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        double d1 = 0.0;
        for (int i = 0; i < 4; ++i) d1 += kD1W[i] * qs[c][i][a][b];
        jet.dg[c][a][b] += d1 / h;
      }
    }
  }
  if (order < 2) return;

  for (int c = 0; c < 3; ++c) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        double d2 = kD2W[0] * qs[c][0][a][b] + kD2W[1] * qs[c][1][a][b] + kD2W[2] * qc[a][b] +
                    kD2W[3] * qs[c][2][a][b] + kD2W[4] * qs[c][3][a][b];
        jet.d2g[c][c][a][b] += d2 / (h * h);
      }
    }
  }
  // mixed second derivatives: product of two first-derivative stencils
  for (int c = 0; c < 3; ++c) {
    for (int d = c + 1; d < 3; ++d) {
      double acc[3][3] = {};
      for (int i = 0; i < 4; ++i) {
        for (int jj = 0; jj < 4; ++jj) {
          double x[3] = {x0[0], x0[1], x0[2]};
          x[c] += kD1Off[i] * h;
          x[d] += kD1Off[jj] * h;
          double qv[3][3];
          eval_q(q, x[0], x[1], x[2], qv);
          const double w = kD1W[i] * kD1W[jj];
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) acc[a][b] += w * qv[a][b];
          }
        }
      }
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          jet.d2g[c][d][a][b] += acc[a][b] / (h * h);
          jet.d2g[d][c][a][b] += acc[a][b] / (h * h);
        }
      }
    }
  }
}

}  // namespace

ChartComponent chart_component_from_string(const std::string& name) {
  if (name == "rr") return ChartComponent::rr;
  if (name == "rtheta") return ChartComponent::rtheta;
  if (name == "rphi") return ChartComponent::rphi;
  if (name == "thetatheta") return ChartComponent::thetatheta;
  if (name == "thetaphi") return ChartComponent::thetaphi;
  if (name == "phiphi") return ChartComponent::phiphi;
  throw ConfigError("unknown perturbation component '" + name + "'");
}

std::string to_string(ChartComponent c) {
  switch (c) {
    case ChartComponent::rr: return "rr";
    case ChartComponent::rtheta: return "rtheta";
    case ChartComponent::rphi: return "rphi";
    case ChartComponent::thetatheta: return "thetatheta";
    case ChartComponent::thetaphi: return "thetaphi";
    case ChartComponent::phiphi: return "phiphi";
  }
  return "?";
}

Perturbation::Perturbation(int l, int m, ChartComponent component, double epsilon)
    : l_(l), m_(m), component_(component), epsilon_(epsilon) {
  if (l < 0 || l > 16 || std::abs(m) > l) {
    throw ConfigError("perturbation harmonic (l=" + std::to_string(l) + ", m=" + std::to_string(m) +
                      ") out of range");
  }
  // decay record: Q has the closed-form profile eps e^{-5r} Y, so the sampled
  // chart-component bound is eps * max |Y| over a probe set.
  double ymax = 0.0;
  for (int i = 1; i < 40; ++i) {
    const double theta = std::numbers::pi * i / 40.0;
    for (int k = 0; k < 40; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / 40.0;
      double q[3][3] = {};
      add_components(0.0, theta, phi, q);  // e^{0} leaves the angular factor
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) ymax = std::max(ymax, std::abs(q[a][b]));
      }
    }
  }
  chart_decay_bound_ = ymax;
}

double Perturbation::profile(double r, double theta, double phi) const {
  using spectral::LegendreColumn;
  const int ma = std::abs(m_);
  LegendreColumn col(ma, std::cos(theta), std::sin(theta));
  for (int l = ma; l < l_; ++l) col.advance();
  const double norm = (ma == 0) ? 1.0 / std::sqrt(2.0 * std::numbers::pi)
                                : 1.0 / std::sqrt(std::numbers::pi);
  const double trig = (m_ >= 0) ? std::cos(ma * phi) : std::sin(ma * phi);
  return epsilon_ * std::exp(-5.0 * r) * norm * col.value() * trig;
}

void Perturbation::add_components(double r, double theta, double phi, double q[3][3]) const {
  const double v = profile(r, theta, phi);
  switch (component_) {
    case ChartComponent::rr: q[0][0] += v; break;
    case ChartComponent::rtheta: q[0][1] += v; q[1][0] += v; break;
    case ChartComponent::rphi: q[0][2] += v; q[2][0] += v; break;
    case ChartComponent::thetatheta: q[1][1] += v; break;
    case ChartComponent::thetaphi: q[1][2] += v; q[2][1] += v; break;
    case ChartComponent::phiphi: q[2][2] += v; break;
  }
}

void invert_sym3(const double g[3][3], double inv[3][3]) {
  const double a = g[0][0], b = g[0][1], c = g[0][2];
  const double d = g[1][1], e = g[1][2], f = g[2][2];
  const double det = a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
  if (det <= 0.0 || !std::isfinite(det)) {
    throw ValidityError("metric is not positive definite (det = " + std::to_string(det) + ")");
  }
  const double idet = 1.0 / det;
  inv[0][0] = (d * f - e * e) * idet;
  inv[0][1] = inv[1][0] = (c * e - b * f) * idet;
  inv[0][2] = inv[2][0] = (b * e - c * d) * idet;
  inv[1][1] = (a * f - c * c) * idet;
  inv[1][2] = inv[2][1] = (b * c - a * e) * idet;
  inv[2][2] = (a * d - b * b) * idet;
}

Christoffel christoffel_from_jet(const MetricJet& jet) {
  double inv[3][3];
  invert_sym3(jet.g, inv);
  Christoffel out;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (int c = b; c < 3; ++c) {
        double acc = 0.0;
        for (int d = 0; d < 3; ++d) {
          acc += inv[a][d] * (jet.dg[b][d][c] + jet.dg[c][d][b] - jet.dg[d][b][c]);
        }
        out.gamma[a][b][c] = 0.5 * acc;
        out.gamma[a][c][b] = out.gamma[a][b][c];
      }
    }
  }
  return out;
}

CurvatureTensors curvature_from_jet(const MetricJet& jet) {
  if (jet.order < 2) throw std::invalid_argument("curvature requires a second-order metric jet");
  double inv[3][3];
  invert_sym3(jet.g, inv);
  Christoffel gam = christoffel_from_jet(jet);

  // d_e g^{ad} = -g^{af} (d_e g_{fh}) g^{hd}
  double dinv[3][3][3];
  for (int e = 0; e < 3; ++e) {
    for (int a = 0; a < 3; ++a) {
      for (int d = 0; d < 3; ++d) {
        double acc = 0.0;
        for (int f = 0; f < 3; ++f) {
          for (int h = 0; h < 3; ++h) acc -= inv[a][f] * jet.dg[e][f][h] * inv[h][d];
        }
        dinv[e][a][d] = acc;
      }
    }
  }
  // d_e Gamma^a_bc
  double dgam[3][3][3][3];
  for (int e = 0; e < 3; ++e) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        for (int c = b; c < 3; ++c) {
          double acc = 0.0;
          for (int d = 0; d < 3; ++d) {
            acc += dinv[e][a][d] * (jet.dg[b][d][c] + jet.dg[c][d][b] - jet.dg[d][b][c]);
            acc += inv[a][d] * (jet.d2g[e][b][d][c] + jet.d2g[e][c][d][b] - jet.d2g[e][d][b][c]);
          }
          dgam[e][a][b][c] = 0.5 * acc;
          dgam[e][a][c][b] = dgam[e][a][b][c];
        }
      }
    }
  }

  CurvatureTensors out;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (int c = 0; c < 3; ++c) {
        for (int d = 0; d < 3; ++d) {
          double acc = dgam[c][a][d][b] - dgam[d][a][c][b];
          for (int e = 0; e < 3; ++e) {
            acc += gam.gamma[a][c][e] * gam.gamma[e][d][b] - gam.gamma[a][d][e] * gam.gamma[e][c][b];
          }
          out.riemann[a][b][c][d] = acc;
        }
      }
    }
  }
  for (int b = 0; b < 3; ++b) {
    for (int d = 0; d < 3; ++d) {
      double acc = 0.0;
      for (int a = 0; a < 3; ++a) acc += out.riemann[a][b][a][d];
      out.ricci[b][d] = acc;
    }
  }
  double sc = 0.0;
  for (int b = 0; b < 3; ++b) {
    for (int d = 0; d < 3; ++d) sc += inv[b][d] * out.ricci[b][d];
  }
  out.scalar = sc;
  return out;
}

AmbientMetric::AmbientMetric(AdsSchwarzschild background, std::optional<Perturbation> perturbation,
                             double fd_step)
    : background_(std::move(background)), perturbation_(std::move(perturbation)), fd_step_(fd_step) {}

MetricJet AmbientMetric::jet_at(double r, double theta, double phi, int order,
                                double psi_value) const {
  MetricJet jet = background_jet(background_, theta, order, psi_value);
  if (perturbation_) {
    const double h = fd_step_ * std::max(1.0, r);
    if (theta <= 2.0 * h || theta >= std::numbers::pi - 2.0 * h) {
      throw std::domain_error("evaluation point too close to a coordinate pole for the "
                              "perturbation stencil");
    }
    perturbation_jet(*perturbation_, r, theta, phi, order, h, jet);
  }
  return jet;
}

MetricJet AmbientMetric::jet_at(double r, double theta, double phi, int order) const {
  return jet_at(r, theta, phi, order, background_.s_of_r(r));
}

std::array<std::array<double, 3>, 3> AmbientMetric::metric_at(double r, double theta,
                                                              double phi) const {
  if (theta <= 0.0 || theta >= std::numbers::pi) {
    throw std::domain_error("theta must lie in (0, pi)");
  }
  MetricJet jet = jet_at(r, theta, phi, 0);
  // positive definiteness via leading principal minors
  const double m1 = jet.g[0][0];
  const double m2 = jet.g[0][0] * jet.g[1][1] - jet.g[0][1] * jet.g[0][1];
  double inv[3][3];
  std::array<std::array<double, 3>, 3> out;
  if (m1 <= 0.0 || m2 <= 0.0) {
    throw ValidityError("perturbed metric lost positive definiteness");
  }
  invert_sym3(jet.g, inv);  // throws on det <= 0
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out[a][b] = jet.g[a][b];
  }
  return out;
}

Christoffel AmbientMetric::christoffel_at(double r, double theta, double phi) const {
  return christoffel_from_jet(jet_at(r, theta, phi, 1));
}

CurvatureTensors AmbientMetric::curvature_at(double r, double theta, double phi) const {
  return curvature_from_jet(jet_at(r, theta, phi, 2));
}

RicciSplit AmbientMetric::ricci_radial_tangent_split(double r, double theta, double phi,
                                                     const std::array<double, 3>& nu) const {
  MetricJet jet = jet_at(r, theta, phi, 2);
  double norm2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) norm2 += jet.g[a][b] * nu[a] * nu[b];
  }
  if (std::abs(norm2 - 1.0) > 1e-8) {
    throw std::domain_error("normal direction is not unit for the ambient metric");
  }
  CurvatureTensors curv = curvature_from_jet(jet);

  // orthonormal tangent frame from Gram-Schmidt on the coordinate vectors
  auto dot = [&jet](const std::array<double, 3>& u, const std::array<double, 3>& v) {
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) acc += jet.g[a][b] * u[a] * v[b];
    }
    return acc;
  };
  std::array<std::array<double, 3>, 2> frame;
  std::array<std::array<double, 3>, 2> seeds = {{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  for (int i = 0; i < 2; ++i) {
    std::array<double, 3> v = seeds[i];
    const double vn = dot(v, nu);
    for (int a = 0; a < 3; ++a) v[a] -= vn * nu[a];
    for (int j = 0; j < i; ++j) {
      const double ve = dot(v, frame[j]);
      for (int a = 0; a < 3; ++a) v[a] -= ve * frame[j][a];
    }
    const double len = std::sqrt(dot(v, v));
    for (int a = 0; a < 3; ++a) v[a] /= len;
    frame[i] = v;
  }

  auto ric = [&curv](const std::array<double, 3>& u, const std::array<double, 3>& v) {
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) acc += curv.ricci[a][b] * u[a] * v[b];
    }
    return acc;
  };
  RicciSplit split;
  split.normal_normal = ric(nu, nu);
  for (int i = 0; i < 2; ++i) {
    split.mixed[i] = ric(nu, frame[i]);
    for (int j = 0; j < 2; ++j) split.tangent[i][j] = ric(frame[i], frame[j]);
  }
  return split;
}

double bianchi_residual(const AmbientMetric& metric, double r, double theta, double phi, double h) {
  MetricJet jet = metric.jet_at(r, theta, phi, 1);
  double inv[3][3];
  invert_sym3(jet.g, inv);
  Christoffel gam = christoffel_from_jet(jet);
  CurvatureTensors curv0 = metric.curvature_at(r, theta, phi);

  // 4th-order partial derivatives of Ricci and scalar
  double dric[3][3][3];
  double dscal[3];
  const double x0[3] = {r, theta, phi};
  for (int c = 0; c < 3; ++c) {
    double accr[3][3] = {};
    double accs = 0.0;
    for (int i = 0; i < 4; ++i) {
      double x[3] = {x0[0], x0[1], x0[2]};
      x[c] += kD1Off[i] * h;
      CurvatureTensors cv = metric.curvature_at(x[0], x[1], x[2]);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) accr[a][b] += kD1W[i] * cv.ricci[a][b];
      }
      accs += kD1W[i] * cv.scalar;
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) dric[c][a][b] = accr[a][b] / h;
    }
    dscal[c] = accs / h;
  }

  // (div Ric)_d = g^{bc} (d_b R_cd - Gamma^e_bc R_ed - Gamma^e_bd R_ce)
  double resid[3];
  for (int d = 0; d < 3; ++d) {
    double acc = 0.0;
    for (int b = 0; b < 3; ++b) {
      for (int c = 0; c < 3; ++c) {
        double cov = dric[b][c][d];
        for (int e = 0; e < 3; ++e) {
          cov -= gam.gamma[e][b][c] * curv0.ricci[e][d] + gam.gamma[e][b][d] * curv0.ricci[c][e];
        }
        acc += inv[b][c] * cov;
      }
    }
    resid[d] = acc - 0.5 * dscal[d];
  }
  double norm2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) norm2 += inv[a][b] * resid[a] * resid[b];
  }
  return std::sqrt(std::max(0.0, norm2));
}

DecayCheck verify_decay(const AmbientMetric& metric, double r_min, double r_max, int n_samples) {
  DecayCheck out;
  if (!metric.perturbation()) return out;
  const AmbientMetric plain(metric.background());

  for (int i = 0; i < n_samples; ++i) {
    const double r = r_min + (r_max - r_min) * i / std::max(1, n_samples - 1);
    const double theta = 0.3 + 2.5 * std::fmod(0.61803398875 * i, 1.0);
    const double phi = 2.0 * std::numbers::pi * std::fmod(0.41421356237 * i, 1.0);
    const double psi = metric.background().s_of_r(r);

    MetricJet full = metric.jet_at(r, theta, phi, 2, psi);
    // subtract the analytic background to isolate the perturbation jet
    MetricJet bg = plain.jet_at(r, theta, phi, 2, psi);
    double qv[3][3], dq[3][3][3], d2q[3][3][3][3];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        qv[a][b] = full.g[a][b] - bg.g[a][b];
        for (int c = 0; c < 3; ++c) {
          dq[c][a][b] = full.dg[c][a][b] - bg.dg[c][a][b];
          for (int d = 0; d < 3; ++d) d2q[c][d][a][b] = full.d2g[c][d][a][b] - bg.d2g[c][d][a][b];
        }
      }
    }

    double inv[3][3];
    invert_sym3(full.g, inv);
    Christoffel gam = christoffel_from_jet(full);
    // covariant first derivative T_cab = grad_c Q_ab
    double t[3][3][3];
    for (int c = 0; c < 3; ++c) {
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          double acc = dq[c][a][b];
          for (int e = 0; e < 3; ++e) {
            acc -= gam.gamma[e][c][a] * qv[e][b] + gam.gamma[e][c][b] * qv[a][e];
          }
          t[c][a][b] = acc;
        }
      }
    }
    // second covariant derivative needs dGamma; reuse the curvature assembly pieces
    double dinv[3][3][3];
    for (int e = 0; e < 3; ++e) {
      for (int a = 0; a < 3; ++a) {
        for (int d = 0; d < 3; ++d) {
          double acc = 0.0;
          for (int f = 0; f < 3; ++f) {
            for (int g2 = 0; g2 < 3; ++g2) acc -= inv[a][f] * full.dg[e][f][g2] * inv[g2][d];
          }
          dinv[e][a][d] = acc;
        }
      }
    }
    double dgam[3][3][3][3];
    for (int e = 0; e < 3; ++e) {
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int d = 0; d < 3; ++d) {
              acc += dinv[e][a][d] * (full.dg[b][d][c] + full.dg[c][d][b] - full.dg[d][b][c]);
              acc += inv[a][d] * (full.d2g[e][b][d][c] + full.d2g[e][c][d][b] - full.d2g[e][d][b][c]);
            }
            dgam[e][a][b][c] = 0.5 * acc;
          }
        }
      }
    }
    double t2[3][3][3][3];
    for (int d = 0; d < 3; ++d) {
      for (int c = 0; c < 3; ++c) {
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) {
            // d_d T_cab assembled from partials of Q and of Gamma
            double pd = d2q[d][c][a][b];
            for (int e = 0; e < 3; ++e) {
              pd -= dgam[d][e][c][a] * qv[e][b] + gam.gamma[e][c][a] * dq[d][e][b];
              pd -= dgam[d][e][c][b] * qv[a][e] + gam.gamma[e][c][b] * dq[d][a][e];
            }
            double acc = pd;
            for (int e = 0; e < 3; ++e) {
              acc -= gam.gamma[e][d][c] * t[e][a][b] + gam.gamma[e][d][a] * t[c][e][b] +
                     gam.gamma[e][d][b] * t[c][a][e];
            }
            t2[d][c][a][b] = acc;
          }
        }
      }
    }

    auto norm_q = [&inv, &qv]() {
      double acc = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d) acc += inv[a][c] * inv[b][d] * qv[a][b] * qv[c][d];
      return std::sqrt(std::max(0.0, acc));
    };
    double ndq = 0.0;
    for (int c = 0; c < 3; ++c)
      for (int f = 0; f < 3; ++f)
        for (int a = 0; a < 3; ++a)
          for (int d = 0; d < 3; ++d)
            for (int b = 0; b < 3; ++b)
              for (int e = 0; e < 3; ++e)
                ndq += inv[c][f] * inv[a][d] * inv[b][e] * t[c][a][b] * t[f][d][e];
    double nd2q = 0.0;
    for (int c = 0; c < 3; ++c)
      for (int f = 0; f < 3; ++f)
        for (int c2 = 0; c2 < 3; ++c2)
          for (int f2 = 0; f2 < 3; ++f2)
            for (int a = 0; a < 3; ++a)
              for (int d = 0; d < 3; ++d)
                for (int b = 0; b < 3; ++b)
                  for (int e = 0; e < 3; ++e)
                    nd2q += inv[c][f] * inv[c2][f2] * inv[a][d] * inv[b][e] * t2[c][c2][a][b] *
                            t2[f][f2][d][e];

    const double boost = std::exp(5.0 * r);
    out.q_bound = std::max(out.q_bound, norm_q() * boost);
    out.dq_bound = std::max(out.dq_bound, std::sqrt(std::max(0.0, ndq)) * boost);
    out.d2q_bound = std::max(out.d2q_bound, std::sqrt(std::max(0.0, nd2q)) * boost);
  }
  return out;
}

}  // namespace cmcfol::ambient
