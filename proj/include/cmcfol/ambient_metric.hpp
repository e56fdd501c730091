#pragma once

// The ambient 3-metric g = dr^2 + psi(r)^2 g_0 + Q in the chart (r, theta, phi):
// pointwise metric jets (analytic background, finite-differenced perturbation),
// Christoffel symbols, and curvature tensors.

#include <array>
#include <optional>
#include <string>

#include "cmcfol/ads_metric.hpp"

namespace cmcfol::ambient {

enum class ChartComponent { rr, rtheta, rphi, thetatheta, thetaphi, phiphi };

ChartComponent chart_component_from_string(const std::string& name);
std::string to_string(ChartComponent c);

// Built-in decay perturbation family
//   Q_ab = epsilon * exp(-5 r) * Y_lm(theta, phi) * E_ab,
// E_ab selecting one chart component.  Y_lm is the real orthonormal harmonic
// (m >= 0 cosine, m < 0 sine convention).
class Perturbation {
 public:
  Perturbation(int l, int m, ChartComponent component, double epsilon);

  int degree() const { return l_; }
  int order() const { return m_; }
  ChartComponent component() const { return component_; }
  double epsilon() const { return epsilon_; }
  // Largest sampled |Q_ab| e^{5r} over the working range, recorded at
  // construction (chart components; the tensor-norm decay check is in
  // verify_decay below).
  double chart_decay_bound() const { return chart_decay_bound_; }

  double profile(double r, double theta, double phi) const;
  void add_components(double r, double theta, double phi, double q[3][3]) const;

 private:
  int l_, m_;
  ChartComponent component_;
  double epsilon_;
  double chart_decay_bound_;
};

// Metric components and chart partial derivatives at one point.
// Index order 0 = r, 1 = theta, 2 = phi.
struct MetricJet {
  int order = 0;
  double g[3][3] = {};
  double dg[3][3][3] = {};       // dg[c][a][b] = d_c g_ab
  double d2g[3][3][3][3] = {};   // d2g[c][d][a][b] = d_c d_d g_ab
};

struct Christoffel {
  double gamma[3][3][3] = {};  // gamma[a][b][c] = Gamma^a_bc
};

struct CurvatureTensors {
  double riemann[3][3][3][3] = {};  // R^a_bcd
  double ricci[3][3] = {};
  double scalar = 0.0;
};

// Contractions of the Ricci tensor with a unit normal and an orthonormal
// tangent frame at a point.
struct RicciSplit {
  double normal_normal = 0.0;
  double tangent[2][2] = {};
  double mixed[2] = {};  // Ric(nu, e_i)
};

void invert_sym3(const double g[3][3], double inv[3][3]);
Christoffel christoffel_from_jet(const MetricJet& jet);
CurvatureTensors curvature_from_jet(const MetricJet& jet);

class AmbientMetric {
 public:
  explicit AmbientMetric(AdsSchwarzschild background,
                         std::optional<Perturbation> perturbation = std::nullopt,
                         double fd_step = 1e-4);

  const AdsSchwarzschild& background() const { return background_; }
  const std::optional<Perturbation>& perturbation() const { return perturbation_; }
  double mass() const { return background_.mass(); }
  double fd_step() const { return fd_step_; }

  // psi_value must be psi(r); callers with a WarpSampler pass their own.
  MetricJet jet_at(double r, double theta, double phi, int order, double psi_value) const;
  MetricJet jet_at(double r, double theta, double phi, int order) const;

  // Components in the (r, theta, phi) chart; throws ValidityError if the
  // perturbation destroys positive definiteness.
  std::array<std::array<double, 3>, 3> metric_at(double r, double theta, double phi) const;
  Christoffel christoffel_at(double r, double theta, double phi) const;
  CurvatureTensors curvature_at(double r, double theta, double phi) const;

  // nu is a chart-components vector that must be unit for g at the point.
  RicciSplit ricci_radial_tangent_split(double r, double theta, double phi,
                                        const std::array<double, 3>& nu) const;

 private:
  AdsSchwarzschild background_;
  std::optional<Perturbation> perturbation_;
  double fd_step_;
};

// Residual of the contracted second Bianchi identity div Ric - grad(R)/2 at a
// point, measured in the metric norm; differentiates the Ricci evaluator with
// fourth-order central differences of step h.
double bianchi_residual(const AmbientMetric& metric, double r, double theta, double phi,
                        double h = 1e-2);

// Sampled decay verification of Def.-1.1 type: max over the sample points of
// |Q| e^{5r}, |grad Q| e^{5r}, |grad^2 Q| e^{5r} in the tensor norm of g.
struct DecayCheck {
  double q_bound = 0.0;
  double dq_bound = 0.0;
  double d2q_bound = 0.0;
};
DecayCheck verify_decay(const AmbientMetric& metric, double r_min, double r_max, int n_samples);

}  // namespace cmcfol::ambient
