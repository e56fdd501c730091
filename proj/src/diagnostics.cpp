#include "cmcfol/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmcfol/errors.hpp"

namespace cmcfol::diag {

using geometry::RadialGraph;
using spectral::sh_index;
using spectral::SphereGrid;

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// quadrature of a sample array against dmu_0
double integrate_samples(const SphereGrid& grid, const std::vector<double>& s) {
  double acc = 0.0;
  for (int j = 0; j < grid.n_theta(); ++j) {
    double row = 0.0;
    for (int k = 0; k < grid.n_phi(); ++k) row += s[grid.node_index(j, k)];
    acc += row * grid.node_weight(j);
  }
  return acc;
}

// quadrature against the leaf measure dmu = J dmu_0
double integrate_leaf(const SphereGrid& grid, const std::vector<double>& j_el,
                      const std::vector<double>& s) {
  double acc = 0.0;
  for (int j = 0; j < grid.n_theta(); ++j) {
    double row = 0.0;
    for (int k = 0; k < grid.n_phi(); ++k) {
      const int n = grid.node_index(j, k);
      row += s[n] * j_el[n];
    }
    acc += row * grid.node_weight(j);
  }
  return acc;
}

// Moebius map of the unit sphere with parameter |a| < 1, fixing +-a/|a|,
// and the conformal factor of its pullback of the round metric.
std::array<double, 3> moebius_map(const std::array<double, 3>& a, const std::array<double, 3>& x) {
  const double a2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
  const double ax = a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
  const double den = 1.0 + 2.0 * ax + a2;
  std::array<double, 3> y;
  for (int i = 0; i < 3; ++i) y[i] = ((1.0 - a2) * x[i] + 2.0 * (1.0 + ax) * a[i]) / den;
  return y;
}

double moebius_log_factor(const std::array<double, 3>& a, const std::array<double, 3>& x) {
  const double a2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
  const double ax = a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
  return std::log((1.0 - a2) / (1.0 + 2.0 * ax + a2));
}

std::array<double, 3> node_direction(const SphereGrid& grid, int j, int k) {
  const double st = grid.sin_theta(j), ct = grid.cos_theta(j);
  return {st * std::cos(grid.phi(k)), st * std::sin(grid.phi(k)), ct};
}

}  // namespace

double Centering::norm() const {
  return std::sqrt(raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]);
}

double Centering::normalized_norm() const {
  return std::sqrt(normalized[0] * normalized[0] + normalized[1] * normalized[1] +
                   normalized[2] * normalized[2]);
}

DecayFit decay_fit(const std::vector<std::pair<double, double>>& series, double underflow_floor) {
  if (series.size() < 4) {
    throw std::invalid_argument("decay fit needs at least 4 points");
  }
  std::vector<double> xs, ys;
  for (const auto& [r, v] : series) {
    if (std::abs(v) > underflow_floor) {
      xs.push_back(r);
      ys.push_back(std::log(std::abs(v)));
    }
  }
  DecayFit fit;
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() < 2) {
    fit.verdict = DecayFit::Verdict::underflow;
    return fit;
  }
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  if (n > 2) {
    double ssr = 0.0;
    const double icept = my - fit.slope * mx;
    for (int i = 0; i < n; ++i) {
      const double resid = ys[i] - (icept + fit.slope * xs[i]);
      ssr += resid * resid;
    }
    fit.std_error = std::sqrt(ssr / (n - 2) / sxx);
  }
  return fit;
}

double mean_curvature_estimate_residual(const solver::CmcLeaf& leaf) {
  const double h = leaf.achieved_h;
  return h * h - 4.0 - 16.0 * std::numbers::pi / leaf.geom.area;
}

double effective_radius(double mass, double h) {
  if (h <= 2.0) {
    throw std::domain_error("mean curvature " + std::to_string(h) +
                            " <= 2 has no model radius: leaf too large or invalid");
  }
  // Newton on a function whose derivative decays like e^{-2r}: convergence is
  // judged on the residual, and the best iterate wins (the root itself is
  // conditioned like e^{2r} ulp, which is all double precision can pin down)
  double rt = std::atanh(2.0 / h);
  double best_rt = rt, best_f = 1e300;
  for (int it = 0; it < 60; ++it) {
    const double sh = std::sinh(rt), ch = std::cosh(rt);
    const double f = 2.0 * ch / sh - mass / (sh * sh * sh) - h;
    if (std::abs(f) < best_f) {
      best_f = std::abs(f);
      best_rt = rt;
    }
    const double df = -2.0 / (sh * sh) + 3.0 * mass * ch / (sh * sh * sh * sh);
    const double step = f / df;
    rt -= step;
    if (std::abs(step) < 1e-13 * std::max(1.0, rt) || std::abs(f) < 1e-14 * std::max(1.0, h)) {
      return rt;
    }
  }
  if (best_f <= 1e-10 * std::max(1.0, h)) return best_rt;
  throw NumericError("effective radius iteration failed to converge");
}

double mass_estimate(double h, double area) {
  const double ra = std::asinh(std::sqrt(area / kFourPi));
  const double sh = std::sinh(ra);
  return (2.0 * std::cosh(ra) / sh - h) * sh * sh * sh;
}

Centering kazdan_warner_centering(const solver::CmcLeaf& leaf, double r_tilde) {
  const SphereGrid& grid = *leaf.geometry_grid;
  ScalarField phi_g = spectral::resample(leaf.phi, leaf.geometry_grid);
  std::vector<double> weight(grid.n_nodes());
  const auto& phis = phi_g.samples();
  for (int n = 0; n < grid.n_nodes(); ++n) {
    const double w = leaf.base_radius + phis[n] - r_tilde;
    weight[n] = std::exp(-3.0 * w);
  }
  Centering out;
  out.denom = integrate_samples(grid, weight);
  auto x = spectral::coordinate_functions(leaf.geometry_grid);
  for (int i = 0; i < 3; ++i) {
    std::vector<double> integrand = weight;
    const auto& xs = x[i].samples();
    for (int n = 0; n < grid.n_nodes(); ++n) integrand[n] *= xs[n];
    out.raw[i] = integrate_samples(grid, integrand);
    out.normalized[i] = out.raw[i] / out.denom;
  }
  return out;
}

std::array<double, 3> kazdan_warner_identity_residual(const ScalarField& k_hat,
                                                      const ScalarField& beta) {
  const SphereGrid& grid = *k_hat.grid();
  auto x = spectral::coordinate_functions(k_hat.grid());
  std::vector<double> factor = beta.samples();
  for (double& v : factor) v = std::exp(2.0 * v);
  std::array<double, 3> out;
  for (int i = 0; i < 3; ++i) {
    ScalarField inner = spectral::gradient_inner(k_hat, x[i]);
    std::vector<double> integrand = inner.samples();
    for (int n = 0; n < grid.n_nodes(); ++n) integrand[n] *= factor[n];
    out[i] = integrate_samples(grid, integrand);
  }
  return out;
}

ConformalFactor conformal_factor(const solver::CmcLeaf& leaf) {
  const SphereGrid& grid = *leaf.geometry_grid;
  const int nn = grid.n_nodes();
  if (leaf.geom.gauss_curvature.empty()) {
    throw std::invalid_argument("conformal factor needs the leaf's Gauss curvature");
  }

  // curvature of the normalized metric (4 pi / |Sigma|) ghat
  std::vector<double> khat = leaf.geom.gauss_curvature.samples();
  for (double& v : khat) v *= leaf.geom.area / kFourPi;

  std::vector<double> beta(nn, 0.0);
  ConformalFactor out;

  const double tol = 1e-11;
  auto x = spectral::coordinate_functions(leaf.geometry_grid);

  int total_iters = 0;
  for (int outer = 0; outer < 8; ++outer) {
    // projected Newton for Delta_0 beta - 1 + K_hat e^{2 beta} = 0 with the
    // constant-coefficient surrogate Delta_0 + 2 (exact up to O(K_hat - 1))
    for (int it = 0; it < 60; ++it) {
      ScalarField bf = ScalarField::from_samples(leaf.geometry_grid, beta);
      ScalarField lap = spectral::laplacian(bf);
      std::vector<double> g = lap.samples();
      for (int n = 0; n < nn; ++n) g[n] += khat[n] * std::exp(2.0 * beta[n]) - 1.0;
      std::vector<double> gc = spectral::analyze_samples(grid, g);
      const double kern = std::sqrt(gc[1] * gc[1] + gc[2] * gc[2] + gc[3] * gc[3]);
      for (int i = 1; i < 4; ++i) gc[i] = 0.0;
      double resid = 0.0;
      {
        ScalarField gproj = ScalarField::from_coeffs(leaf.geometry_grid, gc);
        resid = gproj.sup_norm();
      }
      out.residual = resid;
      out.kernel_obstruction = kern;
      ++total_iters;
      if (resid <= tol) break;
      for (int l = 0; l <= grid.band_limit(); ++l) {
        if (l == 1) continue;
        const double inv = -1.0 / (2.0 - static_cast<double>(l) * (l + 1));
        for (int m = -l; m <= l; ++m) gc[sh_index(l, m)] *= inv;
      }
      ScalarField delta = ScalarField::from_coeffs(leaf.geometry_grid, gc);
      const auto& ds = delta.samples();
      for (int n = 0; n < nn; ++n) beta[n] += ds[n];
    }

    // centering constraint: integral of x_i e^{2 beta} dmu_0 = 0
    std::array<double, 3> v{};
    {
      std::vector<double> w(nn);
      for (int n = 0; n < nn; ++n) w[n] = std::exp(2.0 * beta[n]);
      for (int i = 0; i < 3; ++i) {
        std::vector<double> integrand = w;
        const auto& xs = x[i].samples();
        for (int n = 0; n < nn; ++n) integrand[n] *= xs[n];
        v[i] = integrate_samples(grid, integrand);
      }
    }
    out.centering = v;
    const double vnorm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (vnorm <= 1e-10 * kFourPi) break;

    // Moebius recentering: first-order response of the constraint is
    // (16 pi / 3) a, so one damped Newton step per outer pass
    std::array<double, 3> a;
    for (int i = 0; i < 3; ++i) a[i] = -3.0 / (16.0 * std::numbers::pi) * v[i];

    std::vector<double> beta_c = spectral::analyze_samples(grid, beta);
    std::vector<double> khat_c = spectral::analyze_samples(grid, khat);
    for (int j = 0; j < grid.n_theta(); ++j) {
      for (int k = 0; k < grid.n_phi(); ++k) {
        const int n = grid.node_index(j, k);
        const std::array<double, 3> xv = node_direction(grid, j, k);
        const std::array<double, 3> y = moebius_map(a, xv);
        const double yt = std::acos(std::clamp(y[2], -1.0, 1.0));
        const double yp = std::atan2(y[1], y[0]);
        beta[n] = spectral::evaluate_coeffs_at(beta_c, yt, yp) + moebius_log_factor(a, xv);
        khat[n] = spectral::evaluate_coeffs_at(khat_c, yt, yp);
      }
    }
  }

  double khat_sup = 0.0;
  for (double v : khat) khat_sup = std::max(khat_sup, std::abs(v));
  if (out.residual > 1e-8 * std::max(1.0, khat_sup)) {
    throw NumericError("uniformization Newton stalled at residual " + std::to_string(out.residual));
  }
  out.iterations = total_iters;
  out.beta = ScalarField::from_samples(leaf.geometry_grid, beta);
  out.k_hat = ScalarField::from_samples(leaf.geometry_grid, std::move(khat));
  out.sup_beta = out.beta.sup_norm();
  return out;
}

LeafReport make_leaf_report(const solver::CmcLeaf& leaf, const ambient::AmbientMetric& metric) {
  const SphereGrid& grid = *leaf.geometry_grid;
  LeafReport rep;
  rep.base_radius = leaf.base_radius;
  rep.area = leaf.geom.area;
  rep.area_radius = leaf.geom.area_radius;
  rep.target_h = leaf.target_h;
  rep.achieved_h = leaf.achieved_h;
  rep.sup_h_deviation = leaf.sup_h_deviation;
  rep.sup_phi = leaf.sup_phi;
  rep.iterations = leaf.iterations;
  rep.converged = leaf.converged;
  rep.ball_violated = leaf.ball_violated;
  rep.lambda_min = leaf.stability.lambda_min;
  rep.eigen_residual = leaf.stability.eigen_residual;

  rep.gauss_bonnet_residual =
      integrate_leaf(grid, leaf.geom.area_element, leaf.geom.gauss_curvature.samples()) - kFourPi;
  {
    double gap = 0.0;
    const auto& ka = leaf.geom.gauss_curvature.samples();
    const auto& kb = leaf.geom.gauss_curvature_intrinsic.samples();
    for (int n = 0; n < grid.n_nodes(); ++n) gap = std::max(gap, std::abs(ka[n] - kb[n]));
    rep.dual_k_gap = gap;
  }
  rep.lemma_h_residual = mean_curvature_estimate_residual(leaf);
  rep.r_tilde = effective_radius(metric.mass(), leaf.achieved_h);
  rep.mass_estimate = diag::mass_estimate(leaf.achieved_h, leaf.geom.area);

  Centering c = kazdan_warner_centering(leaf, rep.r_tilde);
  rep.kw_raw = c.raw;
  rep.kw_normalized = c.normalized;
  rep.kw_norm = c.normalized_norm();

  ConformalFactor cf = conformal_factor(leaf);
  rep.sup_beta = cf.sup_beta;
  rep.beta_residual = cf.residual;
  rep.beta_kernel_obstruction = cf.kernel_obstruction;
  rep.kw_identity = kazdan_warner_identity_residual(cf.k_hat, cf.beta);
  rep.kw_identity_norm = std::sqrt(rep.kw_identity[0] * rep.kw_identity[0] +
                                   rep.kw_identity[1] * rep.kw_identity[1] +
                                   rep.kw_identity[2] * rep.kw_identity[2]);

  // rho and the graph, for the pointwise identities
  ScalarField rho = ScalarField::constant(leaf.geometry_grid, leaf.base_radius);
  rho += spectral::resample(leaf.phi, leaf.geometry_grid);
  const auto& rs = rho.samples();
  double rho_min = 1e300, rho_max = -1e300, sup_w = 0.0;
  for (double v : rs) {
    rho_min = std::min(rho_min, v);
    rho_max = std::max(rho_max, v);
    sup_w = std::max(sup_w, std::abs(v - rep.r_tilde));
  }
  rep.min_rho = rho_min;
  rep.rho_spread = rho_max - rho_min;
  rep.sup_w = sup_w;

  {
    const double mass = metric.mass();
    double sup = 0.0;
    const auto& h = leaf.geom.mean_curvature.samples();
    const auto& rt = leaf.geom.radial_tangent_sq.samples();
    const auto& ar = leaf.geom.traceless_norm_sq.samples();
    const auto& ka = leaf.geom.gauss_curvature.samples();
    for (int n = 0; n < grid.n_nodes(); ++n) {
      const double sh3 = std::pow(std::sinh(rs[n]), 3);
      const double model = (h[n] * h[n] - 4.0) / 4.0 + mass / sh3 -
                           1.5 * mass * rt[n] / sh3 - 0.5 * ar[n];
      sup = std::max(sup, std::abs(ka[n] - model));
    }
    rep.curvature_formula_residual = sup;
  }
  {
    RadialGraph graph(leaf.geometry_grid, rho, metric);
    rep.laplace_identity_sup = geometry::laplace_identity_residual(graph, leaf.geom).sup_norm();
  }
  rep.sup_radial_tangent = leaf.geom.radial_tangent_sq.sup_norm();
  rep.radial_tangent_integral =
      integrate_leaf(grid, leaf.geom.area_element, leaf.geom.radial_tangent_sq.samples());
  {
    std::vector<double> integrand(rs.size());
    for (size_t n = 0; n < rs.size(); ++n) integrand[n] = 4.0 * std::exp(-2.0 * rs[n]);
    rep.euclidean_area_proxy = integrate_leaf(grid, leaf.geom.area_element, integrand);
  }
  return rep;
}

FoliationReport make_foliation_report(const solver::Foliation& foliation,
                                      const ambient::AmbientMetric& metric) {
  FoliationReport rep;
  rep.complete = foliation.complete;
  rep.failure_index = foliation.failure_index;
  rep.min_separation = foliation.min_separation;
  for (const auto& leaf : foliation.leaves) {
    rep.leaves.push_back(make_leaf_report(leaf, metric));
  }

  double mass_spread = 0.0;
  for (const auto& lr : rep.leaves) {
    mass_spread = std::max(mass_spread,
                           std::abs(lr.mass_estimate - metric.mass()) / std::max(metric.mass(), 1.0));
  }
  rep.mass_spread = mass_spread;

  if (rep.leaves.size() >= 4) {
    auto series = [&rep](auto getter) {
      std::vector<std::pair<double, double>> s;
      for (const auto& lr : rep.leaves) s.emplace_back(lr.min_rho, getter(lr));
      return s;
    };
    rep.fits["lemma_h_residual"] =
        decay_fit(series([](const LeafReport& l) { return std::abs(l.lemma_h_residual); }));
    rep.fits["kw_centering"] = decay_fit(series([](const LeafReport& l) { return l.kw_norm; }));
    // beta is resolved to the uniformization Newton tolerance and the
    // radial-tangent integral to the area-scaled quadrature roundoff; below
    // those floors the series is noise and the honest verdict is underflow
    rep.fits["sup_beta"] =
        decay_fit(series([](const LeafReport& l) { return l.sup_beta; }), 1e-11);
    rep.fits["rho_spread"] = decay_fit(series([](const LeafReport& l) { return l.rho_spread; }));
    rep.fits["radial_tangent_integral"] =
        decay_fit(series([](const LeafReport& l) { return l.radial_tangent_integral; }), 1e-11);
    rep.fits["sup_w"] = decay_fit(series([](const LeafReport& l) { return l.sup_w; }));
    rep.fits["curvature_formula_residual"] =
        decay_fit(series([](const LeafReport& l) { return l.curvature_formula_residual; }));
    rep.fits["laplace_identity"] =
        decay_fit(series([](const LeafReport& l) { return l.laplace_identity_sup; }));
  }
  return rep;
}

}  // namespace cmcfol::diag
