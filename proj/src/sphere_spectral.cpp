#include "cmcfol/sphere_spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmcfol/errors.hpp"

namespace cmcfol::spectral {

namespace {

const double kNormM0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
const double kNormM = 1.0 / std::sqrt(std::numbers::pi);

bool compatible_grids(const GridPtr& a, const GridPtr& b) {
  return a == b || (a && b && a->band_limit() == b->band_limit());
}

int band_of_coeffs(size_t count) {
  int l = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count)))) - 1;
  if (l < 0 || sh_coeff_count(l) != static_cast<int>(count)) {
    throw std::invalid_argument("coefficient array length is not a perfect square");
  }
  return l;
}

}  // namespace

// ---------------------------------------------------------------------------
// transforms

std::vector<double> analyze_samples(const SphereGrid& grid, const std::vector<double>& samples) {
  const int lmax = grid.band_limit();
  const int nt = grid.n_theta(), np = grid.n_phi();
  if (static_cast<int>(samples.size()) != grid.n_nodes()) {
    throw std::invalid_argument("sample array does not match grid size");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw NumericError("non-finite samples in spherical harmonic analysis");
  }

  // Longitude stage: F^c_{jm} = sum_k f_{jk} cos(m phi_k), same with sin.
  std::vector<double> fc(static_cast<size_t>(nt) * (lmax + 1), 0.0);
  std::vector<double> fs(static_cast<size_t>(nt) * (lmax + 1), 0.0);
  for (int j = 0; j < nt; ++j) {
    const double* row = samples.data() + static_cast<size_t>(j) * np;
    for (int m = 0; m <= lmax; ++m) {
      double cacc = 0.0, sacc = 0.0;
      for (int k = 0; k < np; ++k) {
        cacc += row[k] * grid.cos_m_phi(m, k);
        sacc += row[k] * grid.sin_m_phi(m, k);
      }
      fc[static_cast<size_t>(j) * (lmax + 1) + m] = cacc;
      fs[static_cast<size_t>(j) * (lmax + 1) + m] = sacc;
    }
  }

  // Latitude stage: Gauss-Legendre quadrature against Qbar_{lm}.
  std::vector<double> coeffs(grid.n_coeffs(), 0.0);
  for (int m = 0; m <= lmax; ++m) {
    const double norm = (m == 0) ? kNormM0 : kNormM;
    for (int j = 0; j < nt; ++j) {
      const double wc = grid.node_weight(j) * norm * fc[static_cast<size_t>(j) * (lmax + 1) + m];
      const double ws = grid.node_weight(j) * norm * fs[static_cast<size_t>(j) * (lmax + 1) + m];
      LegendreColumn col(m, grid.cos_theta(j), grid.sin_theta(j));
      for (int l = m; l <= lmax; ++l) {
        coeffs[sh_index(l, m)] += wc * col.value();
        if (m > 0) coeffs[sh_index(l, -m)] += ws * col.value();
        col.advance();
      }
    }
  }
  return coeffs;
}

std::vector<double> synthesize_samples(const SphereGrid& grid, const std::vector<double>& coeffs) {
  const int lsrc = band_of_coeffs(coeffs.size());
  if (lsrc > grid.band_limit()) {
    throw std::invalid_argument("coefficient band limit exceeds grid band limit");
  }
  const int nt = grid.n_theta(), np = grid.n_phi();
  std::vector<double> samples(grid.n_nodes(), 0.0);
  std::vector<double> ac(lsrc + 1), as(lsrc + 1);
  for (int j = 0; j < nt; ++j) {
    for (int m = 0; m <= lsrc; ++m) {
      const double norm = (m == 0) ? kNormM0 : kNormM;
      double accc = 0.0, accs = 0.0;
      LegendreColumn col(m, grid.cos_theta(j), grid.sin_theta(j));
      for (int l = m; l <= lsrc; ++l) {
        accc += coeffs[sh_index(l, m)] * col.value();
        if (m > 0) accs += coeffs[sh_index(l, -m)] * col.value();
        col.advance();
      }
      ac[m] = norm * accc;
      as[m] = norm * accs;
    }
    double* row = samples.data() + static_cast<size_t>(j) * np;
    for (int k = 0; k < np; ++k) {
      double acc = ac[0];
      for (int m = 1; m <= lsrc; ++m) {
        acc += ac[m] * grid.cos_m_phi(m, k) + as[m] * grid.sin_m_phi(m, k);
      }
      row[k] = acc;
    }
  }
  return samples;
}

FieldJet synthesize_jet(const SphereGrid& grid, const std::vector<double>& coeffs, int order) {
  const int lsrc = band_of_coeffs(coeffs.size());
  if (lsrc > grid.band_limit()) {
    throw std::invalid_argument("coefficient band limit exceeds grid band limit");
  }
  if (order < 1 || order > 3) throw std::invalid_argument("jet order must be 1, 2 or 3");

  const int nt = grid.n_theta(), np = grid.n_phi();
  const int nn = grid.n_nodes();
  FieldJet jet;
  jet.order = order;
  jet.f.assign(nn, 0.0);
  jet.ft.assign(nn, 0.0);
  jet.fp.assign(nn, 0.0);
  if (order >= 2) {
    jet.ftt.assign(nn, 0.0);
    jet.ftp.assign(nn, 0.0);
    jet.fpp.assign(nn, 0.0);
  }
  if (order >= 3) {
    jet.fttt.assign(nn, 0.0);
    jet.fttp.assign(nn, 0.0);
    jet.ftpp.assign(nn, 0.0);
    jet.fppp.assign(nn, 0.0);
  }

  // Per latitude: theta-derivative stacks A^(p)_m for the cos and sin families.
  const int nm = lsrc + 1;
  std::vector<double> acb((order + 1) * nm), asb((order + 1) * nm);
  for (int j = 0; j < nt; ++j) {
    const double ct = grid.cos_theta(j), st = grid.sin_theta(j);
    const double cot = ct / st, inv_s2 = 1.0 / (st * st);
    std::fill(acb.begin(), acb.end(), 0.0);
    std::fill(asb.begin(), asb.end(), 0.0);
    for (int m = 0; m <= lsrc; ++m) {
      const double norm = (m == 0) ? kNormM0 : kNormM;
      LegendreColumn col(m, ct, st);
      for (int l = m; l <= lsrc; ++l) {
        const double p = col.value(), dp = col.dtheta();
        const double lam = static_cast<double>(l) * (l + 1);
        // Associated Legendre ODE gives higher theta-derivatives pointwise:
        // P'' = -cot P' + (m^2/s^2 - lam) P
        // P''' = -cot P'' + ((1+m^2)/s^2 - lam) P' - 2 m^2 (c/s^3) P
        const double p2 = (order >= 2) ? -cot * dp + (m * m * inv_s2 - lam) * p : 0.0;
        const double p3 = (order >= 3)
                              ? -cot * p2 + ((1.0 + m * m) * inv_s2 - lam) * dp -
                                    2.0 * m * m * (cot * inv_s2) * p
                              : 0.0;
        const double cc = coeffs[sh_index(l, m)] * norm;
        const double cs = (m > 0) ? coeffs[sh_index(l, -m)] * norm : 0.0;
        acb[0 * nm + m] += cc * p;
        asb[0 * nm + m] += cs * p;
        acb[1 * nm + m] += cc * dp;
        asb[1 * nm + m] += cs * dp;
        if (order >= 2) {
          acb[2 * nm + m] += cc * p2;
          asb[2 * nm + m] += cs * p2;
        }
        if (order >= 3) {
          acb[3 * nm + m] += cc * p3;
          asb[3 * nm + m] += cs * p3;
        }
        col.advance();
      }
    }
    for (int k = 0; k < np; ++k) {
      const size_t node = grid.node_index(j, k);
      double f = 0, ft = 0, fp = 0, ftt = 0, ftp = 0, fpp = 0;
      double fttt = 0, fttp = 0, ftpp = 0, fppp = 0;
      for (int m = 0; m <= lsrc; ++m) {
        const double cm = grid.cos_m_phi(m, k), sm = grid.sin_m_phi(m, k);
        const double a0c = acb[0 * nm + m], a0s = asb[0 * nm + m];
        const double a1c = acb[1 * nm + m], a1s = asb[1 * nm + m];
        f += a0c * cm + a0s * sm;
        ft += a1c * cm + a1s * sm;
        fp += m * (a0s * cm - a0c * sm);
        if (order >= 2) {
          const double a2c = acb[2 * nm + m], a2s = asb[2 * nm + m];
          ftt += a2c * cm + a2s * sm;
          ftp += m * (a1s * cm - a1c * sm);
          fpp += -static_cast<double>(m) * m * (a0c * cm + a0s * sm);
        }
        if (order >= 3) {
          const double a2c = acb[2 * nm + m], a2s = asb[2 * nm + m];
          const double a3c = acb[3 * nm + m], a3s = asb[3 * nm + m];
          fttt += a3c * cm + a3s * sm;
          fttp += m * (a2s * cm - a2c * sm);
          ftpp += -static_cast<double>(m) * m * (a1c * cm + a1s * sm);
          fppp += static_cast<double>(m) * m * m * (a0c * sm - a0s * cm);
        }
      }
      jet.f[node] = f;
      jet.ft[node] = ft;
      jet.fp[node] = fp;
      if (order >= 2) {
        jet.ftt[node] = ftt;
        jet.ftp[node] = ftp;
        jet.fpp[node] = fpp;
      }
      if (order >= 3) {
        jet.fttt[node] = fttt;
        jet.fttp[node] = fttp;
        jet.ftpp[node] = ftpp;
        jet.fppp[node] = fppp;
      }
    }
  }
  return jet;
}

std::vector<double> reband_coeffs(const std::vector<double>& coeffs, int band_limit) {
  const int lsrc = band_of_coeffs(coeffs.size());
  std::vector<double> out(sh_coeff_count(band_limit), 0.0);
  const int lcopy = std::min(lsrc, band_limit);
  std::copy(coeffs.begin(), coeffs.begin() + sh_coeff_count(lcopy), out.begin());
  return out;
}

double evaluate_coeffs_at(const std::vector<double>& coeffs, double theta, double phi) {
  const int lsrc = band_of_coeffs(coeffs.size());
  const double ct = std::cos(theta), st = std::sin(theta);
  double acc = 0.0;
  for (int m = 0; m <= lsrc; ++m) {
    const double norm = (m == 0) ? kNormM0 : kNormM;
    const double cm = std::cos(m * phi), sm = std::sin(m * phi);
    LegendreColumn col(m, ct, st);
    for (int l = m; l <= lsrc; ++l) {
      acc += norm * col.value() * coeffs[sh_index(l, m)] * cm;
      if (m > 0) acc += norm * col.value() * coeffs[sh_index(l, -m)] * sm;
      col.advance();
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField ScalarField::from_samples(GridPtr grid, std::vector<double> samples) {
  if (static_cast<int>(samples.size()) != grid->n_nodes()) {
    throw std::invalid_argument("sample array does not match grid size");
  }
  ScalarField f;
  f.grid_ = std::move(grid);
  f.samples_ = std::move(samples);
  f.have_samples_ = true;
  return f;
}

ScalarField ScalarField::from_coeffs(GridPtr grid, std::vector<double> coeffs) {
  ScalarField f;
  f.grid_ = std::move(grid);
  f.coeffs_ = reband_coeffs(coeffs, f.grid_->band_limit());
  f.have_coeffs_ = true;
  return f;
}

ScalarField ScalarField::constant(GridPtr grid, double value) {
  std::vector<double> coeffs(grid->n_coeffs(), 0.0);
  coeffs[0] = value * std::sqrt(4.0 * std::numbers::pi);
  return from_coeffs(std::move(grid), std::move(coeffs));
}

ScalarField ScalarField::from_function(GridPtr grid, const std::function<double(double, double)>& f) {
  std::vector<double> samples(grid->n_nodes());
  for (int j = 0; j < grid->n_theta(); ++j) {
    for (int k = 0; k < grid->n_phi(); ++k) {
      samples[grid->node_index(j, k)] = f(grid->theta(j), grid->phi(k));
    }
  }
  return from_samples(std::move(grid), std::move(samples));
}

const std::vector<double>& ScalarField::samples() const {
  if (!have_samples_) {
    samples_ = synthesize_samples(*grid_, coeffs_);
    have_samples_ = true;
  }
  return samples_;
}

const std::vector<double>& ScalarField::coeffs() const {
  if (!have_coeffs_) {
    coeffs_ = analyze_samples(*grid_, samples_);
    have_coeffs_ = true;
  }
  return coeffs_;
}

double ScalarField::sup_norm() const {
  double sup = 0.0;
  for (double v : samples()) sup = std::max(sup, std::abs(v));
  return sup;
}

double ScalarField::l2_norm() const {
  double acc = 0.0;
  const auto& s = samples();
  for (int j = 0; j < grid_->n_theta(); ++j) {
    double row = 0.0;
    for (int k = 0; k < grid_->n_phi(); ++k) row += s[grid_->node_index(j, k)] * s[grid_->node_index(j, k)];
    acc += row * grid_->node_weight(j);
  }
  return std::sqrt(acc);
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  if (!compatible_grids(grid_, other.grid_)) throw std::invalid_argument("field grids differ");
  const auto& o = other.samples();
  samples();  // ensure
  for (size_t i = 0; i < samples_.size(); ++i) samples_[i] += o[i];
  have_coeffs_ = false;
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  if (!compatible_grids(grid_, other.grid_)) throw std::invalid_argument("field grids differ");
  const auto& o = other.samples();
  samples();
  for (size_t i = 0; i < samples_.size(); ++i) samples_[i] -= o[i];
  have_coeffs_ = false;
  return *this;
}

ScalarField& ScalarField::operator*=(double scale) {
  if (have_samples_) {
    for (double& v : samples_) v *= scale;
  }
  if (have_coeffs_) {
    for (double& v : coeffs_) v *= scale;
  }
  return *this;
}

ScalarField TangentField::norm_squared() const {
  std::vector<double> s(comp_theta.size());
  for (size_t i = 0; i < s.size(); ++i) {
    s[i] = comp_theta[i] * comp_theta[i] + comp_phi[i] * comp_phi[i];
  }
  return ScalarField::from_samples(grid, std::move(s));
}

// ---------------------------------------------------------------------------
// operations

ScalarField synthesize(GridPtr grid, std::vector<double> coeffs) {
  if (band_of_coeffs(coeffs.size()) != grid->band_limit()) {
    throw std::invalid_argument("coefficients do not match grid band limit");
  }
  return ScalarField::from_coeffs(std::move(grid), std::move(coeffs));
}

ScalarField laplacian(const ScalarField& f) {
  std::vector<double> c = f.coeffs();
  const int lmax = f.grid()->band_limit();
  for (int l = 0; l <= lmax; ++l) {
    const double eig = -static_cast<double>(l) * (l + 1);
    for (int m = -l; m <= l; ++m) c[sh_index(l, m)] *= eig;
  }
  return ScalarField::from_coeffs(f.grid(), std::move(c));
}

TangentField gradient(const ScalarField& f) {
  const auto& grid = *f.grid();
  FieldJet jet = synthesize_jet(grid, f.coeffs(), 1);
  TangentField out;
  out.grid = f.grid();
  out.comp_theta = std::move(jet.ft);
  out.comp_phi.resize(grid.n_nodes());
  for (int j = 0; j < grid.n_theta(); ++j) {
    const double inv_s = 1.0 / grid.sin_theta(j);
    for (int k = 0; k < grid.n_phi(); ++k) {
      const int node = grid.node_index(j, k);
      out.comp_phi[node] = jet.fp[node] * inv_s;
    }
  }
  return out;
}

ScalarField gradient_inner(const ScalarField& a, const ScalarField& b) {
  if (!compatible_grids(a.grid(), b.grid())) throw std::invalid_argument("field grids differ");
  TangentField ga = gradient(a), gb = gradient(b);
  std::vector<double> s(ga.comp_theta.size());
  for (size_t i = 0; i < s.size(); ++i) {
    s[i] = ga.comp_theta[i] * gb.comp_theta[i] + ga.comp_phi[i] * gb.comp_phi[i];
  }
  return ScalarField::from_samples(a.grid(), std::move(s));
}

double integrate(const ScalarField& f) {
  const auto& grid = *f.grid();
  const auto& s = f.samples();
  double acc = 0.0;
  for (int j = 0; j < grid.n_theta(); ++j) {
    double row = 0.0;
    for (int k = 0; k < grid.n_phi(); ++k) row += s[grid.node_index(j, k)];
    acc += row * grid.node_weight(j);
  }
  return acc;
}

double inner_product(const ScalarField& a, const ScalarField& b) {
  if (!compatible_grids(a.grid(), b.grid())) throw std::invalid_argument("field grids differ");
  const auto& grid = *a.grid();
  const auto& sa = a.samples();
  const auto& sb = b.samples();
  double acc = 0.0;
  for (int j = 0; j < grid.n_theta(); ++j) {
    double row = 0.0;
    for (int k = 0; k < grid.n_phi(); ++k) {
      const int node = grid.node_index(j, k);
      row += sa[node] * sb[node];
    }
    acc += row * grid.node_weight(j);
  }
  return acc;
}

ScalarField multiply_dealiased(const ScalarField& a, const ScalarField& b, double padding_factor) {
  if (!compatible_grids(a.grid(), b.grid())) throw std::invalid_argument("field grids differ");
  const int l = a.grid()->band_limit();
  const int lpad = std::min(SphereGrid::kMaxBandLimit,
                            std::max(l, static_cast<int>(std::ceil(padding_factor * l))));
  GridPtr pad = SphereGrid::create(lpad);
  std::vector<double> sa = synthesize_samples(*pad, a.coeffs());
  std::vector<double> sb = synthesize_samples(*pad, b.coeffs());
  for (size_t i = 0; i < sa.size(); ++i) sa[i] *= sb[i];
  std::vector<double> c = analyze_samples(*pad, sa);
  return ScalarField::from_coeffs(a.grid(), reband_coeffs(c, l));
}

ScalarField resample(const ScalarField& f, GridPtr target) {
  return ScalarField::from_coeffs(std::move(target), f.coeffs());
}

ScalarField solve_helmholtz(double c, const ScalarField& f, double singular_threshold) {
  const int lmax = f.grid()->band_limit();
  double sig_min = std::abs(c), sig_max = std::abs(c);
  int l_min = 0;
  for (int l = 1; l <= lmax; ++l) {
    const double sig = std::abs(c - static_cast<double>(l) * (l + 1));
    if (sig < sig_min) {
      sig_min = sig;
      l_min = l;
    }
    sig_max = std::max(sig_max, sig);
  }
  if (sig_min <= singular_threshold * sig_max) {
    throw SingularOperatorError("Helmholtz operator Delta_0 + c is singular at degree l=" +
                                    std::to_string(l_min) + " (eigenvalue " +
                                    std::to_string(c - static_cast<double>(l_min) * (l_min + 1)) + ")",
                                c - static_cast<double>(l_min) * (l_min + 1), l_min);
  }
  std::vector<double> u = f.coeffs();
  for (int l = 0; l <= lmax; ++l) {
    const double inv = 1.0 / (c - static_cast<double>(l) * (l + 1));
    for (int m = -l; m <= l; ++m) u[sh_index(l, m)] *= inv;
  }
  return ScalarField::from_coeffs(f.grid(), std::move(u));
}

ScalarField solve_helmholtz(const ScalarField& c, const ScalarField& f, double singular_threshold) {
  if (!compatible_grids(c.grid(), f.grid())) throw std::invalid_argument("field grids differ");
  const int lmax = f.grid()->band_limit();
  const int n = sh_coeff_count(lmax);
  const int lpad = std::min(SphereGrid::kMaxBandLimit, static_cast<int>(std::ceil(1.5 * lmax)));
  GridPtr pad = SphereGrid::create(lpad);
  const std::vector<double> cs = synthesize_samples(*pad, c.coeffs());

  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l <= lmax; ++l) {
    for (int m = -l; m <= l; ++m) {
      op(sh_index(l, m), sh_index(l, m)) = -static_cast<double>(l) * (l + 1);
    }
  }
  // Multiplication operator assembled by quadrature, one latitude slab at a
  // time: C_jk = sum_nodes w c Y_j Y_k (exact for band-limited c).
  const int np = pad->n_phi();
  Eigen::MatrixXd slab(np, n);
  std::vector<double> pv(lmax + 1), pd(lmax + 1);
  for (int j = 0; j < pad->n_theta(); ++j) {
    slab.setZero();
    for (int m = 0; m <= lmax; ++m) {
      const double norm = (m == 0) ? kNormM0 : kNormM;
      LegendreColumn col(m, pad->cos_theta(j), pad->sin_theta(j));
      for (int l = m; l <= lmax; ++l) {
        const double q = norm * col.value();
        for (int k = 0; k < np; ++k) {
          slab(k, sh_index(l, m)) += q * pad->cos_m_phi(m, k);
          if (m > 0) slab(k, sh_index(l, -m)) += q * pad->sin_m_phi(m, k);
        }
        col.advance();
      }
    }
    Eigen::VectorXd w(np);
    for (int k = 0; k < np; ++k) w(k) = pad->node_weight(j) * cs[pad->node_index(j, k)];
    op.noalias() += slab.transpose() * w.asDiagonal() * slab;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(op, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sig_max = svd.singularValues()(0);
  const double sig_min = svd.singularValues()(n - 1);
  if (sig_min <= singular_threshold * sig_max) {
    throw SingularOperatorError(
        "variable-coefficient Helmholtz operator is singular (smallest/largest singular value " +
            std::to_string(sig_min / sig_max) + ")",
        sig_min);
  }
  Eigen::Map<const Eigen::VectorXd> rhs(f.coeffs().data(), n);
  Eigen::VectorXd u = svd.solve(rhs);
  return ScalarField::from_coeffs(f.grid(), std::vector<double>(u.data(), u.data() + n));
}

ScalarField apply_helmholtz(const ScalarField& c, const ScalarField& u) {
  ScalarField out = laplacian(u);
  out += multiply_dealiased(c, u);
  return out;
}

std::array<ScalarField, 3> coordinate_functions(GridPtr grid) {
  return {ScalarField::from_function(grid, [](double t, double p) { return std::sin(t) * std::cos(p); }),
          ScalarField::from_function(grid, [](double t, double p) { return std::sin(t) * std::sin(p); }),
          ScalarField::from_function(grid, [](double t, double) { return std::cos(t); })};
}

}  // namespace cmcfol::spectral
