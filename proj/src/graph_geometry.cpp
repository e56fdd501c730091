#include "cmcfol/graph_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmcfol/errors.hpp"

namespace cmcfol::geometry {

using ambient::Christoffel;
using ambient::CurvatureTensors;
using ambient::MetricJet;
using ambient::WarpSampler;
using spectral::FieldJet;
using spectral::LegendreColumn;
using spectral::SphereGrid;
using spectral::sh_index;

namespace {

constexpr double kTracelessFloor = -1e-10;

inline int sym2(int i, int j) { return i + j; }  // 00 -> 0, 01/10 -> 1, 11 -> 2

double det3(const double m[3][3]) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace

RadialGraph::RadialGraph(GridPtr grid_in, ScalarField rho_in, const ambient::AmbientMetric& m)
    : grid(std::move(grid_in)), rho(std::move(rho_in)), metric(&m) {
  if (rho.grid() != grid) rho = spectral::resample(rho, grid);
  double rmin = 1e300;
  for (double v : rho.samples()) {
    if (!std::isfinite(v)) throw NumericError("non-finite radius in radial graph");
    rmin = std::min(rmin, v);
  }
  if (rmin <= m.background().min_radius()) {
    throw ValidityError("radial graph dips to r = " + std::to_string(rmin) +
                        ", at or below the horizon clearance r = " +
                        std::to_string(m.background().min_radius()));
  }
}

LeafGeometry compute_geometry(const RadialGraph& graph, const GeometryOptions& opts) {
  const SphereGrid& grid = *graph.grid;
  const ambient::AmbientMetric& metric = *graph.metric;
  const int nn = grid.n_nodes();

  const int rho_order = opts.intrinsic_gauss ? 3 : 2;
  FieldJet rj = spectral::synthesize_jet(grid, graph.rho.coeffs(), rho_order);
  const int metric_order = (opts.curvature || opts.intrinsic_gauss) ? 2 : 1;

  double rho_min = 1e300, rho_max = -1e300;
  for (double v : rj.f) {
    rho_min = std::min(rho_min, v);
    rho_max = std::max(rho_max, v);
  }
  WarpSampler warp(metric.background(), 0.5 * (rho_min + rho_max));

  LeafGeometry geom;
  geom.grid = graph.grid;
  geom.g_tt.resize(nn);
  geom.g_tp.resize(nn);
  geom.g_pp.resize(nn);
  geom.inv_tt.resize(nn);
  geom.inv_tp.resize(nn);
  geom.inv_pp.resize(nn);
  geom.area_element.resize(nn);
  geom.surf_gamma.resize(static_cast<size_t>(nn) * 6);
  std::vector<double> h_s(nn), a2_s(nn), aring_s(nn), nr_s(nn), rt_s(nn);
  std::vector<double> ricn_s, ka_s, kb_s;
  if (opts.curvature) {
    ricn_s.resize(nn);
    ka_s.resize(nn);
  }
  if (opts.intrinsic_gauss) kb_s.resize(nn);

  double area = 0.0;

  for (int j = 0; j < grid.n_theta(); ++j) {
    const double theta = grid.theta(j);
    const double st = grid.sin_theta(j);
    for (int k = 0; k < grid.n_phi(); ++k) {
      const int n = grid.node_index(j, k);
      const double rho = rj.f[n];
      const double d1[2] = {rj.ft[n], rj.fp[n]};
      const double d2[2][2] = {{rj.ftt[n], rj.ftp[n]}, {rj.ftp[n], rj.fpp[n]}};

      MetricJet jet = metric.jet_at(rho, theta, grid.phi(k), metric_order, warp.psi(rho));
      double ginv[3][3];
      ambient::invert_sym3(jet.g, ginv);
      Christoffel gam = ambient::christoffel_from_jet(jet);

      // tangents T_i = d_i X, X = (rho(omega), omega)
      double tan[2][3] = {{d1[0], 1.0, 0.0}, {d1[1], 0.0, 1.0}};

      double gt[2][2];
      for (int i = 0; i < 2; ++i) {
        for (int jj = i; jj < 2; ++jj) {
          double acc = 0.0;
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) acc += jet.g[a][b] * tan[i][a] * tan[jj][b];
          }
          gt[i][jj] = acc;
          gt[jj][i] = acc;
        }
      }
      const double det = gt[0][0] * gt[1][1] - gt[0][1] * gt[0][1];
      if (det <= 0.0 || gt[0][0] <= 0.0) {
        throw ValidityError("degenerate induced metric on the radial graph");
      }
      const double gi[2][2] = {{gt[1][1] / det, -gt[0][1] / det}, {-gt[0][1] / det, gt[0][0] / det}};

      // outward unit normal from the annihilating covector (1, -rho_t, -rho_p)
      const double ncov[3] = {1.0, -d1[0], -d1[1]};
      double nup[3] = {0.0, 0.0, 0.0};
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) nup[a] += ginv[a][b] * ncov[b];
      }
      double n2 = 0.0;
      for (int a = 0; a < 3; ++a) n2 += nup[a] * ncov[a];
      const double nlen = std::sqrt(n2);
      double nu[3];
      for (int a = 0; a < 3; ++a) nu[a] = nup[a] / nlen;

      // A_ij = -(rho_ij + n_a Gamma^a_bc T_i^b T_j^c) / |n|
      double aff[2][2];
      for (int i = 0; i < 2; ++i) {
        for (int jj = i; jj < 2; ++jj) {
          double chr = 0.0;
          for (int a = 0; a < 3; ++a) {
            double gsum = 0.0;
            for (int b = 0; b < 3; ++b) {
              for (int c = 0; c < 3; ++c) gsum += gam.gamma[a][b][c] * tan[i][b] * tan[jj][c];
            }
            chr += ncov[a] * gsum;
          }
          aff[i][jj] = -(d2[i][jj] + chr) / nlen;
          aff[jj][i] = aff[i][jj];
        }
      }
      double h = 0.0, a2 = 0.0;
      for (int i = 0; i < 2; ++i) {
        for (int jj = 0; jj < 2; ++jj) {
          h += gi[i][jj] * aff[i][jj];
          for (int p = 0; p < 2; ++p) {
            for (int q = 0; q < 2; ++q) a2 += gi[i][p] * gi[jj][q] * aff[i][jj] * aff[p][q];
          }
        }
      }
      double aring = a2 - 0.5 * h * h;
      if (aring < kTracelessFloor) {
        throw NumericError("|A|^2 - H^2/2 = " + std::to_string(aring) +
                           " fell below the clamping floor");
      }
      aring = std::max(0.0, aring);

      double nr = 0.0;
      for (int b = 0; b < 3; ++b) nr += jet.g[0][b] * nu[b];
      const double rt = jet.g[0][0] - nr * nr;

      // first total derivatives of the induced metric (surface Christoffels)
      double dgt[2][3];  // dgt[k][sym(ij)]
      for (int kk = 0; kk < 2; ++kk) {
        double dg_tot[3][3];
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) {
            dg_tot[a][b] = jet.dg[0][a][b] * d1[kk] + jet.dg[kk + 1][a][b];
          }
        }
        for (int i = 0; i < 2; ++i) {
          for (int jj = i; jj < 2; ++jj) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a) {
              for (int b = 0; b < 3; ++b) acc += dg_tot[a][b] * tan[i][a] * tan[jj][b];
            }
            // D_k T_i = (rho_ik, 0, 0)
            for (int b = 0; b < 3; ++b) {
              acc += jet.g[0][b] * d2[i][kk] * tan[jj][b] + jet.g[b][0] * tan[i][b] * d2[jj][kk];
            }
            dgt[kk][sym2(i, jj)] = acc;
          }
        }
      }
      auto dg_at = [&dgt](int k, int i, int jj) { return dgt[k][sym2(i, jj)]; };
      for (int kk = 0; kk < 2; ++kk) {
        for (int i = 0; i < 2; ++i) {
          for (int jj = i; jj < 2; ++jj) {
            double acc = 0.0;
            for (int l = 0; l < 2; ++l) {
              acc += gi[kk][l] * (dg_at(i, jj, l) + dg_at(jj, i, l) - dg_at(l, i, jj));
            }
            geom.surf_gamma[static_cast<size_t>(n) * 6 + kk * 3 + sym2(i, jj)] = 0.5 * acc;
          }
        }
      }

      if (opts.curvature) {
        CurvatureTensors curv = ambient::curvature_from_jet(jet);
        double rnn = 0.0;
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) rnn += curv.ricci[a][b] * nu[a] * nu[b];
        }
        ricn_s[n] = rnn;
        ka_s[n] = 0.5 * curv.scalar - rnn + 0.25 * h * h - 0.5 * aring;
      }

      if (opts.intrinsic_gauss) {
        const double d3t[2][2][2] = {{{rj.fttt[n], rj.fttp[n]}, {rj.fttp[n], rj.ftpp[n]}},
                                     {{rj.fttp[n], rj.ftpp[n]}, {rj.ftpp[n], rj.fppp[n]}}};
        // second total derivatives of the induced metric
        double ddgt[2][2][3];
        for (int kk = 0; kk < 2; ++kk) {
          for (int ll = 0; ll < 2; ++ll) {
            double dgk[3][3], dgl[3][3], ddg[3][3];
            for (int a = 0; a < 3; ++a) {
              for (int b = 0; b < 3; ++b) {
                dgk[a][b] = jet.dg[0][a][b] * d1[kk] + jet.dg[kk + 1][a][b];
                dgl[a][b] = jet.dg[0][a][b] * d1[ll] + jet.dg[ll + 1][a][b];
                ddg[a][b] = jet.d2g[0][0][a][b] * d1[kk] * d1[ll] + jet.dg[0][a][b] * d2[kk][ll] +
                            jet.d2g[0][ll + 1][a][b] * d1[kk] + jet.d2g[kk + 1][0][a][b] * d1[ll] +
                            jet.d2g[kk + 1][ll + 1][a][b];
              }
            }
            for (int i = 0; i < 2; ++i) {
              for (int jj = i; jj < 2; ++jj) {
                double acc = 0.0;
                for (int a = 0; a < 3; ++a) {
                  for (int b = 0; b < 3; ++b) acc += ddg[a][b] * tan[i][a] * tan[jj][b];
                }
                for (int b = 0; b < 3; ++b) {
                  // D_l (T terms): T_i^r derivatives are rho second/third jets
                  acc += dgk[0][b] * d2[i][ll] * tan[jj][b] + dgk[b][0] * tan[i][b] * d2[jj][ll];
                  acc += dgl[0][b] * d2[i][kk] * tan[jj][b] + dgl[b][0] * tan[i][b] * d2[jj][kk];
                  acc += jet.g[0][b] * d3t[i][kk][ll] * tan[jj][b] +
                         jet.g[b][0] * tan[i][b] * d3t[jj][kk][ll];
                }
                acc += jet.g[0][0] * (d2[i][kk] * d2[jj][ll] + d2[i][ll] * d2[jj][kk]);
                ddgt[kk][ll][sym2(i, jj)] = acc;
              }
            }
          }
        }
        const double E = gt[0][0], F = gt[0][1], G = gt[1][1];
        const double Eu = dgt[0][0], Ev = dgt[1][0];
        const double Fu = dgt[0][1], Fv = dgt[1][1];
        const double Gu = dgt[0][2], Gv = dgt[1][2];
        const double Evv = ddgt[1][1][0], Fuv = ddgt[0][1][1], Guu = ddgt[0][0][2];
        const double m1[3][3] = {
            {-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev},
            {Fv - 0.5 * Gu, E, F},
            {0.5 * Gv, F, G}};
        const double m2[3][3] = {{0.0, 0.5 * Ev, 0.5 * Gu}, {0.5 * Ev, E, F}, {0.5 * Gu, F, G}};
        kb_s[n] = (det3(m1) - det3(m2)) / (det * det);
      }

      geom.g_tt[n] = gt[0][0];
      geom.g_tp[n] = gt[0][1];
      geom.g_pp[n] = gt[1][1];
      geom.inv_tt[n] = gi[0][0];
      geom.inv_tp[n] = gi[0][1];
      geom.inv_pp[n] = gi[1][1];
      const double jel = std::sqrt(det) / st;
      geom.area_element[n] = jel;
      area += grid.node_weight(j) * jel;
      h_s[n] = h;
      a2_s[n] = a2;
      aring_s[n] = aring;
      nr_s[n] = nr;
      rt_s[n] = rt;
    }
  }

  geom.area = area;
  geom.area_radius = std::asinh(std::sqrt(area / (4.0 * std::numbers::pi)));
  geom.mean_curvature = ScalarField::from_samples(graph.grid, std::move(h_s));
  geom.second_form_norm_sq = ScalarField::from_samples(graph.grid, std::move(a2_s));
  geom.traceless_norm_sq = ScalarField::from_samples(graph.grid, std::move(aring_s));
  geom.normal_radial = ScalarField::from_samples(graph.grid, std::move(nr_s));
  geom.radial_tangent_sq = ScalarField::from_samples(graph.grid, std::move(rt_s));
  if (opts.curvature) {
    geom.ricci_normal = ScalarField::from_samples(graph.grid, std::move(ricn_s));
    geom.gauss_curvature = ScalarField::from_samples(graph.grid, std::move(ka_s));
  }
  if (opts.intrinsic_gauss) {
    geom.gauss_curvature_intrinsic = ScalarField::from_samples(graph.grid, std::move(kb_s));
  }
  return geom;
}

ScalarField surface_laplacian(const LeafGeometry& geom, const ScalarField& f) {
  const SphereGrid& grid = *geom.grid;
  std::vector<double> coeffs = f.coeffs();
  if (f.grid() != geom.grid) coeffs = spectral::reband_coeffs(coeffs, grid.band_limit());
  FieldJet jet = spectral::synthesize_jet(grid, coeffs, 2);
  std::vector<double> out(grid.n_nodes());
  for (int n = 0; n < grid.n_nodes(); ++n) {
    const double d1[2] = {jet.ft[n], jet.fp[n]};
    const double d2[2][2] = {{jet.ftt[n], jet.ftp[n]}, {jet.ftp[n], jet.fpp[n]}};
    const double gi[2][2] = {{geom.inv_tt[n], geom.inv_tp[n]}, {geom.inv_tp[n], geom.inv_pp[n]}};
    const double* gam = geom.surf_gamma.data() + static_cast<size_t>(n) * 6;
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double hess = d2[i][j];
        for (int k = 0; k < 2; ++k) hess -= gam[k * 3 + sym2(i, j)] * d1[k];
        acc += gi[i][j] * hess;
      }
    }
    out[n] = acc;
  }
  return ScalarField::from_samples(geom.grid, std::move(out));
}

ScalarField laplace_identity_residual(const RadialGraph& graph, const LeafGeometry& geom) {
  ScalarField lap = surface_laplacian(geom, graph.rho);
  const double mass = graph.metric->mass();
  const auto& rho = graph.rho.samples();
  const auto& h = geom.mean_curvature.samples();
  const auto& nr = geom.normal_radial.samples();
  const auto& rt = geom.radial_tangent_sq.samples();
  std::vector<double> out = lap.samples();
  for (size_t n = 0; n < out.size(); ++n) {
    const double sh = std::sinh(rho[n]);
    const double rhs = 2.0 * std::cosh(rho[n]) / sh - mass / (sh * sh * sh) - h[n] +
                       (h[n] - 2.0) * (1.0 - nr[n]) + (1.0 - nr[n]) * (1.0 - nr[n]) -
                       2.0 * rt[n] * std::exp(-2.0 * rho[n]);
    out[n] -= rhs;
  }
  return ScalarField::from_samples(graph.grid, std::move(out));
}

void assemble_variation_matrices(const LeafGeometry& geom, int band_limit, Eigen::MatrixXd& op,
                                 Eigen::MatrixXd& mass) {
  const SphereGrid& grid = *geom.grid;
  const int n_basis = spectral::sh_coeff_count(band_limit);
  const int np = grid.n_phi();
  if (geom.ricci_normal.empty()) {
    throw std::invalid_argument("variation matrices need a geometry computed with curvature");
  }

  // potential W = |A|^2 + Ric(nu, nu)
  std::vector<double> w_pot(grid.n_nodes());
  {
    const auto& a2 = geom.second_form_norm_sq.samples();
    const auto& rn = geom.ricci_normal.samples();
    for (int n = 0; n < grid.n_nodes(); ++n) w_pot[n] = a2[n] + rn[n];
  }

  op = Eigen::MatrixXd::Zero(n_basis, n_basis);
  mass = Eigen::MatrixXd::Zero(n_basis, n_basis);
  Eigen::MatrixXd yv(np, n_basis), gt(np, n_basis), gp(np, n_basis);
  Eigen::VectorXd w0(np), wtt(np), wtp(np), wpp(np), wv(np);

  const double norm0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const double normm = 1.0 / std::sqrt(std::numbers::pi);
  for (int j = 0; j < grid.n_theta(); ++j) {
    yv.setZero();
    gt.setZero();
    gp.setZero();
    for (int m = 0; m <= band_limit; ++m) {
      const double norm = (m == 0) ? norm0 : normm;
      LegendreColumn col(m, grid.cos_theta(j), grid.sin_theta(j));
      for (int l = m; l <= band_limit; ++l) {
        const double p = norm * col.value();
        const double dp = norm * col.dtheta();
        const int ic = sh_index(l, m);
        const int is = (m > 0) ? sh_index(l, -m) : -1;
        for (int k = 0; k < np; ++k) {
          const double cm = grid.cos_m_phi(m, k), sm = grid.sin_m_phi(m, k);
          yv(k, ic) += p * cm;
          gt(k, ic) += dp * cm;
          gp(k, ic) += -m * p * sm;
          if (is >= 0) {
            yv(k, is) += p * sm;
            gt(k, is) += dp * sm;
            gp(k, is) += m * p * cm;
          }
        }
        col.advance();
      }
    }
    for (int k = 0; k < np; ++k) {
      const int n = grid.node_index(j, k);
      const double w = grid.node_weight(j) * geom.area_element[n];
      w0(k) = w;
      wtt(k) = w * geom.inv_tt[n];
      wtp(k) = w * geom.inv_tp[n];
      wpp(k) = w * geom.inv_pp[n];
      wv(k) = w * w_pot[n];
    }
    op.noalias() += gt.transpose() * wtt.asDiagonal() * gt;
    op.noalias() += gt.transpose() * wtp.asDiagonal() * gp;
    op.noalias() += gp.transpose() * wtp.asDiagonal() * gt;
    op.noalias() += gp.transpose() * wpp.asDiagonal() * gp;
    op.noalias() -= yv.transpose() * wv.asDiagonal() * yv;
    mass.noalias() += yv.transpose() * w0.asDiagonal() * yv;
  }
  op = 0.5 * (op + op.transpose()).eval();
  mass = 0.5 * (mass + mass.transpose()).eval();
}

StabilityReport stability_spectrum(const RadialGraph& graph, int band_limit, int quadrature_band) {
  if (quadrature_band < 0) quadrature_band = std::max(2 * band_limit, 24);
  quadrature_band = std::min(quadrature_band, SphereGrid::kMaxBandLimit);
  band_limit = std::min(band_limit, quadrature_band);
  GridPtr qgrid = SphereGrid::create(quadrature_band);

  RadialGraph qgraph(qgrid, spectral::resample(graph.rho, qgrid), *graph.metric);
  GeometryOptions opts;
  opts.curvature = true;
  opts.intrinsic_gauss = false;
  LeafGeometry geom = compute_geometry(qgraph, opts);

  const SphereGrid& grid = *qgrid;
  const int n_basis = spectral::sh_coeff_count(band_limit);
  const int np = grid.n_phi();

  std::vector<double> w_pot(grid.n_nodes());
  {
    const auto& a2 = geom.second_form_norm_sq.samples();
    const auto& rn = geom.ricci_normal.samples();
    for (int n = 0; n < grid.n_nodes(); ++n) w_pot[n] = a2[n] + rn[n];
  }

  Eigen::MatrixXd op, mass;
  assemble_variation_matrices(geom, band_limit, op, mass);

  // reduce the generalized problem with a Cholesky factor of the mass matrix
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success) throw NumericError("stability mass matrix is not positive definite");
  Eigen::MatrixXd lfac = llt.matrixL();
  Eigen::MatrixXd b = lfac.triangularView<Eigen::Lower>().solve(op);
  b = lfac.triangularView<Eigen::Lower>().solve(b.transpose().eval());
  b = 0.5 * (b + b.transpose()).eval();

  // mean-zero constraint: v M-orthogonal to the constant coefficient vector
  Eigen::VectorXd q = lfac.transpose() * Eigen::VectorXd::Unit(n_basis, 0);
  q.normalize();
  Eigen::VectorXd u = q - Eigen::VectorXd::Unit(n_basis, 0);
  Eigen::MatrixXd house = Eigen::MatrixXd::Identity(n_basis, n_basis);
  if (u.norm() > 1e-14) {
    house.noalias() -= (2.0 / u.squaredNorm()) * (u * u.transpose());
  }
  // columns 1.. of the reflector span the constraint subspace
  Eigen::MatrixXd basis = house.rightCols(n_basis - 1);
  Eigen::MatrixXd b_red = basis.transpose() * b * basis;
  b_red = 0.5 * (b_red + b_red.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b_red);
  if (eig.info() != Eigen::Success) throw NumericError("stability eigensolver failed");

  StabilityReport report;
  report.band_limit = band_limit;
  report.quadrature_band = quadrature_band;
  report.op_matrix = op;
  report.mass_matrix = mass;
  report.lambda_min = eig.eigenvalues()(0);

  Eigen::VectorXd w = basis * eig.eigenvectors().col(0);
  Eigen::VectorXd v = lfac.transpose().triangularView<Eigen::Upper>().solve(w);
  std::vector<double> coeffs(v.data(), v.data() + n_basis);
  ScalarField field = ScalarField::from_coeffs(qgrid, spectral::reband_coeffs(coeffs, quadrature_band));

  // residual against the full operator on the quadrature grid
  ScalarField lf = surface_laplacian(geom, field) * (-1.0);
  {
    std::vector<double> s = lf.samples();
    const auto& fs = field.samples();
    for (int n = 0; n < grid.n_nodes(); ++n) s[n] -= (w_pot[n] + report.lambda_min) * fs[n];
    ScalarField resid = ScalarField::from_samples(qgrid, std::move(s));
    double num = 0.0, den = 0.0;
    const auto& rs = resid.samples();
    for (int j = 0; j < grid.n_theta(); ++j) {
      for (int k = 0; k < np; ++k) {
        const int n = grid.node_index(j, k);
        const double w2 = grid.node_weight(j) * geom.area_element[n];
        num += w2 * rs[n] * rs[n];
        den += w2 * fs[n] * fs[n];
      }
    }
    report.eigen_residual = std::sqrt(num / den);
  }
  report.eigenfield = std::move(field);
  return report;
}

}  // namespace cmcfol::geometry
