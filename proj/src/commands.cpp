#include "cmcfol/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "cmcfol/diagnostics.hpp"
#include "cmcfol/errors.hpp"
#include "cmcfol/output.hpp"

namespace cmcfol::cli {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

std::string radius_tag(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", r);
  return buf;
}

void write_config_echo(JsonWriter& w, const RunConfig& config) {
  w.key("config_echo");
  w.begin_object();
  for (const auto& [k, v] : config.echo()) w.key_value(k, v);
  w.end_object();
}

void write_leaf_body(JsonWriter& w, const solver::CmcLeaf& leaf, const diag::LeafReport& rep) {
  w.key("leaf");
  w.begin_object();
  w.key_value("r", rep.base_radius);
  w.key_value("target_h", rep.target_h);
  w.key_value("achieved_h", rep.achieved_h);
  w.key_value("sup_h_deviation", rep.sup_h_deviation);
  w.key_value("sup_phi", rep.sup_phi);
  w.key_value("sup_grad_phi", leaf.sup_grad_phi);
  w.key_value("sup_lap_phi", leaf.sup_lap_phi);
  w.key_value("ball_radius", leaf.ball_radius);
  w.key_value("ball_violated", rep.ball_violated);
  w.key_value("iterations", rep.iterations);
  w.key_value("converged", rep.converged);
  w.key_value("final_update", leaf.final_update);
  w.key_value("area", rep.area);
  w.key_value("area_radius", rep.area_radius);
  w.key_value("min_rho", rep.min_rho);
  w.key_value("rho_spread", rep.rho_spread);
  w.end_object();

  w.key("diagnostics");
  w.begin_object();
  w.key_value("lambda_min", rep.lambda_min);
  w.key_value("eigen_residual", rep.eigen_residual);
  w.key_value("gauss_bonnet_residual", rep.gauss_bonnet_residual);
  w.key_value("dual_k_gap", rep.dual_k_gap);
  w.key_value("lemma_h_residual", rep.lemma_h_residual);
  w.key_value("r_tilde", rep.r_tilde);
  w.key_value("mass_estimate", rep.mass_estimate);
  w.key_value("kw_raw", rep.kw_raw);
  w.key_value("kw_normalized", rep.kw_normalized);
  w.key_value("kw_norm", rep.kw_norm);
  w.key_value("sup_beta", rep.sup_beta);
  w.key_value("beta_residual", rep.beta_residual);
  w.key_value("beta_kernel_obstruction", rep.beta_kernel_obstruction);
  w.key_value("kw_identity", rep.kw_identity);
  w.key_value("kw_identity_norm", rep.kw_identity_norm);
  w.key_value("curvature_formula_residual", rep.curvature_formula_residual);
  w.key_value("laplace_identity_sup", rep.laplace_identity_sup);
  w.key_value("sup_radial_tangent", rep.sup_radial_tangent);
  w.key_value("radial_tangent_integral", rep.radial_tangent_integral);
  w.key_value("sup_w", rep.sup_w);
  w.key_value("euclidean_area_proxy", rep.euclidean_area_proxy);
  w.end_object();
}

std::string leaf_json(const RunConfig& config, const solver::CmcLeaf& leaf,
                      const diag::LeafReport& rep) {
  JsonWriter w;
  w.begin_object();
  w.key_value("schema_version", kSchemaVersion);
  write_config_echo(w, config);
  write_leaf_body(w, leaf, rep);
  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

std::string error_json(const RunConfig& config, const std::string& message) {
  JsonWriter w;
  w.begin_object();
  w.key_value("schema_version", kSchemaVersion);
  write_config_echo(w, config);
  w.key_value("error", message);
  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

std::string foliation_csv(const diag::FoliationReport& rep) {
  std::string out =
      "r,area,H_target,H_achieved,sup_phi,sup_beta,lambda_min,m_hat,kw_norm,"
      "lemma_h_residual,gb_residual\n";
  for (const auto& lr : rep.leaves) {
    out += format_double(lr.base_radius);
    out += ',';
    out += format_double(lr.area);
    out += ',';
    out += format_double(lr.target_h);
    out += ',';
    out += format_double(lr.achieved_h);
    out += ',';
    out += format_double(lr.sup_phi);
    out += ',';
    out += format_double(lr.sup_beta);
    out += ',';
    out += format_double(lr.lambda_min);
    out += ',';
    out += format_double(lr.mass_estimate);
    out += ',';
    out += format_double(lr.kw_norm);
    out += ',';
    out += format_double(lr.lemma_h_residual);
    out += ',';
    out += format_double(lr.gauss_bonnet_residual);
    out += '\n';
  }
  return out;
}

void write_fit(JsonWriter& w, const std::string& name, const diag::DecayFit& fit) {
  w.key(name);
  w.begin_object();
  w.key_value("verdict", fit.verdict == diag::DecayFit::Verdict::fit
                             ? std::string("fit")
                             : std::string("underflow: consistent with rapid decay"));
  w.key_value("slope", fit.slope);
  w.key_value("std_error", fit.std_error);
  w.key_value("points_used", fit.points_used);
  w.end_object();
}

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// slope checks pass when the fit is at least as steep as the bound, or when
// the series underflowed (consistent with arbitrarily fast decay)
Check slope_check(const std::string& name, const diag::DecayFit& fit, double bound,
                  bool two_sided = false, double width = 0.0) {
  Check c;
  c.name = name;
  c.value = fit.slope;
  c.tolerance = two_sided ? width : bound;
  if (fit.verdict == diag::DecayFit::Verdict::underflow) {
    c.pass = true;
    c.value = std::nan("");
  } else {
    c.pass = two_sided ? std::abs(fit.slope - bound) <= width : fit.slope <= bound;
  }
  return c;
}

void summary_line(const solver::CmcLeaf& leaf, const diag::LeafReport& rep) {
  std::printf("r=%-6g H=%.12g sup|phi|=%.3e lambda_min=%.3e m_hat=%.12g %s\n", rep.base_radius,
              rep.achieved_h, rep.sup_phi, rep.lambda_min, rep.mass_estimate,
              leaf.converged ? "converged" : "NOT CONVERGED");
}

}  // namespace

int cmd_solve(const RunConfig& config) {
  config.validate();
  const ambient::AmbientMetric metric = config.make_metric();
  solver::LeafSolver lsolver(metric, config.solver_config());
  const std::string path = config.out_dir + "/leaf_r" + radius_tag(config.r) + ".json";

  solver::CmcLeaf leaf;
  try {
    leaf = lsolver.solve_leaf(config.r);
  } catch (const SingularOperatorError& e) {
    write_file(path, error_json(config, e.what()));
    std::fprintf(stderr, "solve failed: %s\n", e.what());
    return 2;
  }
  diag::LeafReport rep = diag::make_leaf_report(leaf, metric);
  write_file(path, leaf_json(config, leaf, rep));
  summary_line(leaf, rep);
  return leaf.converged ? 0 : 2;
}

int cmd_foliate(const RunConfig& config) {
  config.validate();
  if (config.r_max < config.r_min || config.dr <= 0.0) {
    throw ConfigError("empty radius range");
  }
  const ambient::AmbientMetric metric = config.make_metric();
  solver::LeafSolver lsolver(metric, config.solver_config());
  solver::Foliation fol = lsolver.foliate(config.r_min, config.r_max, config.dr);
  diag::FoliationReport rep = diag::make_foliation_report(fol, metric);

  const bool want_json = config.format == "json" || config.format == "both";
  const bool want_csv = config.format == "csv" || config.format == "both";

  if (want_json) {
    for (size_t i = 0; i < fol.leaves.size(); ++i) {
      const std::string path =
          config.out_dir + "/leaf_r" + radius_tag(fol.leaves[i].base_radius) + ".json";
      write_file(path, leaf_json(config, fol.leaves[i], rep.leaves[i]));
    }
    JsonWriter w;
    w.begin_object();
    w.key_value("schema_version", kSchemaVersion);
    write_config_echo(w, config);
    w.key("foliation");
    w.begin_object();
    w.key_value("complete", rep.complete);
    w.key_value("failure_index", rep.failure_index);
    w.key_value("n_leaves", static_cast<int>(rep.leaves.size()));
    w.key_value("min_separation", rep.min_separation);
    w.key_value("mass_spread", rep.mass_spread);
    w.end_object();
    w.key("decay_fits");
    w.begin_object();
    for (const auto& [name, fit] : rep.fits) write_fit(w, name, fit);
    w.end_object();
    w.end_object();
    std::string body = w.str();
    body += '\n';
    write_file(config.out_dir + "/foliation.json", body);
  }
  if (want_csv) {
    write_file(config.out_dir + "/foliation.csv", foliation_csv(rep));
  }
  for (size_t i = 0; i < fol.leaves.size(); ++i) summary_line(fol.leaves[i], rep.leaves[i]);
  if (!rep.complete) {
    std::fprintf(stderr, "foliation incomplete: failure at leaf index %d\n", rep.failure_index);
    return 2;
  }
  return 0;
}

int cmd_probe(const RunConfig& config) {
  config.validate();
  const ambient::AmbientMetric metric = config.make_metric();
  solver::LeafSolver lsolver(metric, config.solver_config());

  solver::CmcLeaf leaf;
  try {
    leaf = lsolver.solve_leaf(config.r);
  } catch (const SingularOperatorError& e) {
    write_file(config.out_dir + "/probe_r" + radius_tag(config.r) + ".json",
               error_json(config, e.what()));
    std::fprintf(stderr, "probe base solve failed: %s\n", e.what());
    return 2;
  }
  if (!leaf.converged) {
    write_file(config.out_dir + "/probe_r" + radius_tag(config.r) + ".json",
               error_json(config, "base leaf did not converge"));
    return 2;
  }
  solver::ProbeReport probe =
      lsolver.uniqueness_probe(leaf, config.probe_axis, config.probe_amplitude);

  JsonWriter w;
  w.begin_object();
  w.key_value("schema_version", kSchemaVersion);
  write_config_echo(w, config);
  w.key("probe");
  w.begin_object();
  w.key_value("axis", probe.axis);
  w.key_value("amplitude", probe.amplitude);
  w.key_value("converged", probe.converged);
  w.key_value("returned_to_original", probe.returned_to_original);
  w.key_value("distance", probe.distance);
  w.key_value("iterations", probe.iterations);
  w.end_object();
  w.end_object();
  std::string body = w.str();
  body += '\n';
  write_file(config.out_dir + "/probe_r" + radius_tag(config.r) + ".json", body);
  std::printf("probe axis=%d amplitude=%g returned=%s distance=%.3e\n", probe.axis,
              probe.amplitude, probe.returned_to_original ? "true" : "false", probe.distance);
  return probe.converged ? 0 : 2;
}

int cmd_verify(const RunConfig& config) {
  config.validate();
  const ambient::AmbientMetric metric = config.make_metric();
  const double mass = metric.mass();
  std::vector<Check> checks;

  // ambient identities at scattered points
  {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double r = 2.5 + 5.5 * std::fmod(0.7548776662466927 * (i + 1), 1.0);
      const double theta = 0.2 + 2.7 * std::fmod(0.5698402909980532 * (i + 1), 1.0);
      const double phi = 2.0 * std::numbers::pi * std::fmod(0.3247179572447461 * (i + 1), 1.0);
      worst = std::max(worst, std::abs(metric.curvature_at(r, theta, phi).scalar + 6.0));
    }
    checks.push_back({"scalar_curvature_minus_6", worst, 1e-8, worst <= 1e-8});
  }
  {
    const double tol = metric.perturbation() ? 1e-4 : 1e-6;
    double worst = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double r = 3.0 + 0.6 * i;
      worst = std::max(worst, ambient::bianchi_residual(metric, r, 1.0 + 0.2 * i, 0.7 * i));
    }
    checks.push_back({"bianchi_identity", worst, tol, worst <= tol});
  }
  if (metric.perturbation()) {
    ambient::DecayCheck dc = ambient::verify_decay(metric, 2.5, 9.0, 32);
    const double bound = 100.0 * std::abs(metric.perturbation()->epsilon());
    const double worst = std::max({dc.q_bound, dc.dq_bound, dc.d2q_bound});
    checks.push_back({"perturbation_decay_bound", worst, bound, worst <= bound});
  }
  if (mass > 0.0) {
    // decay rate of the model mean-curvature gap on coordinate spheres
    auto grid = spectral::SphereGrid::create(std::min(config.band_limit, 24));
    std::vector<std::pair<double, double>> series;
    for (double r = 3.0; r <= 7.01; r += 1.0) {
      geometry::RadialGraph graph(grid, spectral::ScalarField::constant(grid, r), metric);
      geometry::GeometryOptions opts;
      opts.curvature = false;
      opts.intrinsic_gauss = false;
      geometry::LeafGeometry geom = compute_geometry(graph, opts);
      const double sh = std::sinh(r);
      const double model = 2.0 * std::cosh(r) / sh - mass / (sh * sh * sh);
      double sup = 0.0;
      for (double h : geom.mean_curvature.samples()) sup = std::max(sup, std::abs(h - model));
      series.emplace_back(r, sup);
    }
    checks.push_back(slope_check("h_model_rate", diag::decay_fit(series), -5.0, true, 0.3));
  }

  // leaf pipeline, independent solves (no continuation) so they can run in parallel
  {
    solver::LeafSolver lsolver(metric, config.solver_config());
    const int n_leaves =
        static_cast<int>(std::floor((config.r_max - config.r_min) / config.dr + 1e-9)) + 1;
    std::vector<double> radii;
    for (int i = 0; i < n_leaves; ++i) radii.push_back(config.r_min + i * config.dr);

    std::vector<std::optional<solver::CmcLeaf>> leaves(radii.size());
    std::vector<std::string> errors(radii.size());
    int n_threads = config.threads > 0 ? config.threads
                                       : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(radii.size())));
    std::atomic<size_t> cursor{0};
    auto worker = [&]() {
      while (true) {
        const size_t i = cursor.fetch_add(1);
        if (i >= radii.size()) return;
        try {
          leaves[i] = lsolver.solve_leaf(radii[i]);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    bool all_ok = true;
    for (size_t i = 0; i < radii.size(); ++i) {
      if (!leaves[i] || !leaves[i]->converged) all_ok = false;
    }
    checks.push_back({"leaves_converged", all_ok ? 1.0 : 0.0, 1.0, all_ok});

    if (all_ok) {
      solver::Foliation fol;
      for (auto& l : leaves) fol.leaves.push_back(std::move(*l));
      fol.complete = true;
      fol.min_separation = 1e300;
      for (size_t i = 1; i < fol.leaves.size(); ++i) {
        const auto& prev = fol.leaves[i - 1].phi.samples();
        const auto& cur = fol.leaves[i].phi.samples();
        double gap = 1e300;
        for (size_t n = 0; n < cur.size(); ++n) {
          gap = std::min(gap, fol.leaves[i].base_radius - fol.leaves[i - 1].base_radius +
                                  cur[n] - prev[n]);
        }
        fol.min_separation = std::min(fol.min_separation, gap);
      }
      diag::FoliationReport rep = diag::make_foliation_report(fol, metric);

      double gb = 0.0, dual = 0.0, lam = 1e300, ball = 0.0, eig = 0.0;
      for (const auto& lr : rep.leaves) {
        gb = std::max(gb, std::abs(lr.gauss_bonnet_residual) / kFourPi);
        dual = std::max(dual, lr.dual_k_gap);
        lam = std::min(lam, lr.lambda_min);
        eig = std::max(eig, lr.eigen_residual);
        ball = std::max(ball, lr.sup_phi - std::exp(-lr.base_radius) / lr.base_radius);
      }
      checks.push_back({"gauss_bonnet", gb, 1e-6, gb <= 1e-6});
      checks.push_back({"dual_path_gauss_curvature", dual, 1e-5, dual <= 1e-5});
      checks.push_back({"stability_nonnegative", lam, -1e-6, lam >= -1e-6});
      checks.push_back({"eigenpair_residual", eig, 1e-6, eig <= 1e-6});
      checks.push_back({"invariant_ball", ball, 0.0, ball <= 0.0});
      checks.push_back(
          {"leaf_separation", rep.min_separation, 0.0, rep.min_separation > 0.0});
      if (mass > 0.0) {
        checks.push_back({"mass_recovery", rep.mass_spread, 0.02, rep.mass_spread <= 0.02});
        if (rep.fits.count("lemma_h_residual")) {
          checks.push_back(
              slope_check("lemma_h_decay", rep.fits.at("lemma_h_residual"), -3.0 + 0.3));
        }
        if (metric.perturbation() && rep.fits.count("kw_centering")) {
          // the centering signal exists only when something bends the leaves;
          // for the exact metric the series is pure roundoff
          checks.push_back(slope_check("kw_centering_decay", rep.fits.at("kw_centering"), -0.5));
        } else {
          // rotationally symmetric metric: leaves must stay centered to the
          // solver's l=1 resolution, which degrades like e^{2r} past r ~ 6
          double kw = 0.0, rmax = 0.0;
          for (const auto& lr : rep.leaves) {
            kw = std::max(kw, lr.kw_norm);
            rmax = std::max(rmax, lr.base_radius);
          }
          const double tol = 1e-9 * std::max(1.0, std::exp(2.0 * (rmax - 6.0)));
          checks.push_back({"kw_centering_magnitude", kw, tol, kw <= tol});
        }
        if (rep.fits.count("curvature_formula_residual")) {
          checks.push_back(slope_check("curvature_formula_rate",
                                       rep.fits.at("curvature_formula_residual"), -5.0 + 0.3));
        }
      } else {
        // the mass estimate multiplies the H error by sinh^3 of the area
        // radius, so its zero-mass floor grows accordingly
        double mhat = 0.0, rmax = 0.0;
        for (const auto& lr : rep.leaves) {
          mhat = std::max(mhat, std::abs(lr.mass_estimate));
          rmax = std::max(rmax, lr.base_radius);
        }
        const double tol = std::max(1e-8, 200.0 * std::pow(std::sinh(rmax), 3) * 2.22e-16);
        checks.push_back({"mass_zero_recovery", mhat, tol, mhat <= tol});
        double lam0 = 0.0;
        for (const auto& lr : rep.leaves) lam0 = std::max(lam0, std::abs(lr.lambda_min));
        checks.push_back({"translation_kernel", lam0, 1e-6, lam0 <= 1e-6});
      }
    }
  }

  bool all_pass = true;
  JsonWriter w;
  w.begin_object();
  w.key_value("schema_version", kSchemaVersion);
  write_config_echo(w, config);
  w.key("checks");
  w.begin_array();
  for (const auto& c : checks) {
    w.begin_object();
    w.key_value("name", c.name);
    w.key_value("value", c.value);
    w.key_value("tolerance", c.tolerance);
    w.key_value("pass", c.pass);
    w.end_object();
    all_pass = all_pass && c.pass;
  }
  w.end_array();
  w.key_value("passed", all_pass);
  w.end_object();
  std::string body = w.str();
  body += '\n';
  write_file(config.out_dir + "/verify.json", body);

  for (const auto& c : checks) {
    std::printf("[%s] %-28s value=%.6g tolerance=%.6g\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.value, c.tolerance);
  }
  if (!all_pass) {
    std::fprintf(stderr, "verification failed\n");
    return 3;
  }
  return 0;
}

}  // namespace cmcfol::cli
