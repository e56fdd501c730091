// Command-line entry point: solve single CMC leaves, foliate a radius range,
// verify the geometric identity suite, or probe uniqueness of a fixed point.

#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cmcfol/commands.hpp"
#include "cmcfol/errors.hpp"

namespace {

struct FlagSet {
  std::optional<std::string> config_file;
  std::optional<double> mass, r, r_min, r_max, dr, tol, padding;
  std::optional<int> band_limit, max_iters, threads, stability_band, probe_axis;
  std::optional<double> probe_amplitude;
  bool newton = false;
  bool project_kernel = false;
  std::optional<std::string> perturbation, out_dir, format;
};

void add_common(CLI::App* cmd, FlagSet& f) {
  cmd->add_option("--config", f.config_file, "key=value config file (flags override it)");
  cmd->add_option("--m,--mass", f.mass, "mass parameter of the background metric");
  cmd->add_option("--L,--band-limit", f.band_limit, "spherical-harmonic band limit of the solver");
  cmd->add_option("--tol", f.tol, "Picard tolerance (sup norm of the iterate difference)");
  cmd->add_option("--max-iters", f.max_iters, "iteration cap per leaf");
  cmd->add_flag("--newton", f.newton, "Newton refinement after a short Picard warm-up");
  cmd->add_flag("--project-kernel", f.project_kernel,
                "m=0 fallback: solve on the mean-zero, l!=1 complement");
  cmd->add_option("--perturbation", f.perturbation,
                  "inline spec 'l=1,m=0,component=rr,epsilon=1e-3' or a config file");
  cmd->add_option("--padding-factor", f.padding, "geometry-grid oversampling factor");
  cmd->add_option("--stability-band", f.stability_band, "band limit of the stability eigensolve");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--format", f.format, "artifact formats: json | csv | both");
  cmd->add_option("--threads", f.threads, "worker threads for verify (default: all cores)");
}

cmcfol::cli::RunConfig build_config(const FlagSet& f) {
  cmcfol::cli::RunConfig config;
  if (f.config_file) config.load_file(*f.config_file);
  if (f.mass) config.mass = *f.mass;
  if (f.band_limit) config.band_limit = *f.band_limit;
  if (f.r) config.r = *f.r;
  if (f.r_min) config.r_min = *f.r_min;
  if (f.r_max) config.r_max = *f.r_max;
  if (f.dr) config.dr = *f.dr;
  if (f.tol) config.tol = *f.tol;
  if (f.max_iters) config.max_iters = *f.max_iters;
  if (f.newton) config.newton = true;
  if (f.project_kernel) config.project_kernel = true;
  if (f.padding) config.padding_factor = *f.padding;
  if (f.stability_band) config.stability_band = *f.stability_band;
  if (f.perturbation) config.apply_perturbation_arg(*f.perturbation);
  if (f.out_dir) config.out_dir = *f.out_dir;
  if (f.format) config.format = *f.format;
  if (f.threads) config.threads = *f.threads;
  if (f.probe_axis) config.probe_axis = *f.probe_axis;
  if (f.probe_amplitude) config.probe_amplitude = *f.probe_amplitude;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cmcfol: constant-mean-curvature sphere foliations of asymptotically\n"
      "Anti-de Sitter-Schwarzschild 3-manifolds, with verification diagnostics."};
  app.require_subcommand(1);

  FlagSet fs, ff, fv, fp;

  CLI::App* solve = app.add_subcommand("solve", "solve one CMC leaf and write leaf_r<r>.json");
  add_common(solve, fs);
  solve->add_option("--r", fs.r, "base radius of the leaf");

  CLI::App* foliate = app.add_subcommand(
      "foliate",
      "solve a family of leaves over [r-min, r-max] and write per-leaf JSON plus foliation.csv\n"
      "CSV columns: r (base radius), area, H_target (model curvature), H_achieved\n"
      "(area average), sup_phi (graph offset), sup_beta (conformal factor),\n"
      "lambda_min (smallest mean-zero stability eigenvalue), m_hat (extracted mass),\n"
      "kw_norm (normalized Kazdan-Warner centering), lemma_h_residual (H^2-4-16pi/|Sigma|),\n"
      "gb_residual (integral of K dmu - 4pi)");
  add_common(foliate, ff);
  foliate->add_option("--r-min", ff.r_min, "first leaf radius");
  foliate->add_option("--r-max", ff.r_max, "last leaf radius");
  foliate->add_option("--dr", ff.dr, "radius step (continuation seeds each leaf from the last)");

  CLI::App* verify = app.add_subcommand(
      "verify", "run the identity and estimate checks, write verify.json (exit 3 on failure)");
  add_common(verify, fv);
  verify->add_option("--r-min", fv.r_min, "first leaf radius for the leaf checks");
  verify->add_option("--r-max", fv.r_max, "last leaf radius for the leaf checks");
  verify->add_option("--dr", fv.dr, "radius step for the leaf checks");

  CLI::App* probe = app.add_subcommand(
      "probe", "re-solve a leaf from an l=1 translated seed and report the fixed-point distance");
  add_common(probe, fp);
  probe->add_option("--r", fp.r, "base radius of the leaf");
  probe->add_option("--offset-axis", fp.probe_axis, "coordinate function x_i used for the offset");
  probe->add_option("--offset-amp", fp.probe_amplitude, "amplitude of the l=1 seed offset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return cmcfol::cli::cmd_solve(build_config(fs));
    if (foliate->parsed()) return cmcfol::cli::cmd_foliate(build_config(ff));
    if (verify->parsed()) return cmcfol::cli::cmd_verify(build_config(fv));
    if (probe->parsed()) return cmcfol::cli::cmd_probe(build_config(fp));
  } catch (const cmcfol::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
