#pragma once

// Run configuration: flat key=value files with dotted keys, overridable by
// command-line flags; validated before any computation, unknown keys rejected.

#include <string>
#include <utility>
#include <vector>

#include "cmcfol/ambient_metric.hpp"
#include "cmcfol/cmc_solver.hpp"

namespace cmcfol::cli {

struct PerturbationSpec {
  std::string family = "none";  // "none" or "harmonic"
  int l = 1;
  int m = 0;
  std::string component = "rr";
  double epsilon = 0.0;
};

struct RunConfig {
  double mass = 1.0;
  int band_limit = 32;
  double r = 5.0;
  double r_min = 4.0;
  double r_max = 8.0;
  double dr = 0.5;
  double tol = 1e-10;
  int max_iters = 200;
  bool newton = false;
  bool project_kernel = false;
  double padding_factor = 1.5;
  int stability_band = 16;
  PerturbationSpec perturbation;
  std::string out_dir = "out";
  std::string format = "both";  // json | csv | both
  int threads = 0;              // 0 = all cores
  int probe_axis = 1;
  double probe_amplitude = 1e-3;

  // Set one dotted key from its text value; throws ConfigError on unknown
  // keys or unparseable values.
  void apply_key(const std::string& key, const std::string& value);

  // Merge a key=value file ('#' comments, blank lines ignored).
  void load_file(const std::string& path);

  // Inline perturbation spec "l=1,m=0,component=rr,epsilon=1e-3", or a path
  // to a key=value file with perturbation.* keys.
  void apply_perturbation_arg(const std::string& arg);

  void validate() const;

  ambient::AmbientMetric make_metric() const;
  solver::SolverConfig solver_config() const;

  // Canonical ordered key/value echo for deterministic artifacts.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

}  // namespace cmcfol::cli
