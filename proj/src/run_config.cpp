#include "cmcfol/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cmcfol/errors.hpp"

namespace cmcfol::cli {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse integer '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("config key '" + key + "': cannot parse boolean '" + value + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::apply_key(const std::string& key, const std::string& value) {
  if (key == "mass") mass = parse_double(key, value);
  else if (key == "band_limit") band_limit = parse_int(key, value);
  else if (key == "r") r = parse_double(key, value);
  else if (key == "r_min") r_min = parse_double(key, value);
  else if (key == "r_max") r_max = parse_double(key, value);
  else if (key == "dr") dr = parse_double(key, value);
  else if (key == "tol") tol = parse_double(key, value);
  else if (key == "max_iters") max_iters = parse_int(key, value);
  else if (key == "newton") newton = parse_bool(key, value);
  else if (key == "project_kernel") project_kernel = parse_bool(key, value);
  else if (key == "padding_factor") padding_factor = parse_double(key, value);
  else if (key == "stability_band") stability_band = parse_int(key, value);
  else if (key == "perturbation.family") perturbation.family = value;
  else if (key == "perturbation.l") perturbation.l = parse_int(key, value);
  else if (key == "perturbation.m") perturbation.m = parse_int(key, value);
  else if (key == "perturbation.component") perturbation.component = value;
  else if (key == "perturbation.epsilon") perturbation.epsilon = parse_double(key, value);
  else if (key == "out_dir") out_dir = value;
  else if (key == "format") format = value;
  else if (key == "threads") threads = parse_int(key, value);
  else if (key == "probe_axis") probe_axis = parse_int(key, value);
  else if (key == "probe_amplitude") probe_amplitude = parse_double(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto kl = key.find_last_not_of(" \t");
    key = key.substr(0, kl + 1);
    const auto vf = value.find_first_not_of(" \t");
    value = (vf == std::string::npos) ? "" : value.substr(vf);
    apply_key(key, value);
  }
}

void RunConfig::apply_perturbation_arg(const std::string& arg) {
  if (arg.find('=') == std::string::npos) {
    load_file(arg);
    return;
  }
  {
    std::ifstream probe(arg);
    if (probe.good()) {
      load_file(arg);
      return;
    }
  }
  perturbation.family = "harmonic";
  std::stringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("perturbation spec item '" + item + "' is not key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "family") perturbation.family = value;
    else if (key == "l") perturbation.l = parse_int("perturbation.l", value);
    else if (key == "m") perturbation.m = parse_int("perturbation.m", value);
    else if (key == "component") perturbation.component = value;
    else if (key == "epsilon") perturbation.epsilon = parse_double("perturbation.epsilon", value);
    else throw ConfigError("unknown perturbation key '" + key + "'");
  }
}

void RunConfig::validate() const {
  if (mass < 0.0) throw ConfigError("mass must be nonnegative");
  if (format != "json" && format != "csv" && format != "both") {
    throw ConfigError("format must be json, csv or both");
  }
  if (perturbation.family != "none" && perturbation.family != "harmonic") {
    throw ConfigError("perturbation.family must be none or harmonic");
  }
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (probe_axis < 1 || probe_axis > 3) throw ConfigError("probe_axis must be 1, 2 or 3");
  solver_config().validate();
  if (perturbation.family == "harmonic") {
    ambient::chart_component_from_string(perturbation.component);
  }
}

ambient::AmbientMetric RunConfig::make_metric() const {
  ambient::AdsSchwarzschild bg(mass);
  if (perturbation.family == "none" || perturbation.epsilon == 0.0) {
    return ambient::AmbientMetric(bg);
  }
  ambient::Perturbation q(perturbation.l, perturbation.m,
                          ambient::chart_component_from_string(perturbation.component),
                          perturbation.epsilon);
  return ambient::AmbientMetric(bg, q);
}

solver::SolverConfig RunConfig::solver_config() const {
  solver::SolverConfig cfg;
  cfg.band_limit = band_limit;
  cfg.picard_tol = tol;
  cfg.max_iters = max_iters;
  cfg.newton = newton;
  cfg.project_kernel = project_kernel;
  cfg.padding_factor = padding_factor;
  cfg.stability_band = stability_band;
  return cfg;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  return {
      {"mass", fmt(mass)},
      {"band_limit", std::to_string(band_limit)},
      {"r", fmt(r)},
      {"r_min", fmt(r_min)},
      {"r_max", fmt(r_max)},
      {"dr", fmt(dr)},
      {"tol", fmt(tol)},
      {"max_iters", std::to_string(max_iters)},
      {"newton", newton ? "true" : "false"},
      {"project_kernel", project_kernel ? "true" : "false"},
      {"padding_factor", fmt(padding_factor)},
      {"stability_band", std::to_string(stability_band)},
      {"perturbation.family", perturbation.family},
      {"perturbation.l", std::to_string(perturbation.l)},
      {"perturbation.m", std::to_string(perturbation.m)},
      {"perturbation.component", perturbation.component},
      {"perturbation.epsilon", fmt(perturbation.epsilon)},
      {"out_dir", out_dir},
      {"format", format},
      {"threads", std::to_string(threads)},
      {"probe_axis", std::to_string(probe_axis)},
      {"probe_amplitude", fmt(probe_amplitude)},
  };
}

}  // namespace cmcfol::cli
