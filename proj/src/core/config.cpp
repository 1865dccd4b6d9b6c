#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specdn/error.hpp"
#include "specdn/estimators.hpp"
#include "specdn/experiment.hpp"

namespace specdn::experiment {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& message) {
  fail(ErrorCode::config, field + ": " + message);
}

void only_keys(const json& node, const std::string& where, std::initializer_list<const char*> keys) {
  if (!node.is_object()) bad(where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : node.items())
    if (!allowed.count(item.key())) bad(where.empty() ? item.key() : where + "." + item.key(), "unknown field");
}

std::string join(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

double number(const json& node, const std::string& where, const char* key, double fallback) {
  if (!node.contains(key)) return fallback;
  const json& v = node.at(key);
  if (!v.is_number()) bad(join(where, key), "expected a number");
  return v.get<double>();
}

int integer(const json& node, const std::string& where, const char* key, int fallback) {
  if (!node.contains(key)) return fallback;
  const json& v = node.at(key);
  if (!v.is_number_integer()) bad(join(where, key), "expected an integer");
  return v.get<int>();
}

bool boolean(const json& node, const std::string& where, const char* key, bool fallback) {
  if (!node.contains(key)) return fallback;
  const json& v = node.at(key);
  if (!v.is_boolean()) bad(join(where, key), "expected true or false");
  return v.get<bool>();
}

std::string text(const json& node, const std::string& where, const char* key, std::string fallback) {
  if (!node.contains(key)) return fallback;
  const json& v = node.at(key);
  if (!v.is_string()) bad(join(where, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& field) {
  if (!v.is_array()) bad(field, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad(field, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::array<double, 2> range(const json& node, const std::string& where, const char* key,
                            std::array<double, 2> fallback) {
  if (!node.contains(key)) return fallback;
  const auto v = numbers(node.at(key), join(where, key));
  if (v.size() != 2) bad(join(where, key), "expected [low, high]");
  return {v[0], v[1]};
}

void parse_sim(const json& node, SimConfig& sim) {
  only_keys(node, "sim", {"p", "n", "gamma", "spectrum", "normalize_trace", "drift", "noise"});
  sim.p = integer(node, "sim", "p", sim.p);
  sim.n = integer(node, "sim", "n", sim.n);
  if (node.contains("gamma")) {
    const json& g = node.at("gamma");
    only_keys(g, "sim.gamma", {"kind", "rho", "sigma_ou", "bound", "leverage", "level"});
    const std::string kind = text(g, "sim.gamma", "kind", "ou");
    if (kind == "ou") sim.gamma_kind = GammaKind::ou;
    else if (kind == "constant") sim.gamma_kind = GammaKind::constant;
    else bad("sim.gamma.kind", "expected \"ou\" or \"constant\"");
    sim.gamma.rho = number(g, "sim.gamma", "rho", sim.gamma.rho);
    sim.gamma.sigma_ou = number(g, "sim.gamma", "sigma_ou", sim.gamma.sigma_ou);
    sim.gamma.bound = number(g, "sim.gamma", "bound", sim.gamma.bound);
    sim.leverage = boolean(g, "sim.gamma", "leverage", sim.leverage);
    sim.gamma_level = number(g, "sim.gamma", "level", sim.gamma_level);
  }
  if (node.contains("spectrum")) {
    const json& s = node.at("spectrum");
    if (s.is_string()) {
      const std::string name = s.get<std::string>();
      if (name == "beta13") sim.spectrum = simulate::Beta13{};
      else if (name == "identity") sim.spectrum = std::vector<double>(static_cast<std::size_t>(std::max(sim.p, 0)), 1.0);
      else bad("sim.spectrum", "expected \"beta13\", \"identity\" or a list of eigenvalues");
    } else {
      sim.spectrum = numbers(s, "sim.spectrum");
    }
  }
  sim.normalize_trace = boolean(node, "sim", "normalize_trace", sim.normalize_trace);
  if (node.contains("drift")) {
    const json& d = node.at("drift");
    if (d.is_number()) sim.drift.assign(static_cast<std::size_t>(std::max(sim.p, 0)), d.get<double>());
    else sim.drift = numbers(d, "sim.drift");
  }
  if (node.contains("noise")) {
    const json& ns = node.at("noise");
    only_keys(ns, "sim.noise", {"model", "variance", "phi"});
    const std::string model = text(ns, "sim.noise", "model", "iid");
    if (model == "iid") sim.noise_model = simulate::NoiseModel::iid;
    else if (model == "ar1") sim.noise_model = simulate::NoiseModel::ar1;
    else bad("sim.noise.model", "expected \"iid\" or \"ar1\"");
    sim.noise_variance = number(ns, "sim.noise", "variance", sim.noise_variance);
    sim.noise_phi = number(ns, "sim.noise", "phi", sim.noise_phi);
  }
}

void parse_estimators(const json& node, EstimatorSettings& est) {
  only_keys(node, "estimators",
            {"theta_pav", "theta_bm", "alpha", "drop_degenerate", "noise_variance"});
  est.theta_pav = number(node, "estimators", "theta_pav", est.theta_pav);
  est.theta_bm = number(node, "estimators", "theta_bm", est.theta_bm);
  est.alpha = number(node, "estimators", "alpha", est.alpha);
  est.drop_degenerate = boolean(node, "estimators", "drop_degenerate", est.drop_degenerate);
  const std::string mode = text(node, "estimators", "noise_variance", "estimated");
  if (mode == "estimated") est.noise_variance = NoiseVarianceMode::estimated;
  else if (mode == "pooled") est.noise_variance = NoiseVarianceMode::pooled;
  else if (mode == "true") est.noise_variance = NoiseVarianceMode::truth;
  else bad("estimators.noise_variance", "expected \"estimated\", \"pooled\" or \"true\"");
}

void parse_recovery(const json& node, RecoverySettings& rec) {
  only_keys(node, "recovery",
            {"K", "J_re", "J_im", "re_range", "im_range", "route", "gamma_mode", "spectral_span",
             "min_fraction"});
  rec.k = integer(node, "recovery", "K", rec.k);
  rec.j_re = integer(node, "recovery", "J_re", rec.j_re);
  rec.j_im = integer(node, "recovery", "J_im", rec.j_im);
  rec.re_range = range(node, "recovery", "re_range", rec.re_range);
  rec.im_range = range(node, "recovery", "im_range", rec.im_range);
  if (node.contains("route")) {
    try {
      rec.route = parse_route(text(node, "recovery", "route", ""));
    } catch (const Error&) {
      bad("recovery.route", "expected \"two_step\", \"direct\" or \"both\"");
    }
  }
  const std::string gm = text(node, "recovery", "gamma_mode", "true");
  if (gm == "true") rec.gamma_mode = GammaMode::truth;
  else if (gm == "estimated") rec.gamma_mode = GammaMode::estimated;
  else bad("recovery.gamma_mode", "expected \"true\" or \"estimated\"");
  rec.spectral_span = number(node, "recovery", "spectral_span", rec.spectral_span);
  rec.min_fraction = number(node, "recovery", "min_fraction", rec.min_fraction);
}

}  // namespace

std::string route_name(Route route) {
  switch (route) {
    case Route::two_step: return "two_step";
    case Route::direct: return "direct";
    case Route::both: return "both";
  }
  return "both";
}

Route parse_route(std::string_view name) {
  if (name == "two_step") return Route::two_step;
  if (name == "direct") return Route::direct;
  if (name == "both") return Route::both;
  fail(ErrorCode::config, "route: expected \"two_step\", \"direct\" or \"both\"");
}

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, std::string("config: invalid JSON: ") + e.what());
  }
  only_keys(root, "", {"sim", "estimators", "recovery", "replication", "output_dir", "jobs"});
  ExperimentConfig config;
  if (root.contains("sim")) parse_sim(root.at("sim"), config.sim);
  if (root.contains("estimators")) parse_estimators(root.at("estimators"), config.estimators);
  if (root.contains("recovery")) parse_recovery(root.at("recovery"), config.recovery);
  if (root.contains("replication")) {
    const json& r = root.at("replication");
    only_keys(r, "replication", {"seeds"});
    if (r.contains("seeds")) {
      const json& s = r.at("seeds");
      if (!s.is_array()) bad("replication.seeds", "expected a list of non-negative integers");
      config.seeds.clear();
      for (const auto& e : s) {
        if (!e.is_number_unsigned()) bad("replication.seeds", "expected a list of non-negative integers");
        config.seeds.push_back(e.get<std::uint64_t>());
      }
    }
  }
  config.output_dir = text(root, "", "output_dir", config.output_dir.string());
  config.jobs = integer(root, "", "jobs", config.jobs);
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void ExperimentConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (sim.p < 1) bad("sim.p", "must be at least 1");
  if (sim.n < 4) bad("sim.n", "must be at least 4");
  if (!(sim.gamma.rho >= 0.0)) bad("sim.gamma.rho", "must be non-negative");
  if (!(sim.gamma.sigma_ou >= 0.0)) bad("sim.gamma.sigma_ou", "must be non-negative");
  if (!positive(sim.gamma.bound)) bad("sim.gamma.bound", "must be positive");
  if (sim.gamma_kind == GammaKind::constant &&
      !(positive(sim.gamma_level) && sim.gamma_level <= sim.gamma.bound))
    bad("sim.gamma.level", "must be positive and within the bound");
  if (const auto* v = std::get_if<std::vector<double>>(&sim.spectrum)) {
    if (static_cast<int>(v->size()) != sim.p) bad("sim.spectrum", "needs exactly p eigenvalues");
    for (double e : *v)
      if (!(std::isfinite(e) && e >= 0.0)) bad("sim.spectrum", "eigenvalues must be finite and >= 0");
  }
  if (!sim.drift.empty() && static_cast<int>(sim.drift.size()) != sim.p)
    bad("sim.drift", "needs one value per asset");
  for (double d : sim.drift)
    if (!std::isfinite(d)) bad("sim.drift", "must be finite");
  if (!(sim.noise_variance >= 0.0 && std::isfinite(sim.noise_variance)))
    bad("sim.noise.variance", "must be non-negative");
  if (!(std::abs(sim.noise_phi) < 1.0)) bad("sim.noise.phi", "must lie in (-1, 1)");
  if (sim.noise_model == simulate::NoiseModel::iid && sim.noise_phi != 0.0)
    bad("sim.noise.phi", "only applies to the ar1 model");

  const bool two_step = recovery.route != Route::direct;
  const bool direct = recovery.route != Route::two_step;
  if (!positive(estimators.theta_pav)) bad("estimators.theta_pav", "must be positive");
  if (!positive(estimators.theta_bm)) bad("estimators.theta_bm", "must be positive");
  if (direct && !(estimators.alpha > 0.5 && estimators.alpha < 1.0))
    bad("estimators.alpha", "must lie in (0.5, 1) for the direct route");
  auto check_window = [&](const char* field, estimators::EstimatorConfig ec) {
    if (ec.window() < 2 || ec.blocks() < 2) bad(field, "gives a pre-averaging window below 2 or fewer than 2 blocks");
  };
  if (two_step)
    check_window("estimators.theta_pav", {sim.n, sim.p, estimators.theta_pav,
                                          estimators::WindowRule::sqrt_rule, estimators.alpha});
  if (direct)
    check_window("estimators.theta_bm", {sim.n, sim.p, estimators.theta_bm,
                                         estimators::WindowRule::power_rule, estimators.alpha});

  if (recovery.k < 2) bad("recovery.K", "must be at least 2");
  if (recovery.j_re < 1) bad("recovery.J_re", "must be at least 1");
  if (recovery.j_im < 1) bad("recovery.J_im", "must be at least 1");
  if (!(recovery.re_range[0] <= recovery.re_range[1])) bad("recovery.re_range", "must be ascending");
  if (!(recovery.im_range[0] >= 1.0 && recovery.im_range[0] <= recovery.im_range[1]))
    bad("recovery.im_range", "must be ascending and start at or above 1");
  if (!positive(recovery.spectral_span)) bad("recovery.spectral_span", "must be positive");
  if (!(recovery.min_fraction > 0.0 && recovery.min_fraction <= 1.0))
    bad("recovery.min_fraction", "must lie in (0, 1]");
  if (seeds.empty()) bad("replication.seeds", "needs at least one seed");
  if (jobs < 0) bad("jobs", "must be non-negative");
}

}  // namespace specdn::experiment
