// sharpbounds command-line driver.
//
//   sharpbounds analyze-ipw data.csv --config ipw.json --out results
//   sharpbounds coverage --paper-scale --threads 8
//   sharpbounds oracle-check --seed 7
//
// Every command writes <out>/manifest.json with the resolved configuration.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sharpbounds/applications.hpp"
#include "sharpbounds/inference.hpp"
#include "sharpbounds/io.hpp"
#include "sharpbounds/oracle.hpp"
#include "sharpbounds/simlab.hpp"

namespace sb = sharpbounds;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;
constexpr double kOracleTolerance = 1e-9;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int threads = 1;
  bool paper_scale = false;
};

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json interval(const sb::Interval& i) { return json::array({number(i.first), number(i.second)}); }

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw sb::Error(sb::ErrorCode::kConfig, "cannot open config " + path);
  try {
    json cfg = json::parse(in);
    if (!cfg.is_object()) throw sb::Error(sb::ErrorCode::kConfig, "config must be a JSON object");
    return cfg;
  } catch (const json::exception& e) {
    throw sb::Error(sb::ErrorCode::kConfig, std::string("invalid config: ") + e.what());
  }
}

template <typename T>
T get(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw sb::Error(sb::ErrorCode::kConfig, "config key '" + key + "' has the wrong type");
  }
}

// Reads a band limit that may be written as a number or as "inf".
double get_limit(const json& cfg, const std::string& key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (v.is_string() && (v == "inf" || v == "+inf")) return sb::kInf;
  if (v.is_number()) return v.get<double>();
  throw sb::Error(sb::ErrorCode::kConfig, "config key '" + key + "' must be a number or \"inf\"");
}

std::vector<double> c_grid(const json& cfg, std::vector<double> fallback) {
  if (!cfg.contains("c_grid")) return fallback;
  const json& g = cfg.at("c_grid");
  std::vector<double> grid;
  if (g.is_array()) {
    for (const json& v : g) {
      if (!v.is_number()) throw sb::Error(sb::ErrorCode::kConfig, "c_grid entries must be numbers");
      grid.push_back(v.get<double>());
    }
  } else if (g.is_object()) {
    const double from = get(g, "from", 0.0);
    const double to = get(g, "to", 0.1);
    const double step = get(g, "step", 0.01);
    if (!(step > 0.0) || to < from) throw sb::Error(sb::ErrorCode::kConfig, "invalid c_grid range");
    const auto count = static_cast<int>(std::floor((to - from) / step + 1e-9));
    for (int k = 0; k <= count; ++k) grid.push_back(from + k * step);
  } else {
    throw sb::Error(sb::ErrorCode::kConfig, "c_grid must be an array or {from, to, step}");
  }
  if (grid.empty()) throw sb::Error(sb::ErrorCode::kConfig, "c_grid is empty");
  for (double c : grid) {
    if (!(c >= 0.0 && c < 0.5)) throw sb::Error(sb::ErrorCode::kConfig, "c values must lie in [0, 0.5)");
  }
  return grid;
}

std::vector<double> default_grid(double to) {
  std::vector<double> grid;
  for (int k = 0; k <= static_cast<int>(std::lround(to * 100)); ++k) grid.push_back(k / 100.0);
  return grid;
}

sb::OutcomeSupport support_of(const json& cfg) {
  const std::string s = get<std::string>(cfg, "support", "unbounded");
  if (s == "unbounded") return sb::OutcomeSupport::kUnbounded;
  if (s == "bounded") return sb::OutcomeSupport::kBounded;
  throw sb::Error(sb::ErrorCode::kConfig, "support must be \"bounded\" or \"unbounded\"");
}

std::filesystem::path prepare_out(const Globals& g) {
  std::filesystem::path out(g.out);
  std::filesystem::create_directories(out);
  return out;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw sb::Error(sb::ErrorCode::kConfig, "cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void write_manifest(const std::filesystem::path& out, const std::string& command, const Globals& g,
                    std::uint64_t seed, const json& resolved, const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["seed"] = seed;
  m["threads"] = g.threads;
  m["paper_scale"] = g.paper_scale;
  m["config_file"] = g.config_path;
  m["config"] = resolved;
  m["outputs"] = outputs;
  write_json(out / "manifest.json", m);
}

std::uint64_t resolve_seed(const Globals& g, const json& cfg) {
  if (g.seed) return *g.seed;
  return get<std::uint64_t>(cfg, "seed", kDefaultSeed);
}

std::string data_path(const std::string& positional, const json& cfg) {
  const std::string path = positional.empty() ? get<std::string>(cfg, "data", "") : positional;
  if (path.empty()) throw sb::Error(sb::ErrorCode::kConfig, "no input CSV given");
  return path;
}

sb::MatrixXd covariates(const sb::CsvTable& table) {
  const std::vector<std::string> names = table.columns_with_prefix("x");
  if (names.empty()) throw sb::Error(sb::ErrorCode::kColumn, "missing column 'x' (or x1, x2, ...)");
  sb::MatrixXd x(table.rows(), static_cast<sb::Index>(names.size()));
  for (size_t j = 0; j < names.size(); ++j) x.col(static_cast<sb::Index>(j)) = table.column(names[j]);
  return x;
}

json bound_json(const sb::BoundResult& b) {
  return {{"value", number(b.value)},
          {"finite", b.finite},
          {"tau_range", interval(b.tau_range)},
          {"cap_fractions", interval(b.cap_fractions)}};
}

json report_json(const std::string& estimand, const sb::BoundPair& point,
                 const sb::BootstrapResult& boot, json diagnostics) {
  diagnostics["lower"] = bound_json(point.lower);
  diagnostics["upper"] = bound_json(point.upper);
  diagnostics["n_failed_draws"] = boot.n_failed;
  return {{"estimand", estimand},
          {"lower", number(point.lower.value)},
          {"upper", number(point.upper.value)},
          {"set_ci", interval(boot.set_ci)},
          {"lb_ci", interval(boot.lb_ci)},
          {"ub_ci", interval(boot.ub_ci)},
          {"lb_one_sided", number(boot.lb_one_sided)},
          {"ub_one_sided", number(boot.ub_one_sided)},
          {"diagnostics", diagnostics},
          {"n_infinite_draws", boot.n_infinite}};
}

sb::BootstrapOptions bootstrap_options(const Globals& g, const json& cfg, std::uint64_t seed) {
  sb::BootstrapOptions o;
  o.draws = g.paper_scale ? 1000 : get(cfg, "draws", 500);
  o.seed = seed;
  o.threads = g.threads;
  return o;
}

void emit_report(const std::filesystem::path& out, const json& report) {
  write_json(out / "report.json", report);
  std::cout << report.dump(2) << '\n';
}

int cmd_analyze_ipw(const Globals& g, const std::string& positional) {
  const json cfg = load_config(g.config_path);
  const std::uint64_t seed = resolve_seed(g, cfg);
  const std::string path = data_path(positional, cfg);
  const sb::CsvTable table = sb::read_csv(path);
  sb::IPWSample sample;
  sample.x = covariates(table);
  sample.z = table.column("z");
  sample.y = table.column("y");
  sample.validate();

  const std::string estimand_name = get<std::string>(cfg, "estimand", "ate");
  sb::IPWEstimand estimand;
  if (estimand_name == "ate") estimand = sb::IPWEstimand::kAte;
  else if (estimand_name == "treated-mean") estimand = sb::IPWEstimand::kTreatedMean;
  else if (estimand_name == "control-mean") estimand = sb::IPWEstimand::kControlMean;
  else throw sb::Error(sb::ErrorCode::kConfig, "estimand must be ate, treated-mean or control-mean");

  sb::IPWConfig config;
  config.c = get(cfg, "c", 0.0);
  config.support = support_of(cfg);
  for (const char* arm : {"treated", "control"}) {
    if (!cfg.contains(arm)) continue;
    const json& a = cfg.at(arm);
    sb::OddsRatio odds{get_limit(a, "l", 1.0), get_limit(a, "u", 1.0)};
    (std::string(arm) == "treated" ? config.treated : config.control) = odds;
  }

  const sb::IPWNuisance nuisance = sb::fit_ipw_nuisance(sample, estimand);
  const sb::VectorXd e_hat = nuisance.propensity.predict(sample.x);
  const sb::GridPredictions grid = nuisance.grid.predict_sorted(
      sb::ipw_quantile_features(sample.x, sample.z, e_hat), sb::ipw_cells(sample.z));
  const sb::BoundPair point = sb::ipw_bounds(sample, e_hat, grid, config, estimand);

  sb::IPWBootstrapSpec spec;
  spec.sample = &sample;
  spec.nuisance = nuisance;
  spec.configs = {config};
  spec.full_refit = get(cfg, "full_refit", false);
  const sb::BootstrapOptions options = bootstrap_options(g, cfg, seed);
  const sb::BootstrapResult boot =
      sb::summarize_draws(sb::bootstrap_draws(sample.size(), sb::ipw_bootstrap_statistic(spec), options), 0, 1);

  json diag = {{"n", sample.size()},
               {"propensity_converged", nuisance.propensity.converged},
               {"propensity_iterations", nuisance.propensity.iterations},
               {"propensity_range", interval({e_hat.minCoeff(), e_hat.maxCoeff()})}};
  const json report = report_json(estimand_name, point, boot, diag);

  json resolved = cfg;
  resolved["data"] = path;
  resolved["estimand"] = estimand_name;
  resolved["c"] = config.c;
  resolved["draws"] = options.draws;
  resolved["support"] = config.support == sb::OutcomeSupport::kBounded ? "bounded" : "unbounded";
  resolved["full_refit"] = spec.full_refit;
  const auto out = prepare_out(g);
  emit_report(out, report);
  write_manifest(out, "analyze-ipw", g, seed, resolved, {"report.json"});
  return 0;
}

int cmd_analyze_rd(const Globals& g, const std::string& positional) {
  const json cfg = load_config(g.config_path);
  const std::uint64_t seed = resolve_seed(g, cfg);
  const std::string path = data_path(positional, cfg);
  const sb::CsvTable table = sb::read_csv(path);
  sb::RDSample sample{table.column("x"), table.column("y")};

  sb::RDConfig config;
  config.cutoff = get(cfg, "cutoff", 0.0);
  config.bandwidth = get(cfg, "bandwidth", 1.0);
  config.lambda1_minus = get_limit(cfg, "lambda1_minus", 1.0);
  config.lambda1_plus = get_limit(cfg, "lambda1_plus", 1.0);
  config.lambda0_minus = get_limit(cfg, "lambda0_minus", 1.0);
  config.lambda0_plus = get_limit(cfg, "lambda0_plus", 1.0);
  if (cfg.contains("tau")) config.tau_input = get(cfg, "tau", 0.0);
  config.validate();

  const std::string estimand_name = get<std::string>(cfg, "estimand", "cate");
  sb::RDEstimand estimand;
  if (estimand_name == "clate") estimand = sb::RDEstimand::kClate;
  else if (estimand_name == "catt") estimand = sb::RDEstimand::kCatt;
  else if (estimand_name == "cate") estimand = sb::RDEstimand::kCate;
  else throw sb::Error(sb::ErrorCode::kConfig, "estimand must be clate, catt or cate");

  const sb::RDEstimates est = sb::rd_estimates(sample, config);
  const sb::BoundPair point = sb::rd_bounds(sample, config, estimand);
  const sb::BootstrapOptions options = bootstrap_options(g, cfg, seed);
  const sb::BootstrapResult boot = sb::percentile_bootstrap(
      sample.size(),
      [&](std::span<const sb::Index> rows) {
        const sb::BoundPair b = sb::rd_bounds(sample.subset(rows), config, estimand);
        return sb::Interval{b.lower.value, b.upper.value};
      },
      options);

  json diag = {{"tau", est.tau},           {"tau0", est.tau0},
               {"mean_above", est.mean_above}, {"mean_below", est.mean_below},
               {"n_above", est.n_above},   {"n_below", est.n_below}};
  const json report = report_json(estimand_name, point, boot, diag);

  json resolved = cfg;
  resolved["data"] = path;
  resolved["estimand"] = estimand_name;
  resolved["cutoff"] = config.cutoff;
  resolved["bandwidth"] = config.bandwidth;
  resolved["lambda1_minus"] = number(config.lambda1_minus);
  resolved["lambda1_plus"] = number(config.lambda1_plus);
  resolved["lambda0_minus"] = number(config.lambda0_minus);
  resolved["lambda0_plus"] = number(config.lambda0_plus);
  resolved["draws"] = options.draws;
  const auto out = prepare_out(g);
  emit_report(out, report);
  write_manifest(out, "analyze-rd", g, seed, resolved, {"report.json"});
  return 0;
}

int cmd_analyze_ols(const Globals& g, const std::string& positional) {
  const json cfg = load_config(g.config_path);
  const std::uint64_t seed = resolve_seed(g, cfg);
  const std::string path = data_path(positional, cfg);
  const sb::CsvTable table = sb::read_csv(path);
  const sb::VectorXd y = table.column("y");
  const sb::MatrixXd features = covariates(table);
  sb::MatrixXd x(features.rows(), features.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(features.cols()) = features;

  sb::OLSConfig config;
  config.delta = sb::VectorXd::Zero(x.cols());
  if (cfg.contains("delta")) {
    const auto d = get<std::vector<double>>(cfg, "delta", {});
    if (static_cast<sb::Index>(d.size()) != x.cols()) {
      throw sb::Error(sb::ErrorCode::kConfig, "delta needs one entry for the intercept and one per x column");
    }
    config.delta = Eigen::Map<const sb::VectorXd>(d.data(), x.cols());
  } else {
    config.delta(1) = 1.0;
  }
  config.w_lower = get_limit(cfg, "w_lower", 1.0);
  config.w_upper = get_limit(cfg, "w_upper", 1.0);
  std::vector<double> group_values;
  const std::string group_column = get<std::string>(cfg, "group_column", "");
  if (!group_column.empty()) {
    const sb::VectorXd gv = table.column(group_column);
    group_values.assign(gv.data(), gv.data() + gv.size());
  }
  // Group labels are renumbered 0..G-1 on every (re)sample.
  auto groups_for = [&](std::span<const sb::Index> rows) {
    std::vector<sb::Index> out;
    if (group_values.empty()) return out;
    std::vector<double> labels;
    for (sb::Index r : rows) labels.push_back(group_values[static_cast<size_t>(r)]);
    std::vector<double> unique = labels;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (double v : labels) {
      out.push_back(std::lower_bound(unique.begin(), unique.end(), v) - unique.begin());
    }
    return out;
  };

  std::vector<sb::Index> all(static_cast<size_t>(y.size()));
  for (sb::Index i = 0; i < y.size(); ++i) all[static_cast<size_t>(i)] = i;
  config.group = groups_for(all);
  const sb::BoundPair point = sb::ols_bounds(y, x, config);

  const sb::BootstrapOptions options = bootstrap_options(g, cfg, seed);
  const sb::BootstrapResult boot = sb::percentile_bootstrap(
      y.size(),
      [&](std::span<const sb::Index> rows) {
        sb::VectorXd yb(static_cast<sb::Index>(rows.size()));
        sb::MatrixXd xb(static_cast<sb::Index>(rows.size()), x.cols());
        for (size_t k = 0; k < rows.size(); ++k) {
          yb(static_cast<sb::Index>(k)) = y(rows[k]);
          xb.row(static_cast<sb::Index>(k)) = x.row(rows[k]);
        }
        sb::OLSConfig c = config;
        c.group = groups_for(rows);
        const sb::BoundPair b = sb::ols_bounds(yb, xb, c);
        return sb::Interval{b.lower.value, b.upper.value};
      },
      options);

  json delta = json::array();
  for (sb::Index j = 0; j < config.delta.size(); ++j) delta.push_back(config.delta(j));
  json diag = {{"n", y.size()}, {"delta", delta}};
  const json report = report_json("ols-contrast", point, boot, diag);

  json resolved = cfg;
  resolved["data"] = path;
  resolved["delta"] = delta;
  resolved["w_lower"] = config.w_lower;
  resolved["w_upper"] = number(config.w_upper);
  resolved["draws"] = options.draws;
  const auto out = prepare_out(g);
  emit_report(out, report);
  write_manifest(out, "analyze-ols", g, seed, resolved, {"report.json"});
  return 0;
}

sb::SimulationConfig simulation_config(const Globals& g, const json& cfg, std::uint64_t seed,
                                       int default_draws) {
  sb::SimulationConfig c;
  c.c_grid = c_grid(cfg, default_grid(0.10));
  c.sims = g.paper_scale ? 1000 : get(cfg, "sims", 500);
  c.n = get<sb::Index>(cfg, "n", 2000);
  c.draws = g.paper_scale && default_draws > 0 ? 1000 : get(cfg, "draws", default_draws);
  c.truth_draws = get<sb::Index>(cfg, "truth_draws", 1000000);
  c.eta = get(cfg, "eta", std::log(9.0));
  c.support = support_of(cfg);
  c.full_refit = get(cfg, "full_refit", false);
  c.seed = seed;
  c.threads = g.threads;
  c.validate();
  return c;
}

json simulation_json(const sb::SimulationConfig& c) {
  json grid = json::array();
  for (double v : c.c_grid) grid.push_back(v);
  return {{"c_grid", grid},
          {"sims", c.sims},
          {"n", c.n},
          {"draws", c.draws},
          {"truth_draws", c.truth_draws},
          {"eta", c.eta},
          {"support", c.support == sb::OutcomeSupport::kBounded ? "bounded" : "unbounded"},
          {"full_refit", c.full_refit}};
}

void write_coverage(const std::filesystem::path& path, const std::vector<sb::CoverageRow>& rows) {
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) values.push_back(sb::coverage_values(r));
  sb::write_csv(path.string(), sb::coverage_header(), values);
}

void write_figure1(const std::filesystem::path& path, const std::vector<sb::Figure1Row>& rows) {
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) values.push_back(sb::figure1_values(r));
  sb::write_csv(path.string(), sb::figure1_header(), values);
}

int cmd_simulate(const Globals& g, const std::string& command) {
  const json cfg = load_config(g.config_path);
  const std::uint64_t seed = resolve_seed(g, cfg);
  const int default_draws = command == "figure1" ? 0 : 500;
  const sb::SimulationConfig config = simulation_config(g, cfg, seed, default_draws);
  const sb::SimulationRun run = sb::run_simulations(config);
  const auto out = prepare_out(g);
  std::vector<std::string> outputs;

  if (command != "figure1" && config.draws > 0) {
    write_coverage(out / "coverage.csv", sb::coverage_table(run));
    outputs.push_back("coverage.csv");
  }
  if (command != "coverage") {
    write_figure1(out / "figure1.csv", sb::figure1_table(run));
    outputs.push_back("figure1.csv");
  }
  if (command == "simulate") {
    std::vector<std::vector<double>> rows;
    for (size_t s = 0; s < run.cells.size(); ++s) {
      for (size_t k = 0; k < config.c_grid.size(); ++k) {
        const sb::SimulationCell& cell = run.cells[s][k];
        const sb::BootstrapResult& b = cell.bootstrap;
        rows.push_back({static_cast<double>(s), config.c_grid[k], cell.lower, cell.upper,
                        b.set_ci.first, b.set_ci.second, b.lb_one_sided, b.ub_one_sided,
                        static_cast<double>(b.n_infinite), cell.failed ? 1.0 : 0.0});
      }
    }
    sb::write_csv((out / "simulations.csv").string(),
                  {"sim", "c", "lower", "upper", "set_ci_lower", "set_ci_upper", "lb_one_sided",
                   "ub_one_sided", "n_infinite_draws", "failed"},
                  rows);
    outputs.push_back("simulations.csv");
  }
  write_manifest(out, command, g, seed, simulation_json(config), outputs);
  for (const std::string& o : outputs) std::cout << (out / o).string() << '\n';
  return 0;
}

int cmd_truth(const Globals& g) {
  const json cfg = load_config(g.config_path);
  const std::uint64_t seed = resolve_seed(g, cfg);
  const std::vector<double> grid = c_grid(cfg, default_grid(0.11));
  const auto draws = get<sb::Index>(cfg, "truth_draws", 1000000);
  const double eta = get(cfg, "eta", std::log(9.0));
  std::vector<std::vector<double>> rows;
  for (double c : grid) {
    const sb::TruthResult t = sb::true_bounds_c_dependence(c, draws, seed, eta);
    rows.push_back({c, t.psi_lower, t.psi_upper, t.infinite ? 1.0 : 0.0});
    std::cout << "c=" << sb::format_number(c) << " lower=" << sb::format_number(t.psi_lower)
              << " upper=" << sb::format_number(t.psi_upper) << (t.infinite ? " (unbounded)" : "")
              << '\n';
  }
  const auto out = prepare_out(g);
  sb::write_csv((out / "truth.csv").string(), {"c", "true_lb", "true_ub", "infinite"}, rows);
  json grid_json = json::array();
  for (double c : grid) grid_json.push_back(c);
  write_manifest(out, "truth", g, seed, {{"c_grid", grid_json}, {"truth_draws", draws}, {"eta", eta}},
                 {"truth.csv"});
  return 0;
}

int cmd_oracle_check(const Globals& g, int instances, double tau_perturbation) {
  const json cfg = load_config(g.config_path);
  const std::uint64_t seed = resolve_seed(g, cfg);
  instances = get(cfg, "instances", instances);
  const int max_groups = get(cfg, "max_groups", 20);
  const int max_support = get(cfg, "max_support", 10);
  const sb::oracle::CheckReport r =
      sb::oracle::oracle_check(instances, seed, tau_perturbation, max_groups, max_support);
  const bool pass = r.max_discrepancy <= kOracleTolerance;
  const json report = {{"instances", r.instances},
                       {"max_discrepancy", r.max_discrepancy},
                       {"worst_seed", r.worst_seed},
                       {"tied_instances", r.tied_instances},
                       {"tolerance", kOracleTolerance},
                       {"pass", pass}};
  std::cout << report.dump(2) << '\n';
  const auto out = prepare_out(g);
  write_json(out / "oracle_check.json", report);
  json resolved = {{"instances", instances}, {"max_groups", max_groups}, {"max_support", max_support}};
  if (tau_perturbation != 0.0) resolved["tau_perturbation"] = tau_perturbation;
  write_manifest(out, "oracle-check", g, seed, resolved, {"oracle_check.json"});
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp sensitivity bounds for linear estimands"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file")->envname("SHARPBOUNDS_CONFIG");
  app.add_option("--seed", g.seed, "Random seed")->envname("SHARPBOUNDS_SEED");
  app.add_option("--out", g.out, "Output directory")->envname("SHARPBOUNDS_OUT");
  app.add_option("--threads", g.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->envname("SHARPBOUNDS_THREADS");
  app.add_flag("--paper-scale", g.paper_scale, "1000 simulations and 1000 bootstrap draws")
      ->envname("SHARPBOUNDS_PAPER_SCALE");

  std::string data;
  auto* ipw = app.add_subcommand("analyze-ipw", "IPW / c-dependence bounds from a CSV (x..., z, y)");
  auto* rd = app.add_subcommand("analyze-rd", "Regression discontinuity bounds from a CSV (x, y)");
  auto* ols = app.add_subcommand("analyze-ols", "OLS contrast bounds from a CSV (y, x1...xk)");
  for (auto* sub : {ipw, rd, ols}) sub->add_option("data", data, "Input CSV");
  auto* simulate = app.add_subcommand("simulate", "Simulation study: coverage, figure data, per-run estimates");
  auto* coverage = app.add_subcommand("coverage", "Coverage table over the c grid");
  auto* figure1 = app.add_subcommand("figure1", "Mean/median bound estimates against the truth");
  auto* truth = app.add_subcommand("truth", "True identified sets for the simulation design");
  auto* oracle = app.add_subcommand("oracle-check", "Closed form vs exact LP on random instances");
  int instances = 1000;
  double tau_perturbation = 0.0;
  oracle->add_option("--instances", instances, "Number of random instances");
  // Mutation check: shifts the balancing level so the comparison must fail.
  oracle->add_option("--tau-perturbation", tau_perturbation)->group("");

  CLI11_PARSE(app, argc, argv);
  try {
    if (ipw->parsed()) return cmd_analyze_ipw(g, data);
    if (rd->parsed()) return cmd_analyze_rd(g, data);
    if (ols->parsed()) return cmd_analyze_ols(g, data);
    if (simulate->parsed()) return cmd_simulate(g, "simulate");
    if (coverage->parsed()) return cmd_simulate(g, "coverage");
    if (figure1->parsed()) return cmd_simulate(g, "figure1");
    if (truth->parsed()) return cmd_truth(g);
    if (oracle->parsed()) return cmd_oracle_check(g, instances, tau_perturbation);
  } catch (const sb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
