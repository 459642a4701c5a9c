#pragma once

// Simulation study for c-dependence bounds on the ATE:
//   X ~ U[-eta, eta], Z | X ~ Bern(1/(1 + exp(-X))), Y | X, Z ~ N((2 + X)(Z - 1), 1).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sharpbounds/inference.hpp"

namespace sharpbounds {

struct DGPConfig {
  Index n = 2000;
  double eta = std::log(9.0);
  std::uint64_t seed = 0;
};

IPWSample dgp_sample(const DGPConfig& config);

/// True propensity 1/(1 + exp(-x)).
inline double dgp_propensity(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct TruthResult {
  double psi_lower = 0.0;
  double psi_upper = 0.0;
  bool infinite = false;
  Index mc_draws = 0;
};

/// Identified set for the ATE under c-dependence, averaging the conditional
/// normal closed form over `draws` values of X.
TruthResult true_bounds_c_dependence(double c, Index draws, std::uint64_t seed,
                                     double eta = std::log(9.0));

/// Half-width of the normal-outcome envelope
/// E[sigma |lambda| (1 - w_lower)(sqrt(2 log w_upper) + sqrt(2/pi)
///   + (1 - w_lower)^eps sqrt(1/(e eps)))], summed over both arms.
double bound_envelope_normal(double c, double epsilon, Index draws, std::uint64_t seed,
                             double eta = std::log(9.0));

struct SimulationConfig {
  std::vector<double> c_grid;
  int sims = 500;
  Index n = 2000;
  int draws = 500;  // bootstrap draws; 0 skips the bootstrap
  std::uint64_t seed = 0;
  int threads = 1;
  Index truth_draws = 1000000;
  double eta = std::log(9.0);
  OutcomeSupport support = OutcomeSupport::kUnbounded;
  bool full_refit = false;

  void validate() const;
};

/// Seed of simulation s.
std::uint64_t simulation_seed(std::uint64_t seed, int s);

// One simulation's results at one c.
struct SimulationCell {
  double lower = 0.0;
  double upper = 0.0;
  BootstrapResult bootstrap;  // empty when draws == 0
  bool failed = false;
};

struct SimulationRun {
  SimulationConfig config;
  std::vector<TruthResult> truth;                  // per c
  std::vector<std::vector<SimulationCell>> cells;  // [sim][c]
};

/// Runs every simulation: fit nuisances, plug-in bounds at every c, and the
/// bootstrap with all c values evaluated on each draw.
SimulationRun run_simulations(const SimulationConfig& config);

struct CoverageRow {
  double c = 0.0;
  double true_lower = 0.0;
  double true_upper = 0.0;
  double set_coverage = 0.0;
  double lb_coverage = 0.0;  // one-sided
  double ub_coverage = 0.0;  // one-sided
  double lb_coverage_two_sided = 0.0;
  double ub_coverage_two_sided = 0.0;
  double unbounded_estimates = 0.0;  // share of simulations with an infinite bound
  double unbounded_set_ci = 0.0;     // share with an infinite set CI side
  double infinite_draws = 0.0;       // pooled share of infinite bootstrap draws
  int failed = 0;
};

std::vector<CoverageRow> coverage_table(const SimulationRun& run);

struct Figure1Row {
  double c = 0.0;
  double mean_lb = 0.0;
  double mean_ub = 0.0;
  double median_lb = 0.0;
  double median_ub = 0.0;
  double true_lb = 0.0;
  double true_ub = 0.0;
  double pct_infinite = 0.0;
};

std::vector<Figure1Row> figure1_table(const SimulationRun& run);

/// Point-estimate-only run (no bootstrap) summarized for plotting.
std::vector<Figure1Row> figure1_run(const std::vector<double>& c_grid, int sims, Index n,
                                    std::uint64_t seed, int threads = 1);

/// Coverage experiment: run_simulations followed by coverage_table.
std::vector<CoverageRow> coverage_experiment(const SimulationConfig& config);

std::vector<std::string> coverage_header();
std::vector<double> coverage_values(const CoverageRow& row);
std::vector<std::string> figure1_header();
std::vector<double> figure1_values(const Figure1Row& row);

}  // namespace sharpbounds
