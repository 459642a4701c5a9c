#pragma once

// Exact LP solutions of sup/inf E[W lambda Y] s.t. W in band, E[W|R] = 1 on
// finite-support distributions, by enumerating vertices of each cell's
// feasible set. Used as ground truth for the closed-form bounds; shares no
// code with core_bounds beyond the Direction enum.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "sharpbounds/core_bounds.hpp"

namespace sharpbounds::oracle {

/// One conditioning cell: support points of lambda*y with conditional
/// probabilities and a band per support point.
struct DiscreteCell {
  double probability = 0.0;
  VectorXd values;
  VectorXd probs;
  VectorXd w_lower;
  VectorXd w_upper;
};

struct DiscreteDist {
  std::vector<DiscreteCell> cells;

  void validate() const;
  Index num_points() const;
};

enum class VertexStrategy {
  // Sort by value; for each split index put the lower block at one extreme,
  // the upper block at the other, and solve the single interior weight.
  kSortedSplits,
  // Every vertex of the box-plus-one-equality polytope: any interior index
  // with every other coordinate at either bound. Exponential; small cells only.
  kExhaustive,
};

/// Optimal cell value sum_k p_k w_k v_k. Throws kInfeasible when no weight
/// vector in the box has mean one.
double lp_cell_optimum(const DiscreteCell& cell, Direction direction,
                       VertexStrategy strategy = VertexStrategy::kSortedSplits);

/// Number of vertex candidates the strategy examines for an n-point cell.
Index vertex_candidates(Index n, VertexStrategy strategy);

double lp_sharp_bound(const DiscreteDist& dist, Direction direction,
                      VertexStrategy strategy = VertexStrategy::kSortedSplits);

/// Random instance with bands 0 <= w_lower <= 1 <= w_upper < inf constant per
/// cell. A share of instances draws values from a coarse lattice so that
/// tied lambda*y values appear. Deterministic in seed.
DiscreteDist random_instance(std::uint64_t seed, int max_groups, int max_support);

/// The instance as a core_bounds problem: one observation per support point,
/// mass = cell probability * conditional probability, group = cell index,
/// lambda = value, outcome = 1.
BoundProblem to_bound_problem(const DiscreteDist& dist, Direction direction);

bool has_tied_values(const DiscreteDist& dist);

struct CheckReport {
  int instances = 0;
  double max_discrepancy = 0.0;
  std::uint64_t worst_seed = 0;
  int tied_instances = 0;
};

/// Closed-form vs LP over `instances` seeded instances (seeds seed, seed+1,
/// ...). `tau_perturbation` shifts the balancing level fed to the closed form
/// and exists to confirm the check detects a broken quantile level.
CheckReport oracle_check(int instances, std::uint64_t seed, double tau_perturbation = 0.0,
                         int max_groups = 20, int max_support = 10);

}  // namespace sharpbounds::oracle
