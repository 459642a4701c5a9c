#pragma once

// Seeded generators and conversions shared by the property tests.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sharpbounds/core_bounds.hpp"
#include "sharpbounds/oracle.hpp"

namespace sbtest {

using namespace sharpbounds;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double normal() { return std::normal_distribution<double>()(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform() < p; }

  // w_lower in [0, 1], occasionally exactly 0 or 1.
  double w_lower() {
    const double u = uniform();
    if (u < 0.1) return 0.0;
    if (u < 0.2) return 1.0;
    return uniform();
  }
  // w_upper in [1, 10], occasionally exactly 1.
  double w_upper() { return coin(0.1) ? 1.0 : 1.0 + uniform(0.0, 9.0); }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Random grouped problem with finite caps constant within each cell. A
// third of the instances draw lambda*y from a small lattice to create ties.
inline BoundProblem random_problem(std::uint64_t seed, Direction direction = Direction::kUpper) {
  Gen g(seed);
  const int groups = g.integer(1, 6);
  const bool lattice = g.coin(1.0 / 3.0);
  std::vector<double> lo(static_cast<size_t>(groups)), hi(static_cast<size_t>(groups));
  for (int k = 0; k < groups; ++k) {
    lo[static_cast<size_t>(k)] = g.w_lower();
    hi[static_cast<size_t>(k)] = g.w_upper();
  }
  std::vector<double> lambda, outcome, mass, wl, wu;
  std::vector<Index> group;
  for (int k = 0; k < groups; ++k) {
    const int points = g.integer(1, 8);
    for (int j = 0; j < points; ++j) {
      lambda.push_back(g.coin(0.2) ? -g.uniform(0.5, 2.0) : g.uniform(0.5, 2.0));
      outcome.push_back(lattice ? static_cast<double>(g.integer(-2, 2)) : g.normal());
      mass.push_back(g.uniform(0.1, 1.0));
      wl.push_back(lo[static_cast<size_t>(k)]);
      wu.push_back(hi[static_cast<size_t>(k)]);
      group.push_back(k);
    }
  }
  const auto n = static_cast<Index>(lambda.size());
  BoundProblem p;
  p.lambda = Eigen::Map<VectorXd>(lambda.data(), n);
  p.outcome = Eigen::Map<VectorXd>(outcome.data(), n);
  p.mass = Eigen::Map<VectorXd>(mass.data(), n);
  p.mass /= p.mass.sum();
  p.band.lower = Eigen::Map<VectorXd>(wl.data(), n);
  p.band.upper = Eigen::Map<VectorXd>(wu.data(), n);
  p.group = group;
  p.direction = direction;
  return p;
}

// The problem as an oracle distribution: one cell per group, support points
// lambda*y with conditional probabilities.
inline oracle::DiscreteDist to_dist(const BoundProblem& p) {
  const Index groups = p.num_groups();
  std::vector<std::vector<Index>> members(static_cast<size_t>(groups));
  for (Index i = 0; i < p.size(); ++i) members[static_cast<size_t>(p.group_of(i))].push_back(i);
  const VectorXd ly = p.lambda_y();
  oracle::DiscreteDist dist;
  for (const auto& rows : members) {
    if (rows.empty()) continue;
    oracle::DiscreteCell cell;
    const auto m = static_cast<Index>(rows.size());
    cell.values.resize(m);
    cell.probs.resize(m);
    cell.w_lower.resize(m);
    cell.w_upper.resize(m);
    double total = 0.0;
    for (Index k = 0; k < m; ++k) total += p.mass_of(rows[static_cast<size_t>(k)]);
    for (Index k = 0; k < m; ++k) {
      const Index i = rows[static_cast<size_t>(k)];
      cell.values(k) = ly(i);
      cell.probs(k) = p.mass_of(i) / total;
      cell.w_lower(k) = p.band.lower(i);
      cell.w_upper(k) = p.band.upper(i);
    }
    cell.probability = total;
    dist.cells.push_back(cell);
  }
  // Renormalize against rounding in the mass sums.
  double sum = 0.0;
  for (const auto& c : dist.cells) sum += c.probability;
  for (auto& c : dist.cells) c.probability /= sum;
  return dist;
}

inline double plugin_mean(const BoundProblem& p) {
  const VectorXd ly = p.lambda_y();
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i) s += p.mass_of(i) * ly(i);
  return s;
}

}  // namespace sbtest
