#include "sharpbounds/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace sharpbounds::oracle {

namespace {

constexpr double kProbTolerance = 1e-12;
constexpr double kFeasTolerance = 1e-12;

struct Point {
  double value;
  double prob;
  double lo;
  double hi;
};

std::vector<Point> positive_points(const DiscreteCell& cell) {
  std::vector<Point> points;
  for (Index k = 0; k < cell.values.size(); ++k) {
    if (cell.probs(k) > 0.0) {
      points.push_back({cell.values(k), cell.probs(k), cell.w_lower(k), cell.w_upper(k)});
    }
  }
  return points;
}

double sorted_split_optimum(std::vector<Point> points, Direction direction) {
  // For the upper direction low values take the lower cap; for the lower
  // direction the roles swap.
  std::stable_sort(points.begin(), points.end(),
                   [](const Point& a, const Point& b) { return a.value < b.value; });
  const bool upper = direction == Direction::kUpper;
  const size_t n = points.size();

  // prefix[k]: mass-weighted first-block weight sum over points [0, k);
  // suffix[k]: second-block sum over (k, n).
  std::vector<double> prefix(n + 1, 0.0), suffix(n + 1, 0.0);
  std::vector<double> prefix_obj(n + 1, 0.0), suffix_obj(n + 1, 0.0);
  for (size_t k = 0; k < n; ++k) {
    const double w = upper ? points[k].lo : points[k].hi;
    prefix[k + 1] = prefix[k] + points[k].prob * w;
    prefix_obj[k + 1] = prefix_obj[k] + points[k].prob * w * points[k].value;
  }
  for (size_t k = n; k-- > 0;) {
    const double w = upper ? points[k].hi : points[k].lo;
    suffix[k] = suffix[k + 1] + points[k].prob * w;
    suffix_obj[k] = suffix_obj[k + 1] + points[k].prob * w * points[k].value;
  }

  bool found = false;
  double best = upper ? -kInf : kInf;
  for (size_t k = 0; k < n; ++k) {
    const double rest = prefix[k] + suffix[k + 1];
    const double w = (1.0 - rest) / points[k].prob;
    if (w < points[k].lo - kFeasTolerance || w > points[k].hi + kFeasTolerance) continue;
    const double objective =
        prefix_obj[k] + suffix_obj[k + 1] + points[k].prob * w * points[k].value;
    best = upper ? std::max(best, objective) : std::min(best, objective);
    found = true;
  }
  if (!found) throw Error(ErrorCode::kInfeasible, "no weight vector in the box has mean one");
  return best;
}

double exhaustive_optimum(const std::vector<Point>& points, Direction direction) {
  const size_t n = points.size();
  if (n > 24) throw Error(ErrorCode::kDomain, "exhaustive enumeration limited to 24 points");
  const bool upper = direction == Direction::kUpper;
  bool found = false;
  double best = upper ? -kInf : kInf;
  for (size_t interior = 0; interior < n; ++interior) {
    const std::uint64_t patterns = std::uint64_t{1} << (n - 1);
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
      double constraint = 0.0;
      double objective = 0.0;
      size_t bit = 0;
      for (size_t k = 0; k < n; ++k) {
        if (k == interior) continue;
        const double w = ((mask >> bit) & 1u) ? points[k].hi : points[k].lo;
        ++bit;
        constraint += points[k].prob * w;
        objective += points[k].prob * w * points[k].value;
      }
      const Point& p = points[interior];
      const double w = (1.0 - constraint) / p.prob;
      if (w < p.lo - kFeasTolerance || w > p.hi + kFeasTolerance) continue;
      objective += p.prob * w * p.value;
      best = upper ? std::max(best, objective) : std::min(best, objective);
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::kInfeasible, "no weight vector in the box has mean one");
  return best;
}

// inf{x : F(x) >= level} for a single cell.
double cell_level_quantile(const DiscreteCell& cell, double level) {
  std::vector<Index> order(static_cast<size_t>(cell.values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return cell.values(a) < cell.values(b); });
  double cumulative = 0.0;
  for (Index k : order) {
    cumulative += cell.probs(k);
    if (cumulative >= level - 1e-12) return cell.values(k);
  }
  return cell.values(order.back());
}

}  // namespace

void DiscreteDist::validate() const {
  if (cells.empty()) throw Error(ErrorCode::kDomain, "distribution has no cells");
  double total = 0.0;
  for (size_t g = 0; g < cells.size(); ++g) {
    const DiscreteCell& cell = cells[g];
    const Index n = cell.values.size();
    if (n == 0 || cell.probs.size() != n || cell.w_lower.size() != n || cell.w_upper.size() != n) {
      throw Error(ErrorCode::kDomain, "cell " + std::to_string(g) + " has inconsistent sizes");
    }
    if (cell.probability < 0.0 || (cell.probs.array() < 0.0).any()) {
      throw Error(ErrorCode::kDomain, "probabilities must be nonnegative");
    }
    if (std::abs(cell.probs.sum() - 1.0) > kProbTolerance) {
      throw Error(ErrorCode::kDomain,
                  "conditional probabilities of cell " + std::to_string(g) + " must sum to one");
    }
    for (Index k = 0; k < n; ++k) {
      if (!is_valid_band(cell.w_lower(k), cell.w_upper(k))) {
        throw Error(ErrorCode::kInvalidBand, "cell " + std::to_string(g) + " has an invalid band");
      }
    }
    total += cell.probability;
  }
  if (std::abs(total - 1.0) > kProbTolerance) {
    throw Error(ErrorCode::kDomain, "cell probabilities must sum to one");
  }
}

Index DiscreteDist::num_points() const {
  Index n = 0;
  for (const DiscreteCell& cell : cells) n += cell.values.size();
  return n;
}

double lp_cell_optimum(const DiscreteCell& cell, Direction direction, VertexStrategy strategy) {
  if ((cell.w_upper.array() == kInf).any()) {
    throw Error(ErrorCode::kUnsupportedInfiniteCap, "the LP oracle needs finite caps");
  }
  const std::vector<Point> points = positive_points(cell);
  if (points.empty()) throw Error(ErrorCode::kInfeasible, "cell has no mass");
  return strategy == VertexStrategy::kSortedSplits ? sorted_split_optimum(points, direction)
                                                   : exhaustive_optimum(points, direction);
}

Index vertex_candidates(Index n, VertexStrategy strategy) {
  if (strategy == VertexStrategy::kSortedSplits) return n;
  return n * (Index{1} << (n - 1));
}

double lp_sharp_bound(const DiscreteDist& dist, Direction direction, VertexStrategy strategy) {
  dist.validate();
  double total = 0.0;
  for (const DiscreteCell& cell : dist.cells) {
    if (cell.probability == 0.0) continue;
    total += cell.probability * lp_cell_optimum(cell, direction, strategy);
  }
  return total;
}

DiscreteDist random_instance(std::uint64_t seed, int max_groups, int max_support) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> group_count(1, std::max(1, max_groups));
  std::uniform_int_distribution<int> support_count(1, std::max(1, max_support));
  std::uniform_int_distribution<int> lattice(-4, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 2.0);

  const bool lattice_values = unit(rng) < 0.35;
  const int groups = group_count(rng);

  DiscreteDist dist;
  dist.cells.resize(static_cast<size_t>(groups));
  double cell_total = 0.0;
  for (DiscreteCell& cell : dist.cells) {
    const int n = support_count(rng);
    cell.probability = 0.05 + unit(rng);
    cell_total += cell.probability;
    cell.values.resize(n);
    cell.probs.resize(n);
    for (int k = 0; k < n; ++k) {
      cell.values(k) = lattice_values ? 0.5 * lattice(rng) : normal(rng);
      cell.probs(k) = 0.05 + unit(rng);
    }
    cell.probs /= cell.probs.sum();

    const double mode = unit(rng);
    double wl = unit(rng);
    double wu = 1.0 + 5.0 * unit(rng);
    if (mode < 0.08) wl = 0.0;
    else if (mode < 0.16) wl = 1.0;
    else if (mode < 0.24) wu = 1.0;
    else if (mode < 0.28) wl = wu = 1.0;
    cell.w_lower = VectorXd::Constant(n, wl);
    cell.w_upper = VectorXd::Constant(n, wu);
  }
  for (DiscreteCell& cell : dist.cells) cell.probability /= cell_total;
  return dist;
}

BoundProblem to_bound_problem(const DiscreteDist& dist, Direction direction) {
  const Index n = dist.num_points();
  BoundProblem problem;
  problem.lambda.resize(n);
  problem.outcome = VectorXd::Ones(n);
  problem.mass.resize(n);
  problem.band.lower.resize(n);
  problem.band.upper.resize(n);
  problem.direction = direction;
  problem.group.reserve(static_cast<size_t>(n));
  Index i = 0;
  for (size_t g = 0; g < dist.cells.size(); ++g) {
    const DiscreteCell& cell = dist.cells[g];
    for (Index k = 0; k < cell.values.size(); ++k, ++i) {
      problem.lambda(i) = cell.values(k);
      problem.mass(i) = cell.probability * cell.probs(k);
      problem.band.lower(i) = cell.w_lower(k);
      problem.band.upper(i) = cell.w_upper(k);
      problem.group.push_back(static_cast<Index>(g));
    }
  }
  return problem;
}

bool has_tied_values(const DiscreteDist& dist) {
  for (const DiscreteCell& cell : dist.cells) {
    std::vector<double> v(cell.values.data(), cell.values.data() + cell.values.size());
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) return true;
  }
  return false;
}

CheckReport oracle_check(int instances, std::uint64_t seed, double tau_perturbation,
                         int max_groups, int max_support) {
  CheckReport report;
  report.instances = instances;
  for (int k = 0; k < instances; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    const DiscreteDist dist = random_instance(s, max_groups, max_support);
    if (has_tied_values(dist)) ++report.tied_instances;
    for (Direction direction : {Direction::kUpper, Direction::kLower}) {
      const BoundProblem problem = to_bound_problem(dist, direction);
      VectorXd q = exact_group_quantiles(problem);
      if (tau_perturbation != 0.0) {
        for (size_t g = 0; g < dist.cells.size(); ++g) {
          const DiscreteCell& cell = dist.cells[g];
          const auto tau = tau_balance(cell.w_lower(0), cell.w_upper(0), direction);
          if (!tau) continue;
          const double level = std::clamp(*tau + tau_perturbation, 0.0, 1.0);
          q(static_cast<Index>(g)) = cell_level_quantile(cell, level);
        }
      }
      const double closed = sharp_bound(problem, q).value;
      const double lp = lp_sharp_bound(dist, direction);
      const double gap = std::abs(closed - lp);
      if (gap > report.max_discrepancy) {
        report.max_discrepancy = gap;
        report.worst_seed = s;
      }
    }
  }
  return report;
}

}  // namespace sharpbounds::oracle
