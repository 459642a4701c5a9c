#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "sharpbounds/oracle.hpp"

using namespace sharpbounds;
using namespace sharpbounds::oracle;
using doctest::Approx;

namespace {

DiscreteCell make_cell(std::vector<double> v, std::vector<double> p, double lo, double hi) {
  const auto n = static_cast<Index>(v.size());
  DiscreteCell c;
  c.probability = 1.0;
  c.values = Eigen::Map<VectorXd>(v.data(), n);
  c.probs = Eigen::Map<VectorXd>(p.data(), n);
  c.w_lower = VectorXd::Constant(n, lo);
  c.w_upper = VectorXd::Constant(n, hi);
  return c;
}

}  // namespace

TEST_CASE("lp_cell_optimum on hand-enumerated cells") {
  const DiscreteCell two = make_cell({0.0, 1.0}, {0.5, 0.5}, 0.5, 1.5);
  CHECK(lp_cell_optimum(two, Direction::kUpper) == Approx(0.75).epsilon(1e-15));
  CHECK(lp_cell_optimum(two, Direction::kLower) == Approx(0.25).epsilon(1e-15));
  CHECK(lp_cell_optimum(two, Direction::kUpper, VertexStrategy::kExhaustive) == Approx(0.75));

  const DiscreteCell three = make_cell({1.0, 2.0, 3.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.5, 2.0);
  CHECK(lp_cell_optimum(three, Direction::kUpper) == Approx(2.5).epsilon(1e-14));

  const DiscreteCell id = make_cell({1.0, 4.0, -2.0}, {0.25, 0.25, 0.5}, 1.0, 1.0);
  CHECK(lp_cell_optimum(id, Direction::kUpper) == Approx(0.25).epsilon(1e-15));
  CHECK(lp_cell_optimum(id, Direction::kLower) == Approx(0.25).epsilon(1e-15));
}

TEST_CASE("infeasible cell") {
  const DiscreteCell bad = make_cell({0.0, 1.0}, {0.5, 0.5}, 1.2, 1.5);
  CHECK_THROWS_AS(lp_cell_optimum(bad, Direction::kUpper), Error);
}

TEST_CASE("vertex candidate counts") {
  for (Index n = 1; n <= 10; ++n) CHECK(vertex_candidates(n, VertexStrategy::kSortedSplits) <= n + 1);
}

TEST_CASE("random_instance is deterministic and valid") {
  const DiscreteDist a = random_instance(1, 2, 3);
  const DiscreteDist b = random_instance(1, 2, 3);
  REQUIRE(a.cells.size() == b.cells.size());
  for (size_t k = 0; k < a.cells.size(); ++k) {
    CHECK(a.cells[k].values == b.cells[k].values);
    CHECK(a.cells[k].probs == b.cells[k].probs);
    CHECK(a.cells[k].probability == b.cells[k].probability);
  }
  int tied = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const DiscreteDist d = random_instance(seed, 20, 10);
    CHECK_NOTHROW(d.validate());
    CHECK(d.cells.size() <= 20);
    double total = 0.0;
    for (const DiscreteCell& c : d.cells) {
      total += c.probability;
      CHECK(c.values.size() <= 10);
      CHECK(std::abs(c.probs.sum() - 1.0) <= 1e-12);
      CHECK((c.probs.array() >= 0.0).all());
      CHECK((c.w_lower.array() >= 0.0).all());
      CHECK((c.w_lower.array() <= 1.0).all());
      CHECK((c.w_upper.array() >= 1.0).all());
      CHECK(c.w_upper.allFinite());
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    if (has_tied_values(d)) ++tied;
  }
  CHECK(tied >= 100);
}

TEST_CASE("property: sorted splits agree with exhaustive enumeration") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const DiscreteDist d = random_instance(seed, 3, 6);
    for (Direction dir : {Direction::kUpper, Direction::kLower}) {
      CHECK(lp_sharp_bound(d, dir) ==
            Approx(lp_sharp_bound(d, dir, VertexStrategy::kExhaustive)).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: upper LP value dominates lower") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const DiscreteDist d = random_instance(seed, 20, 10);
    CHECK(lp_sharp_bound(d, Direction::kUpper) >= lp_sharp_bound(d, Direction::kLower) - 1e-12);
  }
}

TEST_CASE("oracle_check passes and detects a shifted balancing level") {
  const CheckReport ok = oracle_check(1000, 20240601);
  CHECK(ok.instances == 1000);
  CHECK(ok.max_discrepancy <= 1e-9);
  CHECK(ok.tied_instances >= 100);
  const CheckReport again = oracle_check(1000, 20240601);
  CHECK(again.max_discrepancy == ok.max_discrepancy);
  CHECK(again.worst_seed == ok.worst_seed);

  const CheckReport broken = oracle_check(200, 20240601, 0.05);
  CHECK(broken.max_discrepancy > 1e-9);
}

TEST_CASE("to_bound_problem round trip") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const DiscreteDist d = random_instance(seed, 5, 5);
    for (Direction dir : {Direction::kUpper, Direction::kLower}) {
      const BoundProblem p = to_bound_problem(d, dir);
      CHECK(sharp_bound_exact(p).value == Approx(lp_sharp_bound(d, dir)).epsilon(1e-10));
    }
  }
}
