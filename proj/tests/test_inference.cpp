#include <doctest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "sharpbounds/inference.hpp"
#include "sharpbounds/simlab.hpp"

using namespace sharpbounds;
using doctest::Approx;

namespace {

IPWSample dgp(Index n, std::uint64_t seed) {
  DGPConfig c;
  c.n = n;
  c.seed = seed;
  return dgp_sample(c);
}

bool same(const BootstrapResult& a, const BootstrapResult& b) {
  if (a.draws.size() != b.draws.size()) return false;
  for (size_t k = 0; k < a.draws.size(); ++k) {
    if (a.draws[k] != b.draws[k]) return false;
  }
  return a.set_ci == b.set_ci && a.lb_ci == b.lb_ci && a.ub_ci == b.ub_ci &&
         a.lb_one_sided == b.lb_one_sided && a.ub_one_sided == b.ub_one_sided &&
         a.n_infinite == b.n_infinite && a.n_failed == b.n_failed;
}

}  // namespace

TEST_CASE("empirical_quantile") {
  CHECK(empirical_quantile({1, 2, 3, 4}, 0.5) == 2.0);
  CHECK(empirical_quantile({4, 3, 2, 1}, 0.5) == 2.0);
  CHECK(empirical_quantile({1, 2, kInf}, 0.975) == kInf);
  CHECK(empirical_quantile({-kInf, 1, 2}, 0.025) == -kInf);
  for (double level : {0.0, 0.025, 0.5, 0.975, 1.0}) {
    CHECK(empirical_quantile({3, 3, 3, 3, 3}, level) == 3.0);
  }
  // ceil(0.025 * 1000) = 25 exactly despite rounding in the product.
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[static_cast<size_t>(i)] = i + 1;
  CHECK(empirical_quantile(v, 0.025) == 25.0);
  CHECK(empirical_quantile(v, 0.975) == 975.0);
  CHECK(empirical_quantile(v, 0.0) == 1.0);
  CHECK_THROWS_AS(empirical_quantile({}, 0.5), Error);
  CHECK_THROWS_AS(empirical_quantile({1.0}, 1.5), Error);
}

TEST_CASE("empirical_median") {
  CHECK(empirical_median({3, 1, 2}) == 2.0);
  CHECK(empirical_median({4, 1, 2, 3}) == 2.5);
  CHECK(empirical_median({1, kInf, kInf}) == kInf);
  CHECK(empirical_median({1, 2, kInf, kInf}) == kInf);
  CHECK(empirical_median({kInf, kInf}) == kInf);
}

TEST_CASE("resample_rows is deterministic per draw") {
  CHECK(resample_rows(100, 42, 3) == resample_rows(100, 42, 3));
  CHECK(resample_rows(100, 42, 3) != resample_rows(100, 42, 4));
  for (Index r : resample_rows(50, 1, 0)) {
    CHECK(r >= 0);
    CHECK(r < 50);
  }
}

TEST_CASE("degenerate data gives zero-width intervals") {
  BootstrapOptions o;
  o.draws = 100;
  o.seed = 5;
  const VectorXd y = VectorXd::Constant(40, 2.5);
  const BootstrapResult r = percentile_bootstrap(
      40,
      [&](std::span<const Index> rows) {
        double s = 0.0;
        for (Index i : rows) s += y(i);
        const double m = s / static_cast<double>(rows.size());
        return Interval{m, m};
      },
      o);
  CHECK(r.set_ci == Interval{2.5, 2.5});
  CHECK(r.lb_ci == Interval{2.5, 2.5});
  CHECK(r.ub_ci == Interval{2.5, 2.5});
  CHECK(r.draws.size() == 100);
}

TEST_CASE("failed draws are counted and bounded") {
  BootstrapOptions o;
  o.draws = 200;
  o.seed = 1;
  auto failing = [](int every) {
    return [every](std::span<const Index> rows) {
      // Fails on a deterministic share of draws keyed by the first row.
      if (rows[0] % every == 0) throw Error(ErrorCode::kDomain, "bad draw");
      return Interval{0.0, 1.0};
    };
  };
  const BootstrapResult few = percentile_bootstrap(1000, failing(1000), o);
  CHECK(few.n_failed < 10);
  CHECK(few.draws.size() == static_cast<size_t>(200 - few.n_failed));
  try {
    percentile_bootstrap(1000, failing(2), o);
    FAIL("expected bootstrap-unstable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBootstrapUnstable);
  }
  o.draws = 1;
  CHECK_THROWS_AS(percentile_bootstrap(10, failing(1000), o), Error);
}

TEST_CASE("percentile bootstrap on the IPW design") {
  const IPWSample s = dgp(800, 3);
  const IPWNuisance nuis = fit_ipw_nuisance(s, IPWEstimand::kAte);
  IPWBootstrapSpec spec;
  spec.sample = &s;
  spec.nuisance = nuis;
  for (double c : {0.0, 0.03, 0.06}) {
    IPWConfig cfg;
    cfg.c = c;
    spec.configs.push_back(cfg);
  }
  BootstrapOptions o;
  o.draws = 100;
  o.seed = 77;
  const DrawMatrix draws = bootstrap_draws(s.size(), ipw_bootstrap_statistic(spec), o);
  CHECK(draws.values.cols() == 6);

  SUBCASE("bit-identical reruns and thread-count independence") {
    o.threads = 3;
    const DrawMatrix again = bootstrap_draws(s.size(), ipw_bootstrap_statistic(spec), o);
    CHECK(again.values == draws.values);
    for (Index k = 0; k < 3; ++k) {
      CHECK(same(summarize_draws(draws, 2 * k, 2 * k + 1), summarize_draws(again, 2 * k, 2 * k + 1)));
    }
  }
  SUBCASE("set CI contains the median draws and the point estimates") {
    const VectorXd e = nuis.propensity.predict(s.x);
    const GridPredictions grid = nuis.grid.predict_sorted(ipw_quantile_features(s.x, s.z, e), ipw_cells(s.z));
    for (Index k = 0; k < 3; ++k) {
      const BootstrapResult r = summarize_draws(draws, 2 * k, 2 * k + 1);
      std::vector<double> lo, up;
      for (const Interval& d : r.draws) {
        lo.push_back(d.first);
        up.push_back(d.second);
      }
      CHECK(r.set_ci.first <= empirical_median(lo));
      CHECK(r.set_ci.second >= empirical_median(up));
      CHECK(r.set_ci.first == r.lb_ci.first);
      CHECK(r.set_ci.second == r.ub_ci.second);
      CHECK(r.lb_one_sided >= r.lb_ci.first);
      CHECK(r.ub_one_sided <= r.ub_ci.second);
      const BoundPair point = ipw_bounds(s, e, grid, spec.configs[static_cast<size_t>(k)], IPWEstimand::kAte);
      CHECK(r.set_ci.first <= point.lower.value);
      CHECK(r.set_ci.second >= point.upper.value);
    }
  }
  SUBCASE("wider bands give wider set CIs on the same resamples") {
    Interval prev{kInf, -kInf};
    for (Index k = 0; k < 3; ++k) {
      const BootstrapResult r = summarize_draws(draws, 2 * k, 2 * k + 1);
      CHECK(r.set_ci.first <= prev.first);
      CHECK(r.set_ci.second >= prev.second);
      prev = r.set_ci;
    }
  }
  SUBCASE("draw values are finite well inside the propensity margin") {
    // c = 0.06 can be unbounded on a resample whose fitted propensity exceeds 0.94.
    CHECK(draws.values.leftCols(4).allFinite());
    CHECK(draws.n_failed == 0);
  }
}

TEST_CASE("infinite draws propagate to the intervals") {
  const IPWSample s = dgp(800, 5);
  IPWBootstrapSpec spec;
  spec.sample = &s;
  spec.nuisance = fit_ipw_nuisance(s, IPWEstimand::kAte);
  IPWConfig cfg;
  cfg.c = 0.2;  // beyond every propensity margin
  spec.configs = {cfg};
  BootstrapOptions o;
  o.draws = 50;
  o.seed = 9;
  const DrawMatrix d = bootstrap_draws(s.size(), ipw_bootstrap_statistic(spec), o);
  const BootstrapResult r = summarize_draws(d, 0, 1);
  CHECK(r.n_infinite == 50);
  CHECK(r.set_ci.first == -kInf);
  CHECK(r.set_ci.second == kInf);
  const BootstrapResult again = summarize_draws(bootstrap_draws(s.size(), ipw_bootstrap_statistic(spec), o), 0, 1);
  CHECK(again.n_infinite == r.n_infinite);
}

TEST_CASE("full refit option runs and differs from the one-step path") {
  const IPWSample s = dgp(500, 8);
  IPWBootstrapSpec spec;
  spec.sample = &s;
  spec.nuisance = fit_ipw_nuisance(s, IPWEstimand::kAte);
  IPWConfig cfg;
  cfg.c = 0.05;
  spec.configs = {cfg};
  BootstrapOptions o;
  o.draws = 10;
  o.seed = 2;
  const DrawMatrix one = bootstrap_draws(s.size(), ipw_bootstrap_statistic(spec), o);
  spec.full_refit = true;
  const DrawMatrix full = bootstrap_draws(s.size(), ipw_bootstrap_statistic(spec), o);
  CHECK(full.values.allFinite());
  CHECK((full.values - one.values).cwiseAbs().maxCoeff() > 0.0);
  // Both paths estimate the same bounds; they stay close.
  CHECK((full.values - one.values).cwiseAbs().maxCoeff() < 0.5);
}
