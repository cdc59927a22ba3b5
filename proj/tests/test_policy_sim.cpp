#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "lslr/policy_sim.hpp"
#include "lslr/prioritization.hpp"
#include "lslr/rng.hpp"

using namespace lslr;

namespace {

Project make(std::string id, double value, double cost = 1, double length = 100, int lines = 1, int kids = 0) {
  Project p;
  p.project_id = std::move(id);
  p.value_exposure_years = value;
  p.cost_units = cost;
  p.length_m = length;
  p.lead_line_count = lines;
  p.child_count = kids;
  return p;
}

double chi_square_critical(std::size_t dof, double alpha) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

std::vector<Project> random_projects(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<Project> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "P%04zu", i);
    const int lines = static_cast<int>(rng.between(1, 8));
    out.push_back(make(id, rng.bernoulli(0.3) ? 0.0 : rng.uniform(0, 50), lines, rng.uniform(20, 150), lines,
                       static_cast<int>(rng.between(0, 4))));
  }
  return out;
}

}  // namespace

TEST(Policy, Names) {
  for (const char* name :
       {"uniform_random", "by_length", "by_lead_per_meter", "weighted_by_exposure", "by_bcr", "by_value"}) {
    EXPECT_EQ(policy_name(parse_policy(name, 3)), name);
  }
  EXPECT_THROW(parse_policy("bogus"), Error);
  EXPECT_TRUE(is_stochastic(parse_policy("uniform_random")));
  EXPECT_FALSE(is_stochastic(parse_policy("by_bcr")));
}

TEST(Ordering, ByValueFullSort) {
  std::vector<Project> p{make("a", 3), make("b", 9), make("c", 1), make("d", 9)};
  EXPECT_EQ(policy_ordering(ByValue{}, p, 4), (std::vector<std::string>{"b", "d", "a", "c"}));
}

TEST(Ordering, DeterministicKeys) {
  std::vector<Project> p{make("a", 10, 2, 50, 2), make("b", 10, 5, 200, 5), make("c", 1, 1, 10, 3)};
  EXPECT_EQ(policy_ordering(ByLengthExcavated{}, p, 3), (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_EQ(policy_ordering(ByLeadPerMeter{}, p, 3), (std::vector<std::string>{"c", "a", "b"}));
  EXPECT_EQ(policy_ordering(ByBcr{}, p, 3), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Ordering, NotEnoughProjects) {
  std::vector<Project> p{make("a", 1)};
  try {
    policy_order(ByValue{}, p, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotEnoughProjects);
  }
}

TEST(Ordering, WeightedSinglePositiveFirst) {
  std::vector<Project> p{make("z0", 0), make("z1", 0), make("hot", 5), make("z2", 0)};
  std::map<std::string, int> second;
  for (std::uint64_t s = 0; s < 30000; ++s) {
    const auto o = policy_ordering(WeightedByExposure{s}, p, 4);
    ASSERT_EQ(o[0], "hot");
    ++second[o[1]];
  }
  ASSERT_EQ(second.size(), 3u);
  double stat = 0;
  for (const auto& [id, n] : second) stat += (n - 10000.0) * (n - 10000.0) / 10000.0;
  EXPECT_LT(stat, chi_square_critical(2, 0.001));
}

TEST(Ordering, UniformPermutationsEquallyLikely) {
  std::vector<Project> p{make("a", 1), make("b", 2), make("c", 3)};
  std::map<std::vector<std::string>, int> counts;
  const int trials = 60000;
  for (int t = 0; t < trials; ++t) ++counts[policy_ordering(UniformRandom{derive_seed(17, t)}, p, 3)];
  ASSERT_EQ(counts.size(), 6u);
  const double expected = trials / 6.0;
  const double sigma = std::sqrt(trials * (1.0 / 6) * (5.0 / 6));
  double stat = 0;
  for (const auto& [order, n] : counts) {
    EXPECT_NEAR(n, expected, 3 * sigma);
    stat += (n - expected) * (n - expected) / expected;
  }
  EXPECT_LT(stat, chi_square_critical(5, 0.001));
}

TEST(Ordering, WeightedFirstDrawChiSquare) {
  std::vector<Project> p{make("a", 1), make("b", 2), make("c", 3.5), make("d", 0.5), make("e", 8)};
  double total = 0;
  for (const auto& x : p) total += x.value_exposure_years;
  std::map<std::string, int> counts;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) ++counts[policy_ordering(WeightedByExposure{derive_seed(23, t)}, p, 1)[0]];
  double stat = 0;
  for (const auto& x : p) {
    const double e = trials * x.value_exposure_years / total;
    stat += (counts[x.project_id] - e) * (counts[x.project_id] - e) / e;
  }
  EXPECT_LT(stat, chi_square_critical(4, 0.001));
}

TEST(Ordering, SeededReproducible) {
  const auto p = random_projects(4, 60);
  EXPECT_EQ(policy_ordering(UniformRandom{9}, p, 30), policy_ordering(UniformRandom{9}, p, 30));
  EXPECT_EQ(policy_ordering(WeightedByExposure{9}, p, 60), policy_ordering(WeightedByExposure{9}, p, 60));
  EXPECT_NE(policy_ordering(UniformRandom{9}, p, 30), policy_ordering(UniformRandom{10}, p, 30));
}

TEST(Simulate, DeterministicSingleRun) {
  const auto p = random_projects(5, 40);
  const std::vector<Policy> pols{ByBcr{}};
  const auto sims = simulate(pols, p, 20, 30);
  ASSERT_EQ(sims.size(), 1u);
  ASSERT_EQ(sims[0].runs.size(), 1u);
  EXPECT_EQ(sims[0].median, sims[0].runs[0].per_step);
}

TEST(Simulate, AllZeroValueFlat) {
  std::vector<Project> p;
  for (int i = 0; i < 10; ++i) p.push_back(make("p" + std::to_string(i), 0.0));
  const std::vector<Policy> pols{UniformRandom{1}, ByLengthExcavated{}, ByLeadPerMeter{}, WeightedByExposure{2},
                                 ByBcr{}, ByValue{}};
  for (const auto& sim : simulate(pols, p, 10, 5)) {
    for (const auto& step : sim.median) EXPECT_EQ(step.exposure_years, 0.0);
  }
}

TEST(Simulate, ByValueDominatesPointwiseAndTwinsAgree) {
  const auto p = random_projects(6, 300);
  const std::vector<Policy> pols{UniformRandom{1}, ByLengthExcavated{}, ByLeadPerMeter{}, WeightedByExposure{2},
                                 ByBcr{}, ByValue{}};
  const auto sims = simulate(pols, p, 100, 20);
  const auto ref = reference::simulate(pols, p, 100, 20);
  ASSERT_EQ(trajectories_csv(sims), trajectories_csv(ref));
  const auto& best = sims.back().median;
  for (const auto& sim : sims) {
    for (const auto& run : sim.runs) {
      for (std::size_t k = 0; k < run.per_step.size(); ++k) {
        ASSERT_GE(best[k].exposure_years + 1e-9, run.per_step[k].exposure_years);
        if (k) {
          ASSERT_GE(run.per_step[k].exposure_years, run.per_step[k - 1].exposure_years);
        }
      }
    }
  }
}

TEST(Simulate, CumulativeMetrics) {
  std::vector<Project> p{make("a", 2, 3, 10, 3, 1), make("b", 5, 1, 10, 1, 2)};
  const std::vector<std::size_t> order{1, 0};
  const auto m = cumulative_metrics(p, order);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0], (StepMetrics{5, 2, 1, 1}));
  EXPECT_EQ(m[1], (StepMetrics{7, 3, 4, 4}));
}

TEST(Simulate, MedianPointwise) {
  std::vector<PolicyRun> runs(4);
  const double v[] = {1, 4, 2, 10};
  for (int i = 0; i < 4; ++i) runs[i].per_step = {StepMetrics{v[i], 0, 0, 0}};
  EXPECT_EQ(median_trajectory(runs)[0].exposure_years, 3.0);
  runs.pop_back();
  EXPECT_EQ(median_trajectory(runs)[0].exposure_years, 2.0);
}

TEST(Curve, UniformValues) {
  const std::vector<double> v(10, 2.5);
  const auto c = cumulative_curve(std::span<const double>(v));
  ASSERT_EQ(c.size(), 10u);
  for (std::size_t k = 1; k <= 10; ++k) EXPECT_NEAR(c[k - 1].fraction, k / 10.0, 1e-12);
  EXPECT_EQ(c.back().fraction, 1.0);
}

TEST(Curve, MonotoneConcave) {
  const auto p = random_projects(7, 200);
  const auto c = cumulative_curve(p);
  for (std::size_t k = 1; k < c.size(); ++k) {
    EXPECT_GE(c[k].fraction, c[k - 1].fraction);
    if (k + 1 < c.size()) {
      EXPECT_GE(c[k].fraction - c[k - 1].fraction + 1e-12, c[k + 1].fraction - c[k].fraction);
    }
  }
}

TEST(Curve, ZeroTotal) {
  const std::vector<double> v(3, 0.0);
  EXPECT_THROW(cumulative_curve(std::span<const double>(v)), Error);
}

TEST(Quantile, Table) {
  const std::vector<double> v{5, 3, 2};
  const auto c = cumulative_curve(std::span<const double>(v));
  const std::vector<std::size_t> all{3};
  EXPECT_EQ(quantile_table(c, all)[0].text, "100.0");
  EXPECT_TRUE(quantile_table(c, std::vector<std::size_t>{}).empty());
  const std::vector<std::size_t> one{1};
  EXPECT_EQ(quantile_table(c, one)[0].text, "50.0");
  const std::vector<std::size_t> bad{4};
  try {
    quantile_table(c, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
  }
}

TEST(Trajectories, CsvShape) {
  std::vector<Project> p{make("a", 1), make("b", 2)};
  const std::vector<Policy> pols{ByValue{}, UniformRandom{3}};
  const auto csv = trajectories_csv(simulate(pols, p, 2, 3));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "policy,iteration,step,exposure_years,children,lines,cost");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 + 3 * 2);
}
