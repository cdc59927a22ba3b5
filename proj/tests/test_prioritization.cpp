#include <gtest/gtest.h>

#include <random>

#include "lslr/prioritization.hpp"
#include "lslr/rng.hpp"
#include "oracles.hpp"

using namespace lslr;

namespace {

std::vector<KnapsackItem> trap() { return {{"1", 60, 10}, {"2", 100, 20}, {"3", 120, 30}}; }

std::vector<oracle::Item> as_oracle(const std::vector<KnapsackItem>& items) {
  std::vector<oracle::Item> out;
  for (const auto& it : items) out.push_back({it.value, it.cost});
  return out;
}

}  // namespace

TEST(Rank, Examples) {
  const std::vector<KnapsackItem> a{{"a", 10, 2}, {"b", 10, 5}};
  const auto r = rank_items(a);
  EXPECT_EQ(r[0].project_id, "a");
  EXPECT_EQ(r[0].bcr, 5.0);
  EXPECT_EQ(r[1].bcr, 2.0);
  EXPECT_EQ(r[1].rank, 2);

  const std::vector<KnapsackItem> b{{"small", 4, 1}, {"big", 8, 2}};
  EXPECT_EQ(rank_items(b)[0].project_id, "big");

  const std::vector<KnapsackItem> z{{"x", 1, 0}};
  try {
    rank_items(z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroCost);
  }
}

TEST(Rank, RandomMatchesComparatorSort) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<KnapsackItem> items;
    for (int i = 0; i < 40; ++i) {
      items.push_back({"id" + std::to_string(gen() % 1000), double(gen() % 10), double(1 + gen() % 5)});
    }
    auto expected = items;
    std::sort(expected.begin(), expected.end(), [](const KnapsackItem& x, const KnapsackItem& y) {
      // Cross-multiplied ratio comparison avoids any division.
      const double lx = x.value * y.cost, ly = y.value * x.cost;
      if (lx != ly) return lx > ly;
      if (x.value != y.value) return x.value > y.value;
      return x.id < y.id;
    });
    const auto got = rank_items(items);
    for (std::size_t i = 0; i < items.size(); ++i) ASSERT_EQ(got[i].project_id, expected[i].id);
  }
}

TEST(Greedy, Boundaries) {
  const auto ranked = rank_items(trap());
  EXPECT_TRUE(greedy_select(ranked, 0, false).selected.empty());
  EXPECT_TRUE(greedy_select(ranked, 0, true).selected.empty());
  EXPECT_FALSE(greedy_select(ranked, 0, true).fractional_last.has_value());
  for (bool frac : {false, true}) {
    const auto all = greedy_select(ranked, 60, frac);
    EXPECT_EQ(all.selected.size(), 3u);
    EXPECT_EQ(all.total_value, 280.0);
    EXPECT_FALSE(all.fractional_last.has_value());
  }
}

TEST(Greedy, TrapInstance) {
  const auto ranked = rank_items(trap());
  const auto g = greedy_select(ranked, 50, false);
  EXPECT_EQ(g.selected, (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(g.total_value, 160.0);
  const auto f = greedy_select(ranked, 50, true);
  ASSERT_TRUE(f.fractional_last.has_value());
  EXPECT_EQ(f.fractional_last->first, "3");
  EXPECT_NEAR(f.total_value, 240.0, 1e-12);
  EXPECT_NEAR(f.total_value, oracle::lp_relaxation(as_oracle(trap()), 50), 1e-12);
}

TEST(Exact, TrapInstanceOptimum) {
  const auto e = knapsack_exact(trap(), 50);
  EXPECT_EQ(e.total_value, 220.0);
  auto sel = e.selected;
  std::sort(sel.begin(), sel.end());
  EXPECT_EQ(sel, (std::vector<std::string>{"2", "3"}));
  EXPECT_EQ(oracle::enumerate_knapsack(as_oracle(trap()), 50), 220.0);
}

TEST(Exact, SingletonAndErrors) {
  const std::vector<KnapsackItem> one{{"a", 5, 3}};
  EXPECT_EQ(knapsack_exact(one, 3).selected, (std::vector<std::string>{"a"}));
  const std::vector<KnapsackItem> frac{{"a", 5, 2.5}};
  try {
    knapsack_exact(frac, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonIntegralCost);
  }
  ExactOptions tiny;
  tiny.max_table_cells = 10;
  try {
    knapsack_exact(one, 1000, tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InstanceTooLarge);
  }
  ExactOptions half;
  half.cost_quantum = 0.5;
  EXPECT_EQ(knapsack_exact(frac, 2.5, half).total_value, 5.0);
}

TEST(Gap, Examples) {
  // The trap: greedy 0/1 gets 60 + 100 while the optimum is 220.
  const auto g = greedy_select(rank_items(trap()), 50, false);
  EXPECT_EQ(g.total_value, 160.0);
  const std::vector<KnapsackItem> easy{{"a", 10, 1}, {"b", 1, 1}};
  EXPECT_EQ(approximation_gap(easy, 1), 1.0);
}

TEST(Gap, TrapGreedyValueWithSkipping) {
  // Skip-and-continue still cannot fit item 3 after 1 and 2.
  EXPECT_NEAR(approximation_gap(trap(), 50), 160.0 / 220.0, 1e-12);
}

TEST(Exact, RandomInstancesAgainstEnumerationAndRelaxation) {
  GapInstanceSpec spec;
  for (int k = 0; k < 200; ++k) {
    spec.items = 1 + k % 15;
    const auto inst = random_gap_instance(derive_seed(42, k), spec);
    const auto items = as_oracle(inst.items);
    const double exact = knapsack_exact(inst.items, inst.budget).total_value;
    ASSERT_EQ(exact, oracle::enumerate_knapsack(items, inst.budget)) << k;
    const auto ranked = rank_items(inst.items);
    const double g01 = greedy_select(ranked, inst.budget, false).total_value;
    const double gfr = greedy_select(ranked, inst.budget, true).total_value;
    const double lp = oracle::lp_relaxation(items, inst.budget);
    ASSERT_LE(g01, exact + 1e-9);
    ASSERT_LE(exact, gfr + 1e-9);
    ASSERT_LE(std::abs(gfr - lp), 1e-9 * std::max(1.0, std::abs(lp))) << k;
  }
}

TEST(Gap, BenchmarkTwinsAgree) {
  const auto par = gap_benchmark(300, 5);
  const auto ser = reference::gap_benchmark(300, 5);
  EXPECT_EQ(par.ratios, ser.ratios);
  EXPECT_EQ(par.median, ser.median);
  EXPECT_GE(par.min, 0.5);
  EXPECT_LE(par.median, 1.0);
}

TEST(Gap, Summary) {
  const auto s = summarize_gaps({1.0, 0.5, 0.9, 1.0});
  EXPECT_DOUBLE_EQ(s.median, 0.95);
  EXPECT_DOUBLE_EQ(s.min, 0.5);
  EXPECT_EQ(s.optimal, 2u);
}
