#include "lslr/prioritization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "exact_sum.hpp"
#include "lslr/rng.hpp"
#include "parallel.hpp"

namespace lslr {

std::vector<KnapsackItem> to_items(std::span<const Project> projects) {
  std::vector<KnapsackItem> items;
  items.reserve(projects.size());
  for (const auto& p : projects) items.push_back({p.project_id, p.value_exposure_years, p.cost_units});
  return items;
}

std::vector<RankedProject> rank_items(std::span<const KnapsackItem> items) {
  std::vector<RankedProject> ranked;
  ranked.reserve(items.size());
  for (const auto& item : items) {
    if (!(item.cost > 0.0)) {
      throw Error(ErrorCode::ZeroCost, "project " + item.id + " has non-positive cost");
    }
    ranked.push_back({item.id, item.value, item.cost, item.value / item.cost, 0});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedProject& a, const RankedProject& b) {
    if (a.bcr != b.bcr) return a.bcr > b.bcr;
    if (a.value != b.value) return a.value > b.value;
    return a.project_id < b.project_id;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = static_cast<int>(i + 1);
  return ranked;
}

std::vector<RankedProject> rank_projects(std::span<const Project> projects) {
  const auto items = to_items(projects);
  return rank_items(items);
}

SelectionResult greedy_select(std::span<const RankedProject> ranked, double budget, bool fractional) {
  if (!(budget >= 0.0)) throw Error(ErrorCode::InvalidArgument, "budget must be >= 0");
  SelectionResult result;
  result.budget = budget;
  detail::ExactSum value, cost;
  for (const auto& r : ranked) {
    const double remaining = budget - cost.value();
    if (r.cost <= remaining) {
      result.selected.push_back(r.project_id);
      cost.add(r.cost);
      value.add(r.value);
      continue;
    }
    if (fractional) {
      if (remaining > 0.0) {
        const double fraction = remaining / r.cost;
        result.fractional_last = std::pair{r.project_id, fraction};
        value.add(fraction * r.value);
        cost.add(remaining);
      }
      break;
    }
  }
  result.total_value = value.value();
  result.total_cost = result.fractional_last ? budget : cost.value();
  return result;
}

SelectionResult knapsack_exact(std::span<const KnapsackItem> items, double budget, ExactOptions options) {
  if (!(budget >= 0.0)) throw Error(ErrorCode::InvalidArgument, "budget must be >= 0");
  if (!(options.cost_quantum > 0.0)) throw Error(ErrorCode::InvalidArgument, "cost quantum must be > 0");

  std::vector<std::uint64_t> weight(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double scaled = items[i].cost / options.cost_quantum;
    const double rounded = std::round(scaled);
    if (!(rounded >= 0.0) || std::abs(scaled - rounded) > 1e-9 * std::max(1.0, scaled)) {
      throw Error(ErrorCode::NonIntegralCost,
                  "cost of " + items[i].id + " is not a multiple of the quantum");
    }
    weight[i] = static_cast<std::uint64_t>(rounded);
  }
  const auto capacity = static_cast<std::uint64_t>(std::floor(budget / options.cost_quantum + 1e-9));
  const std::uint64_t cells = static_cast<std::uint64_t>(items.size()) * (capacity + 1);
  if (cells > options.max_table_cells) {
    throw Error(ErrorCode::InstanceTooLarge, "DP table needs " + std::to_string(cells) + " cells (limit " +
                                                 std::to_string(options.max_table_cells) + ")");
  }

  const std::size_t width = static_cast<std::size_t>(capacity) + 1;
  std::vector<double> best(width, 0.0);
  std::vector<std::uint8_t> take(items.size() * width, 0);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::uint64_t w = weight[i];
    if (w > capacity) continue;
    for (std::size_t c = width; c-- > w;) {
      const double with = best[c - w] + items[i].value;
      if (with > best[c]) {
        best[c] = with;
        take[i * width + c] = 1;
      }
    }
  }

  SelectionResult result;
  result.budget = budget;
  std::vector<std::size_t> chosen;
  std::size_t c = width - 1;
  for (std::size_t i = items.size(); i-- > 0;) {
    if (take[i * width + c]) {
      chosen.push_back(i);
      c -= static_cast<std::size_t>(weight[i]);
    }
  }
  std::reverse(chosen.begin(), chosen.end());
  detail::ExactSum value, cost;
  for (const std::size_t i : chosen) {
    result.selected.push_back(items[i].id);
    value.add(items[i].value);
    cost.add(items[i].cost);
  }
  result.total_value = value.value();
  result.total_cost = cost.value();
  return result;
}

double approximation_gap(std::span<const KnapsackItem> items, double budget, ExactOptions options) {
  const SelectionResult exact = knapsack_exact(items, budget, options);
  const auto ranked = rank_items(items);
  const SelectionResult greedy = greedy_select(ranked, budget, false);
  if (exact.total_value <= 0.0) return 1.0;
  return greedy.total_value / exact.total_value;
}

GapInstance random_gap_instance(std::uint64_t seed, const GapInstanceSpec& spec) {
  Rng rng(seed);
  GapInstance instance;
  double total_cost = 0.0;
  for (int i = 0; i < spec.items; ++i) {
    KnapsackItem item;
    item.id = "I" + std::to_string(i);
    item.value = rng.uniform(spec.value_min, spec.value_max);
    item.cost = static_cast<double>(rng.between(spec.cost_min, spec.cost_max));
    total_cost += item.cost;
    instance.items.push_back(std::move(item));
  }
  instance.budget = std::floor(spec.budget_fraction * total_cost);
  return instance;
}

GapStats summarize_gaps(std::vector<double> ratios) {
  GapStats stats;
  stats.ratios = std::move(ratios);
  if (stats.ratios.empty()) return stats;
  std::vector<double> sorted = stats.ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  stats.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  stats.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  stats.min = sorted.front();
  stats.p05 = sorted[static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(n - 1)))];
  stats.optimal = static_cast<std::size_t>(std::count_if(sorted.begin(), sorted.end(),
                                                         [](double r) { return r >= 1.0 - 1e-12; }));
  return stats;
}

GapStats gap_benchmark(std::size_t instances, std::uint64_t seed, const GapInstanceSpec& spec) {
  std::vector<double> ratios(instances);
  detail::parallel_for(static_cast<long>(instances), [&](long k) {
    const GapInstance inst = random_gap_instance(derive_seed(seed, static_cast<std::uint64_t>(k)), spec);
    ratios[static_cast<std::size_t>(k)] = approximation_gap(inst.items, inst.budget);
  });
  return summarize_gaps(std::move(ratios));
}

}  // namespace lslr
