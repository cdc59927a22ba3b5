#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lslr/core.hpp"

namespace lslr {

struct KnapsackItem {
  std::string id;
  double value = 0.0;
  double cost = 1.0;
};

std::vector<KnapsackItem> to_items(std::span<const Project> projects);

struct RankedProject {
  std::string project_id;
  double value = 0.0;
  double cost = 0.0;
  double bcr = 0.0;
  int rank = 0;  // 1-based
};

/// Sorted by benefit-cost ratio descending, then value descending, then id.
/// Throws ZeroCost if any cost is not positive.
std::vector<RankedProject> rank_items(std::span<const KnapsackItem> items);
std::vector<RankedProject> rank_projects(std::span<const Project> projects);

struct SelectionResult {
  std::vector<std::string> selected;  // whole projects, in selection order
  double total_value = 0.0;
  double total_cost = 0.0;
  double budget = 0.0;
  std::optional<std::pair<std::string, double>> fractional_last;  // id, fraction in (0,1)
};

/// 0/1 mode scans the ranking and takes every project that still fits.
/// Fractional mode takes whole projects until the first that does not fit and
/// then the fraction of it that exhausts the budget; that is the optimum of
/// the linear relaxation.
SelectionResult greedy_select(std::span<const RankedProject> ranked, double budget, bool fractional);

struct ExactOptions {
  double cost_quantum = 1.0;                   // costs must be integer multiples
  std::uint64_t max_table_cells = 1ull << 28;  // items x (capacity + 1)
};

/// Dynamic program over (item, capacity). Throws NonIntegralCost when a cost
/// is not a multiple of the quantum and InstanceTooLarge when the table would
/// exceed max_table_cells.
SelectionResult knapsack_exact(std::span<const KnapsackItem> items, double budget, ExactOptions options = {});

/// greedy 0/1 value over exact value; 1.0 when the exact optimum is 0.
double approximation_gap(std::span<const KnapsackItem> items, double budget, ExactOptions options = {});

// Random instance family for the approximation-gap benchmark: real values
// uniform in [value_min, value_max), integer costs uniform in
// [cost_min, cost_max], budget floor(budget_fraction * total cost).
struct GapInstanceSpec {
  int items = 15;
  double value_min = 1.0;
  double value_max = 100.0;
  int cost_min = 1;
  int cost_max = 100;
  double budget_fraction = 0.5;
};

struct GapInstance {
  std::vector<KnapsackItem> items;
  double budget = 0.0;
};

GapInstance random_gap_instance(std::uint64_t seed, const GapInstanceSpec& spec);

struct GapStats {
  std::vector<double> ratios;  // per instance, in instance order
  double median = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double p05 = 0.0;
  std::size_t optimal = 0;  // instances where greedy matched exact
};

GapStats summarize_gaps(std::vector<double> ratios);

/// Runs `instances` seeded instances in parallel; instance k uses
/// derive_seed(seed, k).
GapStats gap_benchmark(std::size_t instances, std::uint64_t seed, const GapInstanceSpec& spec = {});

namespace reference {
GapStats gap_benchmark(std::size_t instances, std::uint64_t seed, const GapInstanceSpec& spec = {});
}

}  // namespace lslr
