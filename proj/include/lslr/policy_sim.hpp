#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lslr/core.hpp"

namespace lslr {

struct UniformRandom {
  std::uint64_t seed = 0;
};
struct ByLengthExcavated {};
struct ByLeadPerMeter {};
struct WeightedByExposure {
  std::uint64_t seed = 0;
};
struct ByBcr {};
struct ByValue {};

using Policy = std::variant<UniformRandom, ByLengthExcavated, ByLeadPerMeter, WeightedByExposure, ByBcr, ByValue>;

/// uniform_random, by_length, by_lead_per_meter, weighted_by_exposure, by_bcr, by_value
std::string policy_name(const Policy& policy);
/// Throws InvalidArgument for unknown names. The seed is ignored by
/// deterministic policies.
Policy parse_policy(std::string_view name, std::uint64_t seed = 0);
bool is_stochastic(const Policy& policy);
/// Seed of a stochastic policy, 0 otherwise.
std::uint64_t policy_seed(const Policy& policy);
/// Same policy with a different seed (no-op for deterministic policies).
Policy with_seed(const Policy& policy, std::uint64_t seed);

/// First n projects picked by the policy. Deterministic policies sort (ties by
/// project_id); stochastic ones draw n distinct projects from the seed.
/// Weighted draws are proportional to value, renormalized after each draw;
/// zero-value projects are drawn uniformly once positive ones run out.
std::vector<std::size_t> policy_order(const Policy& policy, std::span<const Project> projects, std::size_t n);
std::vector<std::string> policy_ordering(const Policy& policy, std::span<const Project> projects, std::size_t n);

struct StepMetrics {
  double exposure_years = 0.0;
  double children = 0.0;
  double lines = 0.0;
  double cost = 0.0;

  friend bool operator==(const StepMetrics&, const StepMetrics&) = default;
};

struct PolicyRun {
  Policy policy;
  std::size_t iteration = 0;
  std::uint64_t seed = 0;  // seed actually used by this run (0 if deterministic)
  std::vector<std::string> ordering;
  std::vector<StepMetrics> per_step;  // cumulative after steps 1..n
};

struct PolicySimulation {
  Policy policy;
  std::vector<PolicyRun> runs;
  std::vector<StepMetrics> median;  // pointwise across runs
};

/// Cumulative metrics of executing `ordering` one project at a time.
std::vector<StepMetrics> cumulative_metrics(std::span<const Project> projects, std::span<const std::size_t> ordering);

/// Stochastic policies get `iterations` runs seeded derive_seed(policy seed, k);
/// deterministic ones get exactly one. Runs execute in parallel.
std::vector<PolicySimulation> simulate(std::span<const Policy> policies, std::span<const Project> projects,
                                       std::size_t n, std::size_t iterations);

namespace reference {
std::vector<PolicySimulation> simulate(std::span<const Policy> policies, std::span<const Project> projects,
                                       std::size_t n, std::size_t iterations);
}

std::vector<StepMetrics> median_trajectory(std::span<const PolicyRun> runs);

struct CurvePoint {
  std::size_t index = 0;  // 1-based count of top projects
  double fraction = 0.0;
};

/// Fraction of total value held by the top-k projects by value, k = 1..N.
/// Throws ZeroTotalValue when the total is not positive.
std::vector<CurvePoint> cumulative_curve(std::span<const Project> projects);
std::vector<CurvePoint> cumulative_curve(std::span<const double> values);

struct QuantileRow {
  std::size_t index = 0;
  double percent = 0.0;  // rounded to one decimal
  std::string text;      // e.g. "53.0"
};

/// Throws IndexOutOfRange for indices outside 1..N.
std::vector<QuantileRow> quantile_table(std::span<const CurvePoint> curve, std::span<const std::size_t> indices);

/// policy,iteration,step,exposure_years,children,lines,cost
std::string trajectories_csv(std::span<const PolicySimulation> simulations);
nlohmann::json trajectories_json(std::span<const PolicySimulation> simulations, bool include_runs = false);

}  // namespace lslr
