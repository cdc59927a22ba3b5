#include "lslr/policy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "format.hpp"
#include "lslr/prioritization.hpp"
#include "lslr/rng.hpp"
#include "parallel.hpp"

namespace lslr {

std::string policy_name(const Policy& policy) {
  struct Visitor {
    std::string operator()(const UniformRandom&) const { return "uniform_random"; }
    std::string operator()(const ByLengthExcavated&) const { return "by_length"; }
    std::string operator()(const ByLeadPerMeter&) const { return "by_lead_per_meter"; }
    std::string operator()(const WeightedByExposure&) const { return "weighted_by_exposure"; }
    std::string operator()(const ByBcr&) const { return "by_bcr"; }
    std::string operator()(const ByValue&) const { return "by_value"; }
  };
  return std::visit(Visitor{}, policy);
}

Policy parse_policy(std::string_view name, std::uint64_t seed) {
  if (name == "uniform_random") return UniformRandom{seed};
  if (name == "by_length" || name == "by_length_excavated") return ByLengthExcavated{};
  if (name == "by_lead_per_meter") return ByLeadPerMeter{};
  if (name == "weighted_by_exposure") return WeightedByExposure{seed};
  if (name == "by_bcr") return ByBcr{};
  if (name == "by_value") return ByValue{};
  throw Error(ErrorCode::InvalidArgument, "unknown policy: " + std::string(name));
}

bool is_stochastic(const Policy& policy) {
  return std::holds_alternative<UniformRandom>(policy) || std::holds_alternative<WeightedByExposure>(policy);
}

std::uint64_t policy_seed(const Policy& policy) {
  if (const auto* u = std::get_if<UniformRandom>(&policy)) return u->seed;
  if (const auto* w = std::get_if<WeightedByExposure>(&policy)) return w->seed;
  return 0;
}

Policy with_seed(const Policy& policy, std::uint64_t seed) {
  if (std::holds_alternative<UniformRandom>(policy)) return UniformRandom{seed};
  if (std::holds_alternative<WeightedByExposure>(policy)) return WeightedByExposure{seed};
  return policy;
}

namespace {

template <typename Key>
std::vector<std::size_t> sorted_desc(std::span<const Project> projects, Key key) {
  std::vector<std::size_t> idx(projects.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double ka = key(projects[a]), kb = key(projects[b]);
    if (ka != kb) return ka > kb;
    return projects[a].project_id < projects[b].project_id;
  });
  return idx;
}

std::vector<std::size_t> uniform_order(std::span<const Project> projects, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> pool(projects.size());
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(pool.size() - k));
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(n);
  return pool;
}

std::vector<std::size_t> weighted_order(std::span<const Project> projects, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> pool(projects.size());
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::size_t> out;
  out.reserve(n);
  auto weight = [&](std::size_t i) { return std::max(0.0, projects[i].value_exposure_years); };
  while (out.size() < n) {
    double total = 0.0;
    for (const std::size_t i : pool) total += weight(i);
    std::size_t slot = 0;
    if (total > 0.0) {
      const double u = rng.uniform01() * total;
      double acc = 0.0;
      std::size_t last_positive = 0;
      bool found = false;
      for (std::size_t s = 0; s < pool.size(); ++s) {
        const double w = weight(pool[s]);
        if (w <= 0.0) continue;
        last_positive = s;
        acc += w;
        if (u < acc) {
          slot = s;
          found = true;
          break;
        }
      }
      if (!found) slot = last_positive;
    } else {
      slot = static_cast<std::size_t>(rng.below(pool.size()));
    }
    out.push_back(pool[slot]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(slot));
  }
  return out;
}

}  // namespace

std::vector<std::size_t> policy_order(const Policy& policy, std::span<const Project> projects, std::size_t n) {
  if (n > projects.size()) {
    throw Error(ErrorCode::NotEnoughProjects, "asked for " + std::to_string(n) + " projects but only " +
                                                  std::to_string(projects.size()) + " exist");
  }
  std::vector<std::size_t> order;
  if (const auto* u = std::get_if<UniformRandom>(&policy)) {
    return uniform_order(projects, n, u->seed);
  } else if (const auto* w = std::get_if<WeightedByExposure>(&policy)) {
    return weighted_order(projects, n, w->seed);
  } else if (std::holds_alternative<ByLengthExcavated>(policy)) {
    order = sorted_desc(projects, [](const Project& p) { return p.length_m; });
  } else if (std::holds_alternative<ByLeadPerMeter>(policy)) {
    order = sorted_desc(projects, [](const Project& p) {
      return p.length_m > 0.0 ? p.lead_line_count / p.length_m : 0.0;
    });
  } else if (std::holds_alternative<ByValue>(policy)) {
    order = sorted_desc(projects, [](const Project& p) { return p.value_exposure_years; });
  } else {
    const auto ranked = rank_projects(projects);
    std::unordered_map<std::string_view, std::size_t> index_of;
    for (std::size_t i = 0; i < projects.size(); ++i) index_of.emplace(projects[i].project_id, i);
    for (const auto& r : ranked) order.push_back(index_of.at(r.project_id));
  }
  order.resize(n);
  return order;
}

std::vector<std::string> policy_ordering(const Policy& policy, std::span<const Project> projects, std::size_t n) {
  std::vector<std::string> ids;
  for (const std::size_t i : policy_order(policy, projects, n)) ids.push_back(projects[i].project_id);
  return ids;
}

std::vector<StepMetrics> cumulative_metrics(std::span<const Project> projects, std::span<const std::size_t> ordering) {
  std::vector<StepMetrics> steps;
  steps.reserve(ordering.size());
  StepMetrics acc;
  for (const std::size_t i : ordering) {
    const Project& p = projects[i];
    acc.exposure_years += p.value_exposure_years;
    acc.children += p.child_count;
    acc.lines += p.lead_line_count;
    acc.cost += p.cost_units;
    steps.push_back(acc);
  }
  return steps;
}

std::vector<StepMetrics> median_trajectory(std::span<const PolicyRun> runs) {
  if (runs.empty()) return {};
  const std::size_t steps = runs.front().per_step.size();
  std::vector<StepMetrics> median(steps);
  std::vector<double> column(runs.size());
  auto med = [&column]() {
    std::sort(column.begin(), column.end());
    const std::size_t m = column.size();
    return m % 2 ? column[m / 2] : 0.5 * (column[m / 2 - 1] + column[m / 2]);
  };
  for (std::size_t s = 0; s < steps; ++s) {
    for (auto field : {&StepMetrics::exposure_years, &StepMetrics::children, &StepMetrics::lines, &StepMetrics::cost}) {
      for (std::size_t r = 0; r < runs.size(); ++r) column[r] = runs[r].per_step[s].*field;
      median[s].*field = med();
    }
  }
  return median;
}

namespace {

struct Job {
  std::size_t policy;
  std::size_t iteration;
};

std::vector<Job> plan_jobs(std::span<const Policy> policies, std::size_t iterations) {
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const std::size_t runs = is_stochastic(policies[p]) ? iterations : 1;
    for (std::size_t k = 0; k < runs; ++k) jobs.push_back({p, k});
  }
  return jobs;
}

PolicyRun run_job(const Job& job, std::span<const Policy> policies, std::span<const Project> projects, std::size_t n) {
  const Policy& base = policies[job.policy];
  PolicyRun run;
  run.policy = base;
  run.iteration = job.iteration;
  Policy effective = base;
  if (is_stochastic(base)) {
    run.seed = derive_seed(policy_seed(base), job.iteration);
    effective = with_seed(base, run.seed);
  }
  const auto order = policy_order(effective, projects, n);
  for (const std::size_t i : order) run.ordering.push_back(projects[i].project_id);
  run.per_step = cumulative_metrics(projects, order);
  return run;
}

std::vector<PolicySimulation> assemble(std::span<const Policy> policies, const std::vector<Job>& jobs,
                                       std::vector<PolicyRun>& runs) {
  std::vector<PolicySimulation> sims(policies.size());
  for (std::size_t p = 0; p < policies.size(); ++p) sims[p].policy = policies[p];
  for (std::size_t j = 0; j < jobs.size(); ++j) sims[jobs[j].policy].runs.push_back(std::move(runs[j]));
  for (auto& sim : sims) sim.median = median_trajectory(sim.runs);
  return sims;
}

}  // namespace

std::vector<PolicySimulation> simulate(std::span<const Policy> policies, std::span<const Project> projects,
                                       std::size_t n, std::size_t iterations) {
  const auto jobs = plan_jobs(policies, iterations);
  if (n > projects.size()) {
    throw Error(ErrorCode::NotEnoughProjects, "asked for " + std::to_string(n) + " projects but only " +
                                                  std::to_string(projects.size()) + " exist");
  }
  std::vector<PolicyRun> runs(jobs.size());
  detail::parallel_for(static_cast<long>(jobs.size()), [&](long j) {
    runs[static_cast<std::size_t>(j)] = run_job(jobs[static_cast<std::size_t>(j)], policies, projects, n);
  });
  return assemble(policies, jobs, runs);
}

namespace reference {

std::vector<PolicySimulation> simulate(std::span<const Policy> policies, std::span<const Project> projects,
                                       std::size_t n, std::size_t iterations) {
  const auto jobs = plan_jobs(policies, iterations);
  std::vector<PolicyRun> runs;
  for (const auto& job : jobs) runs.push_back(run_job(job, policies, projects, n));
  return assemble(policies, jobs, runs);
}

}  // namespace reference

std::vector<CurvePoint> cumulative_curve(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroTotalValue, "total value must be positive");
  std::vector<CurvePoint> curve;
  curve.reserve(sorted.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    acc += sorted[k];
    curve.push_back({k + 1, k + 1 == sorted.size() ? 1.0 : std::min(1.0, acc / total)});
  }
  return curve;
}

std::vector<CurvePoint> cumulative_curve(std::span<const Project> projects) {
  std::vector<double> values;
  values.reserve(projects.size());
  for (const auto& p : projects) values.push_back(p.value_exposure_years);
  return cumulative_curve(values);
}

std::vector<QuantileRow> quantile_table(std::span<const CurvePoint> curve, std::span<const std::size_t> indices) {
  std::vector<QuantileRow> rows;
  for (const std::size_t index : indices) {
    if (index < 1 || index > curve.size()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "index " + std::to_string(index) + " outside 1.." + std::to_string(curve.size()));
    }
    const double percent = 100.0 * curve[index - 1].fraction;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", percent);
    rows.push_back({index, std::stod(buf), buf});
  }
  return rows;
}

std::string trajectories_csv(std::span<const PolicySimulation> simulations) {
  using detail::format_double;
  std::string out = "policy,iteration,step,exposure_years,children,lines,cost\n";
  for (const auto& sim : simulations) {
    for (const auto& run : sim.runs) {
      const std::string prefix = policy_name(sim.policy) + "," + std::to_string(run.iteration) + ",";
      for (std::size_t s = 0; s < run.per_step.size(); ++s) {
        const StepMetrics& m = run.per_step[s];
        out += prefix + std::to_string(s + 1) + "," + format_double(m.exposure_years) + "," +
               format_double(m.children) + "," + format_double(m.lines) + "," + format_double(m.cost) + "\n";
      }
    }
  }
  return out;
}

namespace {

nlohmann::json series(std::span<const StepMetrics> steps) {
  nlohmann::json j;
  for (auto [name, field] : {std::pair{"exposure_years", &StepMetrics::exposure_years},
                             std::pair{"children", &StepMetrics::children}, std::pair{"lines", &StepMetrics::lines},
                             std::pair{"cost", &StepMetrics::cost}}) {
    auto arr = nlohmann::json::array();
    for (const auto& s : steps) arr.push_back(s.*field);
    j[name] = std::move(arr);
  }
  return j;
}

}  // namespace

nlohmann::json trajectories_json(std::span<const PolicySimulation> simulations, bool include_runs) {
  nlohmann::json out;
  out["policies"] = nlohmann::json::array();
  for (const auto& sim : simulations) {
    nlohmann::json p;
    p["policy"] = policy_name(sim.policy);
    p["stochastic"] = is_stochastic(sim.policy);
    p["seed"] = policy_seed(sim.policy);
    p["iterations"] = sim.runs.size();
    p["steps"] = sim.median.size();
    p["median"] = series(sim.median);
    if (include_runs) {
      p["runs"] = nlohmann::json::array();
      for (const auto& run : sim.runs) {
        p["runs"].push_back({{"iteration", run.iteration}, {"seed", run.seed}, {"ordering", run.ordering},
                             {"metrics", series(run.per_step)}});
      }
    }
    out["policies"].push_back(std::move(p));
  }
  return out;
}

}  // namespace lslr
