// Serial twins of the OpenMP kernels. Same math, plain loops; tests and the
// benchmark compare them against the parallel versions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "lslr/geo.hpp"
#include "lslr/linkage.hpp"
#include "lslr/partitioning.hpp"
#include "lslr/prioritization.hpp"
#include "lslr/rng.hpp"
#include "lslr/scoring.hpp"

namespace lslr::reference {

void score_projects(std::span<Project> projects, const ScoringInputs& inputs, const PlanConfig& config) {
  for (Project& p : projects) {
    p.value_exposure_years = project_value(p, inputs, config);
    p.child_count = project_child_count(p, inputs);
    p.cost_units = project_cost_for(p, config);
  }
}

ParcelAssignment assign_parcels(std::span<const Parcel> parcels, std::span<const StreetSegment> segments) {
  ParcelAssignment out;
  for (const Parcel& parcel : parcels) {
    if (segments.empty()) {
      out.flagged.push_back(parcel.parcel_id);
      continue;
    }
    std::string route;
    try {
      route = route_key(normalize_address(parcel.address));
    } catch (const Error&) {
    }
    bool named = false;
    for (const auto& s : segments) named = named || s.street_name == route;

    const StreetSegment* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& s : segments) {
      if (named && s.street_name != route) continue;
      const double d = geo::point_polyline_distance_m(parcel.centroid, s.polyline);
      if (!best || d < best_d || (d == best_d && s.segment_id < best->segment_id)) {
        best = &s;
        best_d = d;
      }
    }
    out.segment_of[parcel.parcel_id] = best->segment_id;
    if (!named) out.flagged.push_back(parcel.parcel_id);
  }
  std::sort(out.flagged.begin(), out.flagged.end());
  return out;
}

GapStats gap_benchmark(std::size_t instances, std::uint64_t seed, const GapInstanceSpec& spec) {
  std::vector<double> ratios;
  ratios.reserve(instances);
  for (std::size_t k = 0; k < instances; ++k) {
    const GapInstance inst = random_gap_instance(derive_seed(seed, k), spec);
    ratios.push_back(approximation_gap(inst.items, inst.budget));
  }
  return summarize_gaps(std::move(ratios));
}

}  // namespace lslr::reference
