#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library code it is checking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lslr/core.hpp"
#include "lslr/linkage.hpp"

namespace oracle {

struct Item {
  double value;
  double cost;
};

// Best 0/1 value by trying every subset. Subset sums are accumulated in long
// double, which is exact while values span fewer than 64 bits (e.g. at most
// 15 values in [1, 100) with 52-bit fractions); the optimum is then rounded
// once to double.
inline double enumerate_knapsack(const std::vector<Item>& items, double budget) {
  const std::size_t n = items.size();
  long double best = 0.0L;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    long double v = 0.0L, c = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        v += items[i].value;
        c += items[i].cost;
      }
    }
    if (c <= budget && v > best) best = v;
  }
  return static_cast<double>(best);
}

// LP relaxation optimum via its dual:
//   min over lambda >= 0 of  lambda * W + sum_i max(0, v_i - lambda * c_i).
// The dual is convex piecewise linear with breakpoints at v_i / c_i, so the
// minimum sits at lambda = 0 or one of them.
inline double lp_relaxation(const std::vector<Item>& items, double budget) {
  std::vector<double> lambdas{0.0};
  for (const auto& it : items) lambdas.push_back(it.value / it.cost);
  double best = std::numeric_limits<double>::infinity();
  for (const double l : lambdas) {
    double d = l * budget;
    for (const auto& it : items) d += std::max(0.0, it.value - l * it.cost);
    best = std::min(best, d);
  }
  return best;
}

inline double exposure(double age, double leave, std::optional<double> cap) {
  double t = leave - age;
  if (t < 0) t = 0;
  if (cap && t > *cap) t = *cap;
  return t;
}

inline double unknown_side(const lslr::LeadStatusPolicy& policy, const lslr::ServiceLine& line,
                           const lslr::Parcel& parcel) {
  if (auto* y = std::get_if<lslr::AssumeLeadBuiltBefore>(&policy)) {
    return parcel.year_built.has_value() && *parcel.year_built < y->year ? 1.0 : 0.0;
  }
  if (auto* f = std::get_if<lslr::FixedUnknownWeight>(&policy)) return f->weight;
  if (std::holds_alternative<lslr::ConservativeAllUnknownLead>(policy)) return 1.0;
  return line.lead_probability.value();
}

inline double side(lslr::PipeMaterial m, const lslr::LeadStatusPolicy& policy, const lslr::ServiceLine& line,
                   const lslr::Parcel& parcel) {
  if (m == lslr::PipeMaterial::lead) return 1.0;
  if (m == lslr::PipeMaterial::unknown) return unknown_side(policy, line, parcel);
  return 0.0;
}

// Children per parcel by comparing every child link with every parcel link.
inline std::map<std::string, std::set<std::string>> nested_loop_join(
    const std::vector<lslr::JunctionEntry>& children, const std::vector<lslr::JunctionEntry>& parcels) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& c : children) {
    for (const auto& p : parcels) {
      if (c.place_id == p.place_id) out[p.source_key].insert(c.source_key);
    }
  }
  return out;
}

// Exposure-years value per project straight from the raw tables: children
// joined to parcels through the junction, ages from age or grade + offset.
// Parcels and children are visited in id order.
inline std::map<std::string, double> project_values(const std::vector<lslr::Project>& projects,
                                                    const std::vector<lslr::Parcel>& parcels,
                                                    const std::vector<lslr::ServiceLine>& lines,
                                                    const std::vector<lslr::ChildRecord>& children,
                                                    const std::vector<lslr::JunctionEntry>& junction,
                                                    const lslr::PlanConfig& config) {
  std::map<std::string, std::string> child_place, parcel_place;
  for (const auto& e : junction) {
    if (e.source_dataset == "students") child_place[e.source_key] = e.place_id;
    if (e.source_dataset == "parcels") parcel_place[e.source_key] = e.place_id;
  }
  std::map<std::string, const lslr::ChildRecord*> child_by_id;
  for (const auto& c : children) child_by_id[c.child_id] = &c;

  std::map<std::string, double> out;
  for (const auto& project : projects) {
    std::vector<std::string> ids(project.parcel_ids.begin(), project.parcel_ids.end());
    std::sort(ids.begin(), ids.end());
    double v = 0.0;
    for (const auto& pid : ids) {
      const lslr::Parcel* parcel = nullptr;
      for (const auto& p : parcels) {
        if (p.parcel_id == pid) parcel = &p;
      }
      const lslr::ServiceLine* line = nullptr;
      for (const auto& l : lines) {
        if (l.parcel_id == pid) line = &l;
      }
      if (!parcel || !line) continue;
      const double w = std::max(side(line->public_material, config.lead_policy, *line, *parcel),
                                side(line->private_material, config.lead_policy, *line, *parcel));
      if (w <= 0) continue;
      auto pp = parcel_place.find(pid);
      if (pp == parcel_place.end()) continue;
      for (const auto& [cid, child] : child_by_id) {
        auto cp = child_place.find(cid);
        if (cp == child_place.end() || cp->second != pp->second) continue;
        const double age = child->age_years ? *child->age_years : *child->grade + config.grade_age_offset;
        v += w * exposure(age, config.leave_home_age, config.horizon_cap_years);
      }
    }
    out[project.project_id] = v;
  }
  return out;
}

// Lead-weighted sides counted over the whole lines table.
inline int count_lead_sides(const std::vector<lslr::ServiceLine>& lines, const std::vector<lslr::Parcel>& parcels,
                            const lslr::LeadStatusPolicy& policy, const std::set<std::string>& restrict_to) {
  int n = 0;
  for (const auto& l : lines) {
    if (!restrict_to.count(l.parcel_id)) continue;
    const lslr::Parcel* parcel = nullptr;
    for (const auto& p : parcels) {
      if (p.parcel_id == l.parcel_id) parcel = &p;
    }
    if (!parcel) continue;
    n += side(l.public_material, policy, l, *parcel) > 0;
    n += side(l.private_material, policy, l, *parcel) > 0;
  }
  return n;
}

// Distance in meters from p to a polyline, equirectangular around p.
inline double point_polyline_m(lslr::LatLon p, const std::vector<lslr::LatLon>& line) {
  constexpr double kR = 6371008.8, kDeg = 3.14159265358979323846 / 180.0;
  const double kx = kR * kDeg * std::cos(p.lat * kDeg), ky = kR * kDeg;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const double ax = (line[i].lon - p.lon) * kx, ay = (line[i].lat - p.lat) * ky;
    const double bx = (line[i + 1].lon - p.lon) * kx, by = (line[i + 1].lat - p.lat) * ky;
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? -(ax * dx + ay * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::hypot(ax + t * dx, ay + t * dy));
  }
  return best;
}

// Area-weighted polygon centroid, shoelace formula in degrees scaled to a
// local plane.
inline lslr::LatLon shoelace_centroid(std::vector<lslr::LatLon> ring) {
  if (ring.front() == ring.back()) ring.pop_back();
  const double lat0 = ring[0].lat, lon0 = ring[0].lon;
  const double kx = std::cos(lat0 * 3.14159265358979323846 / 180.0);
  double a = 0, cx = 0, cy = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& p = ring[i];
    const auto& q = ring[(i + 1) % ring.size()];
    const double x0 = (p.lon - lon0) * kx, y0 = p.lat - lat0, x1 = (q.lon - lon0) * kx, y1 = q.lat - lat0;
    const double cross = x0 * y1 - x1 * y0;
    a += cross;
    cx += (x0 + x1) * cross;
    cy += (y0 + y1) * cross;
  }
  a *= 0.5;
  return {lat0 + cy / (6 * a), lon0 + cx / (6 * a) / kx};
}

}  // namespace oracle
