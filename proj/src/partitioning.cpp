#include "lslr/partitioning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

#include "lslr/geo.hpp"
#include "lslr/linkage.hpp"
#include "lslr/scoring.hpp"
#include "parallel.hpp"

namespace lslr {

namespace {

std::string segment_id(std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "S%06zu", index);
  return buf;
}

struct Box {
  double min_lat, min_lon, max_lat, max_lon;
};

Box bounds(std::span<const LatLon> pts, double margin_deg) {
  Box b{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const auto& p : pts) {
    b.min_lat = std::min(b.min_lat, p.lat);
    b.max_lat = std::max(b.max_lat, p.lat);
    b.min_lon = std::min(b.min_lon, p.lon);
    b.max_lon = std::max(b.max_lon, p.lon);
  }
  b.min_lat -= margin_deg;
  b.min_lon -= margin_deg;
  b.max_lat += margin_deg;
  b.max_lon += margin_deg;
  return b;
}

bool overlaps(const Box& a, const Box& b) {
  return a.min_lat <= b.max_lat && b.min_lat <= a.max_lat && a.min_lon <= b.max_lon && b.min_lon <= a.max_lon;
}

// Arc-length positions along line `i` where another line meets it.
std::vector<double> cut_positions(const Centerline& line, std::span<const Centerline> others, std::size_t self,
                                  const std::vector<Box>& boxes, double snap_m) {
  const geo::LocalProjection proj(line.polyline.front());
  std::vector<geo::XY> pts;
  std::vector<double> arc{0.0};
  for (const auto& p : line.polyline) pts.push_back(proj.project(p));
  for (std::size_t k = 1; k < pts.size(); ++k) arc.push_back(arc.back() + geo::distance(pts[k - 1], pts[k]));

  auto position_of = [&](std::size_t edge, geo::XY q) {
    const geo::XY a = pts[edge], b = pts[edge + 1];
    const double len = geo::distance(a, b);
    if (len == 0.0) return arc[edge];
    const double t = std::clamp(((q.x - a.x) * (b.x - a.x) + (q.y - a.y) * (b.y - a.y)) / (len * len), 0.0, 1.0);
    return arc[edge] + t * len;
  };

  std::vector<double> cuts;
  for (std::size_t j = 0; j < others.size(); ++j) {
    if (j == self || !overlaps(boxes[self], boxes[j])) continue;
    std::vector<geo::XY> other;
    for (const auto& p : others[j].polyline) other.push_back(proj.project(p));
    for (std::size_t e = 0; e + 1 < pts.size(); ++e) {
      for (const auto& v : other) {
        if (geo::point_segment_distance(v, pts[e], pts[e + 1]) <= snap_m) cuts.push_back(position_of(e, v));
      }
      for (std::size_t f = 0; f + 1 < other.size(); ++f) {
        if (auto x = geo::segment_intersection(pts[e], pts[e + 1], other[f], other[f + 1])) {
          cuts.push_back(position_of(e, *x));
        }
      }
    }
  }
  return cuts;
}

void check_centerline(const Centerline& line, std::size_t index) {
  auto fail = [&](const char* why) {
    throw Error(ErrorCode::DegenerateGeometry,
                "centerline " + std::to_string(index) + " (" + line.street_name + "): " + why);
  };
  if (line.polyline.size() < 2) fail("fewer than two points");
  if (!(geo::polyline_length_m(line.polyline) > 0.0)) fail("zero length");
  if (geo::self_intersects(line.polyline)) fail("self-intersecting");
}

}  // namespace

std::vector<StreetSegment> split_streets(std::span<const Centerline> centerlines, double max_len_m, double snap_m) {
  if (!(max_len_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "max segment length must be > 0");
  for (std::size_t i = 0; i < centerlines.size(); ++i) check_centerline(centerlines[i], i);

  const double margin_deg = snap_m / 100000.0 + 1e-6;
  std::vector<Box> boxes;
  for (const auto& c : centerlines) boxes.push_back(bounds(c.polyline, margin_deg));

  std::vector<std::vector<double>> cuts(centerlines.size());
  detail::parallel_for(static_cast<long>(centerlines.size()), [&](long i) {
    const auto k = static_cast<std::size_t>(i);
    cuts[k] = cut_positions(centerlines[k], centerlines, k, boxes, snap_m);
  });

  std::vector<StreetSegment> segments;
  for (std::size_t i = 0; i < centerlines.size(); ++i) {
    const Centerline& line = centerlines[i];
    const std::string name = normalize_street_name(line.street_name);
    const geo::LocalProjection proj(line.polyline.front());
    double total = 0.0;
    for (std::size_t k = 1; k < line.polyline.size(); ++k) {
      total += geo::distance(proj.project(line.polyline[k - 1]), proj.project(line.polyline[k]));
    }

    std::vector<double> stops{0.0};
    auto& c = cuts[i];
    std::sort(c.begin(), c.end());
    for (const double pos : c) {
      if (pos - stops.back() > snap_m && total - pos > snap_m) stops.push_back(pos);
    }
    stops.push_back(total);

    for (std::size_t s = 1; s < stops.size(); ++s) {
      const double from = stops[s - 1], to = stops[s];
      auto parts = static_cast<std::size_t>(std::max(1.0, std::ceil((to - from) / max_len_m - 1e-9)));
      std::vector<StreetSegment> pieces;
      for (;; ++parts) {
        pieces.clear();
        bool fits = true;
        for (std::size_t p = 0; p < parts; ++p) {
          const double a = from + (to - from) * static_cast<double>(p) / static_cast<double>(parts);
          const double b = p + 1 == parts ? to : from + (to - from) * static_cast<double>(p + 1) / static_cast<double>(parts);
          StreetSegment seg;
          seg.polyline = geo::slice_polyline(line.polyline, a, b);
          seg.length_m = geo::polyline_length_m(seg.polyline);
          seg.street_name = name;
          fits = fits && seg.length_m <= max_len_m * (1.0 + 1e-9);
          pieces.push_back(std::move(seg));
        }
        if (fits) break;
      }
      for (auto& seg : pieces) {
        seg.segment_id = segment_id(segments.size());
        segments.push_back(std::move(seg));
      }
    }
  }
  return segments;
}

std::vector<StreetSegment> segments_from_centerlines(std::span<const Centerline> centerlines) {
  std::vector<StreetSegment> segments;
  for (std::size_t i = 0; i < centerlines.size(); ++i) {
    check_centerline(centerlines[i], i);
    StreetSegment seg;
    seg.segment_id = segment_id(i);
    seg.polyline = centerlines[i].polyline;
    seg.length_m = geo::polyline_length_m(seg.polyline);
    seg.street_name = normalize_street_name(centerlines[i].street_name);
    segments.push_back(std::move(seg));
  }
  return segments;
}

namespace {

std::string parcel_route(const Parcel& parcel) {
  try {
    return route_key(normalize_address(parcel.address));
  } catch (const Error&) {
    return {};
  }
}

struct Nearest {
  std::size_t index = std::numeric_limits<std::size_t>::max();
  double distance = INFINITY;

  void offer(std::size_t candidate, double d, std::span<const StreetSegment> segments) {
    const bool unset = index == std::numeric_limits<std::size_t>::max();
    if (unset || d < distance ||
        (d == distance && segments[candidate].segment_id < segments[index].segment_id)) {
      index = candidate;
      distance = d;
    }
  }
};

}  // namespace

ParcelAssignment assign_parcels(std::span<const Parcel> parcels, std::span<const StreetSegment> segments) {
  ParcelAssignment out;
  if (segments.empty()) {
    for (const auto& p : parcels) out.flagged.push_back(p.parcel_id);
    std::sort(out.flagged.begin(), out.flagged.end());
    return out;
  }

  std::unordered_map<std::string, std::vector<std::size_t>> by_name;
  for (std::size_t s = 0; s < segments.size(); ++s) by_name[segments[s].street_name].push_back(s);

  struct Result {
    std::size_t segment;
    bool flagged;
  };
  std::vector<Result> results(parcels.size());
  detail::parallel_for(static_cast<long>(parcels.size()), [&](long i) {
    const Parcel& parcel = parcels[static_cast<std::size_t>(i)];
    Nearest best;
    auto it = by_name.find(parcel_route(parcel));
    const bool named = it != by_name.end();
    if (named) {
      for (const std::size_t s : it->second) {
        best.offer(s, geo::point_polyline_distance_m(parcel.centroid, segments[s].polyline), segments);
      }
    } else {
      for (std::size_t s = 0; s < segments.size(); ++s) {
        best.offer(s, geo::point_polyline_distance_m(parcel.centroid, segments[s].polyline), segments);
      }
    }
    results[static_cast<std::size_t>(i)] = {best.index, !named};
  });

  for (std::size_t i = 0; i < parcels.size(); ++i) {
    out.segment_of[parcels[i].parcel_id] = segments[results[i].segment].segment_id;
    if (results[i].flagged) out.flagged.push_back(parcels[i].parcel_id);
  }
  std::sort(out.flagged.begin(), out.flagged.end());
  return out;
}

std::vector<Project> build_projects(std::span<const StreetSegment> segments, const ParcelAssignment& assignment,
                                    std::span<const ServiceLine> lines, std::span<const Parcel> parcels,
                                    const LeadStatusPolicy& policy) {
  std::unordered_map<std::string_view, const Parcel*> parcel_by_id;
  for (const auto& p : parcels) parcel_by_id.emplace(p.parcel_id, &p);
  std::unordered_map<std::string_view, const ServiceLine*> line_by_parcel;
  for (const auto& l : lines) line_by_parcel.emplace(l.parcel_id, &l);

  std::unordered_map<std::string_view, std::vector<std::string>> parcels_of_segment;
  for (const auto& [parcel_id, seg_id] : assignment.segment_of) parcels_of_segment[seg_id].push_back(parcel_id);

  std::vector<Project> projects;
  for (const auto& seg : segments) {
    auto members = parcels_of_segment.find(seg.segment_id);
    if (members == parcels_of_segment.end()) continue;
    int sides = 0;
    for (const auto& parcel_id : members->second) {
      auto line = line_by_parcel.find(parcel_id);
      auto parcel = parcel_by_id.find(parcel_id);
      if (line == line_by_parcel.end() || parcel == parcel_by_id.end()) continue;
      sides += lead_weight(*line->second, *parcel->second, policy).lead_sides();
    }
    if (sides == 0) continue;
    Project p;
    p.project_id = seg.segment_id;
    p.segment_id = seg.segment_id;
    p.street_name = seg.street_name;
    p.length_m = seg.length_m;
    p.parcel_ids = members->second;  // already sorted: map iteration order
    p.lead_line_count = sides;
    projects.push_back(std::move(p));
  }
  return projects;
}

}  // namespace lslr
