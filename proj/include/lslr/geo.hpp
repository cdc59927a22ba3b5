#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lslr/core.hpp"

namespace lslr::geo {

inline constexpr double kEarthRadiusM = 6371008.8;

/// Great-circle distance on the mean-radius sphere.
double haversine_m(LatLon a, LatLon b);

double polyline_length_m(std::span<const LatLon> points);

struct XY {
  double x = 0.0;
  double y = 0.0;
};

// Equirectangular projection around a reference latitude. City-scale error is
// well under 0.1%, which is all parcel assignment needs.
class LocalProjection {
 public:
  explicit LocalProjection(LatLon origin);

  XY project(LatLon p) const;
  LatLon unproject(XY p) const;

 private:
  LatLon origin_;
  double meters_per_deg_lat_;
  double meters_per_deg_lon_;
};

double distance(XY a, XY b);

/// Distance from p to the closed segment [a, b]. Endpoint clamps return the
/// endpoint distance directly so shared endpoints compare exactly equal.
double point_segment_distance(XY p, XY a, XY b);

double point_polyline_distance_m(LatLon p, std::span<const LatLon> polyline);

/// Proper or touching intersection of closed segments [a,b] and [c,d].
bool segments_intersect(XY a, XY b, XY c, XY d);

/// Intersection point of two non-parallel segments, if any.
std::optional<XY> segment_intersection(XY a, XY b, XY c, XY d);

/// True if any two non-adjacent edges of the polyline touch.
bool self_intersects(std::span<const LatLon> polyline);

/// Sub-polyline between arc-length positions [from_m, to_m], measured in the
/// local projection of the polyline's first point.
std::vector<LatLon> slice_polyline(std::span<const LatLon> polyline, double from_m, double to_m);

/// Area-weighted centroid of a simple ring (first point may or may not repeat
/// at the end). Falls back to the vertex mean for zero-area rings.
LatLon ring_centroid(std::span<const LatLon> ring);

/// Signed area in square meters of a ring in the local projection.
double ring_area_m2(std::span<const LatLon> ring);

}  // namespace lslr::geo
