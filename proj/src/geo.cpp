#include "lslr/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lslr::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double cross(XY o, XY a, XY b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(XY p, XY a, XY b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double haversine_m(LatLon a, LatLon b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s = std::sin(dphi / 2.0);
  const double t = std::sin(dlambda / 2.0);
  const double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double polyline_length_m(std::span<const LatLon> points) {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += haversine_m(points[i - 1], points[i]);
  return total;
}

LocalProjection::LocalProjection(LatLon origin)
    : origin_(origin),
      meters_per_deg_lat_(kEarthRadiusM * kDegToRad),
      meters_per_deg_lon_(kEarthRadiusM * kDegToRad * std::cos(origin.lat * kDegToRad)) {}

XY LocalProjection::project(LatLon p) const {
  return {(p.lon - origin_.lon) * meters_per_deg_lon_, (p.lat - origin_.lat) * meters_per_deg_lat_};
}

LatLon LocalProjection::unproject(XY p) const {
  return {origin_.lat + p.y / meters_per_deg_lat_, origin_.lon + p.x / meters_per_deg_lon_};
}

double distance(XY a, XY b) { return std::hypot(a.x - b.x, a.y - b.y); }

double point_segment_distance(XY p, XY a, XY b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, a);
  const double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  if (t <= 0.0) return distance(p, a);
  if (t >= 1.0) return distance(p, b);
  return distance(p, XY{a.x + t * dx, a.y + t * dy});
}

double point_polyline_distance_m(LatLon p, std::span<const LatLon> polyline) {
  const LocalProjection proj(p);
  const XY q = proj.project(p);
  if (polyline.size() == 1) return distance(q, proj.project(polyline[0]));
  double best = INFINITY;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    best = std::min(best,
                    point_segment_distance(q, proj.project(polyline[i - 1]), proj.project(polyline[i])));
  }
  return best;
}

bool segments_intersect(XY a, XY b, XY c, XY d) {
  const int d1 = sign(cross(c, d, a));
  const int d2 = sign(cross(c, d, b));
  const int d3 = sign(cross(a, b, c));
  const int d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(a, c, d)) return true;
  if (d2 == 0 && on_segment(b, c, d)) return true;
  if (d3 == 0 && on_segment(c, a, b)) return true;
  if (d4 == 0 && on_segment(d, a, b)) return true;
  return false;
}

std::optional<XY> segment_intersection(XY a, XY b, XY c, XY d) {
  const double rx = b.x - a.x, ry = b.y - a.y;
  const double sx = d.x - c.x, sy = d.y - c.y;
  const double denom = rx * sy - ry * sx;
  if (denom == 0.0) return std::nullopt;
  const double t = ((c.x - a.x) * sy - (c.y - a.y) * sx) / denom;
  const double u = ((c.x - a.x) * ry - (c.y - a.y) * rx) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return XY{a.x + t * rx, a.y + t * ry};
}

bool self_intersects(std::span<const LatLon> polyline) {
  if (polyline.size() < 4) return false;
  const LocalProjection proj(polyline.front());
  std::vector<XY> pts;
  pts.reserve(polyline.size());
  for (const auto& p : polyline) pts.push_back(proj.project(p));
  const std::size_t edges = pts.size() - 1;
  const bool closed = distance(pts.front(), pts.back()) == 0.0;
  for (std::size_t i = 0; i < edges; ++i) {
    for (std::size_t j = i + 2; j < edges; ++j) {
      if (closed && i == 0 && j == edges - 1) continue;
      if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
    }
  }
  return false;
}

std::vector<LatLon> slice_polyline(std::span<const LatLon> polyline, double from_m, double to_m) {
  std::vector<LatLon> out;
  if (polyline.empty()) return out;
  const LocalProjection proj(polyline.front());
  double walked = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const XY a = proj.project(polyline[i - 1]);
    const XY b = proj.project(polyline[i]);
    const double len = distance(a, b);
    const double start = walked;
    const double end = walked + len;
    walked = end;
    if (len == 0.0 || end < from_m || start > to_m) continue;
    auto at = [&](double s) {
      const double t = std::clamp((s - start) / len, 0.0, 1.0);
      if (t == 0.0) return polyline[i - 1];
      if (t == 1.0) return polyline[i];
      return proj.unproject(XY{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    };
    if (out.empty()) out.push_back(at(std::max(from_m, start)));
    if (end <= to_m) {
      out.push_back(polyline[i]);
    } else {
      out.push_back(at(to_m));
      break;
    }
  }
  if (out.size() == 1) out.push_back(out.front());
  return out;
}

double ring_area_m2(std::span<const LatLon> ring) {
  if (ring.size() < 3) return 0.0;
  const LocalProjection proj(ring.front());
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const XY p = proj.project(ring[i]);
    const XY q = proj.project(ring[(i + 1) % ring.size()]);
    twice += p.x * q.y - q.x * p.y;
  }
  return twice / 2.0;
}

LatLon ring_centroid(std::span<const LatLon> ring) {
  if (ring.empty()) return {};
  std::size_t n = ring.size();
  if (n > 1 && ring.front() == ring.back()) --n;
  const LocalProjection proj(ring.front());
  double twice_area = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const XY p = proj.project(ring[i]);
    const XY q = proj.project(ring[(i + 1) % n]);
    const double w = p.x * q.y - q.x * p.y;
    twice_area += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  if (twice_area == 0.0) {
    XY mean;
    for (std::size_t i = 0; i < n; ++i) {
      const XY p = proj.project(ring[i]);
      mean.x += p.x / static_cast<double>(n);
      mean.y += p.y / static_cast<double>(n);
    }
    return proj.unproject(mean);
  }
  return proj.unproject(XY{cx / (3.0 * twice_area), cy / (3.0 * twice_area)});
}

}  // namespace lslr::geo
