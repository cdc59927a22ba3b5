#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "lslr/core.hpp"

namespace lslr {

struct Centerline {
  std::string street_name;
  std::vector<LatLon> polyline;
};

inline constexpr double kSnapToleranceM = 0.5;

/// Cuts centerlines at intersections (shared vertices, endpoints touching
/// another line, and proper crossings, all within `snap_m`), then splits any
/// piece longer than `max_len_m` into equal parts. Segment ids are "S" plus a
/// zero-padded running index in input order.
std::vector<StreetSegment> split_streets(std::span<const Centerline> centerlines, double max_len_m,
                                         double snap_m = kSnapToleranceM);

/// Uses already-split centerlines as segments, one per input line.
std::vector<StreetSegment> segments_from_centerlines(std::span<const Centerline> centerlines);

struct ParcelAssignment {
  std::map<std::string, std::string> segment_of;  // parcel_id -> segment_id
  std::vector<std::string> flagged;               // no segment on the parcel's street; sorted
};

/// Each parcel goes to the closest segment carrying its street name, ties to
/// the lower segment_id. Parcels whose street has no segment fall back to the
/// nearest segment overall and are flagged. Parallel over parcels.
ParcelAssignment assign_parcels(std::span<const Parcel> parcels, std::span<const StreetSegment> segments);

/// One project per segment holding at least one lead-weighted side under the
/// policy. lead_line_count counts lead-weighted sides, so a parcel lead on
/// both sides contributes two.
std::vector<Project> build_projects(std::span<const StreetSegment> segments, const ParcelAssignment& assignment,
                                    std::span<const ServiceLine> lines, std::span<const Parcel> parcels,
                                    const LeadStatusPolicy& policy);

namespace reference {
ParcelAssignment assign_parcels(std::span<const Parcel> parcels, std::span<const StreetSegment> segments);
}

}  // namespace lslr
