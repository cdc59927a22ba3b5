#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lslr/core.hpp"
#include "lslr/geocoder.hpp"
#include "lslr/linkage.hpp"
#include "lslr/partitioning.hpp"
#include "lslr/scoring.hpp"

namespace lslr {

inline constexpr const char* kStudentsDataset = "students";
inline constexpr const char* kParcelsDataset = "parcels";

struct SnapshotInputs {
  std::vector<Parcel> parcels;
  std::vector<ServiceLine> lines;
  std::vector<ChildRecord> children;
  std::vector<Centerline> centerlines;
  bool presegmented = false;  // use centerlines as segments without splitting
  std::vector<Correction> corrections;
  std::set<std::string> place_universe;  // valid override targets; empty = places seen while linking
  double threshold = kDefaultMatchThreshold;
  PlanConfig config;
};

// Immutable planning snapshot: raw tables, linkage results and scored
// projects.
struct Snapshot {
  std::vector<Parcel> parcels;  // place_id filled from the junction
  std::vector<ServiceLine> lines;
  std::vector<ChildRecord> children;
  std::vector<StreetSegment> segments;
  Junction junction;  // both datasets
  ChildParcelJoin join;
  ParcelAssignment assignment;
  std::vector<Project> projects;  // scored; empty when the report is unusable
  PlanConfig config;
  ValidationReport report;
};

/// Link, partition, validate, score. Projects are left empty when
/// validation finds fatal defects.
Snapshot build_snapshot(SnapshotInputs inputs, GeocoderPort& geocoder);

/// Link records for both datasets, keyed by child_id and parcel_id.
std::vector<LinkRecord> link_records(const std::vector<ChildRecord>& children, const std::vector<Parcel>& parcels);

/// Children and parcel junctions split out of one combined junction.
ChildParcelJoin join_from_junction(const std::vector<JunctionEntry>& entries);

// File locations for a snapshot on disk.
struct SnapshotPaths {
  std::filesystem::path students;
  std::filesystem::path lines;
  std::filesystem::path parcels;
  std::filesystem::path segments;
  std::optional<std::filesystem::path> corrections;
  std::optional<std::filesystem::path> aliases;
  bool presegmented = false;
};

struct LoadedInputs {
  SnapshotInputs inputs;
  std::vector<std::string> warnings;  // rejects and encoding repairs, one per line
};

/// Loads every file; rejected rows become warnings.
LoadedInputs load_inputs(const SnapshotPaths& paths);

}  // namespace lslr
