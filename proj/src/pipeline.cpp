#include "lslr/pipeline.hpp"

#include <unordered_map>

#include "lslr/ingest.hpp"

namespace lslr {

std::vector<LinkRecord> link_records(const std::vector<ChildRecord>& children, const std::vector<Parcel>& parcels) {
  std::vector<LinkRecord> records;
  records.reserve(children.size() + parcels.size());
  for (const auto& c : children) records.push_back({kStudentsDataset, c.child_id, c.raw_address});
  for (const auto& p : parcels) records.push_back({kParcelsDataset, p.parcel_id, p.address});
  return records;
}

ChildParcelJoin join_from_junction(const std::vector<JunctionEntry>& entries) {
  Junction children, parcels;
  for (const auto& e : entries) {
    if (e.source_dataset == kStudentsDataset) children.entries.push_back(e);
    if (e.source_dataset == kParcelsDataset) parcels.entries.push_back(e);
  }
  return children_by_parcel(children, parcels);
}

Snapshot build_snapshot(SnapshotInputs inputs, GeocoderPort& geocoder) {
  check_config(inputs.config);
  Snapshot snap;
  snap.config = inputs.config;

  const auto records = link_records(inputs.children, inputs.parcels);
  snap.junction = build_junction(records, geocoder, inputs.threshold);
  if (!inputs.corrections.empty()) {
    std::set<std::string> known = inputs.place_universe;
    if (known.empty()) {
      for (const auto& e : snap.junction.entries) known.insert(e.place_id);
      for (const auto& u : snap.junction.unmatched) {
        if (u.best) known.insert(u.best->address.place_id);
      }
    }
    snap.junction = apply_corrections(std::move(snap.junction), inputs.corrections, known);
  }
  snap.join = join_from_junction(snap.junction.entries);

  for (auto& p : inputs.parcels) {
    if (const auto* e = snap.junction.find(kParcelsDataset, p.parcel_id)) p.place_id = e->place_id;
  }
  snap.parcels = std::move(inputs.parcels);
  snap.lines = std::move(inputs.lines);
  snap.children = std::move(inputs.children);

  snap.segments = inputs.presegmented ? segments_from_centerlines(inputs.centerlines)
                                      : split_streets(inputs.centerlines, snap.config.max_segment_m);

  std::map<std::string, std::string> child_links;
  for (const auto& [parcel, kids] : snap.join.children_by_parcel) {
    for (const auto& kid : kids) child_links.emplace(kid, parcel);
  }
  snap.report = validate_snapshot(snap.parcels, snap.lines, snap.children, snap.segments, child_links);
  if (!snap.report.usable) return snap;

  snap.assignment = assign_parcels(snap.parcels, snap.segments);
  snap.projects =
      build_projects(snap.segments, snap.assignment, snap.lines, snap.parcels, snap.config.lead_policy);
  const ScoringInputs scoring = make_scoring_inputs(snap.parcels, snap.lines, snap.children,
                                                    snap.join.children_by_parcel, snap.config);
  score_projects(snap.projects, scoring, snap.config);
  return snap;
}

namespace {

template <typename T>
void collect(const LoadResult<T>& result, const std::string& file, std::vector<std::string>& warnings) {
  for (const auto& w : result.warnings) warnings.push_back(file + ": " + w);
  for (const auto& r : result.rejects) {
    warnings.push_back(file + ":" + std::to_string(r.line) + ": rejected " + r.reason + ": " + r.detail);
  }
}

}  // namespace

LoadedInputs load_inputs(const SnapshotPaths& paths) {
  LoadedInputs out;
  const HeaderAliases aliases = paths.aliases ? load_aliases(*paths.aliases) : default_aliases();

  auto students = load_students(paths.students, aliases);
  collect(students, paths.students.string(), out.warnings);
  auto lines = load_service_lines(paths.lines, aliases);
  collect(lines, paths.lines.string(), out.warnings);
  auto parcels = load_parcels(paths.parcels);
  collect(parcels, paths.parcels.string(), out.warnings);
  auto centerlines = load_centerlines(paths.segments);
  collect(centerlines, paths.segments.string(), out.warnings);

  out.inputs.children = std::move(students.records);
  out.inputs.lines = std::move(lines.records);
  out.inputs.parcels = std::move(parcels.records);
  out.inputs.centerlines = std::move(centerlines.records);
  out.inputs.presegmented = paths.presegmented;
  if (paths.corrections) {
    auto corrections = load_corrections(*paths.corrections, aliases);
    collect(corrections, paths.corrections->string(), out.warnings);
    out.inputs.corrections = std::move(corrections.records);
  }
  return out;
}

}  // namespace lslr
