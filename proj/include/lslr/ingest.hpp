#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lslr/core.hpp"
#include "lslr/linkage.hpp"
#include "lslr/partitioning.hpp"
#include "lslr/prioritization.hpp"

namespace lslr {

/// Whole file as text. Throws FileUnreadable.
std::string read_text_file(const std::filesystem::path& path);
/// Throws FileUnreadable when the file cannot be written.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Replaces invalid UTF-8 sequences with U+FFFD. Returns the number of
/// replacements made.
std::size_t sanitize_utf8(std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// RFC 4180 style: quoted fields, doubled quotes, CRLF or LF. Blank lines are
/// skipped. A leading UTF-8 BOM is dropped.
CsvTable parse_csv(std::string_view text);
std::string csv_field(std::string_view value);
std::string csv_line(std::span<const std::string> fields);

// Maps source column names onto canonical ones, e.g. "student_id" ->
// "child_id". Names are compared lowercased and trimmed.
struct HeaderAliases {
  std::map<std::string, std::string> to_canonical;
};

/// CSV with columns alias,column.
HeaderAliases load_aliases(const std::filesystem::path& path);
HeaderAliases default_aliases();

struct Reject {
  std::size_t line = 0;  // CSV line, or 1-based feature index for GeoJSON
  std::string reason;    // machine tag, e.g. GradeOutOfRange, UnknownMaterial
  std::string detail;
};

template <typename T>
struct LoadResult {
  std::vector<T> records;
  std::vector<Reject> rejects;
  std::vector<std::string> warnings;
  std::size_t rows = 0;  // data rows or features seen
};

// Text parsers (the path loaders read the file and call these).
LoadResult<ChildRecord> parse_students(std::string text, const HeaderAliases& aliases = default_aliases());
LoadResult<ServiceLine> parse_service_lines(std::string text, const HeaderAliases& aliases = default_aliases());
LoadResult<Correction> parse_corrections(std::string text, const HeaderAliases& aliases = default_aliases());
LoadResult<Centerline> parse_centerlines(std::string text);
LoadResult<StreetSegment> parse_segments(std::string text);
LoadResult<Parcel> parse_parcels(std::string text);

/// child_id,grade,address[,age]. Throws FileUnreadable, HeaderMismatch.
LoadResult<ChildRecord> load_students(const std::filesystem::path& path,
                                      const HeaderAliases& aliases = default_aliases());
/// parcel_id,public_material,private_material[,lead_probability].
LoadResult<ServiceLine> load_service_lines(const std::filesystem::path& path,
                                           const HeaderAliases& aliases = default_aliases());
/// dataset,source_key,place_id.
LoadResult<Correction> load_corrections(const std::filesystem::path& path,
                                        const HeaderAliases& aliases = default_aliases());
/// LineString features with a street name. Throws NotAFeatureCollection.
LoadResult<Centerline> load_centerlines(const std::filesystem::path& path);
LoadResult<StreetSegment> load_segments(const std::filesystem::path& path);
/// Point or Polygon features (polygons reduce to their area centroid) with
/// parcel_id and address properties.
LoadResult<Parcel> load_parcels(const std::filesystem::path& path);

std::string write_students_csv(std::span<const ChildRecord> children);
std::string write_service_lines_csv(std::span<const ServiceLine> lines);
std::string write_corrections_csv(std::span<const Correction> corrections);
nlohmann::json centerlines_geojson(std::span<const Centerline> centerlines);
nlohmann::json segments_geojson(std::span<const StreetSegment> segments);
nlohmann::json parcels_geojson(std::span<const Parcel> parcels);

// Junction table files written by `link`.
std::string write_junction_csv(const Junction& junction);
std::string write_unmatched_csv(const Junction& junction);
/// Reads junction.csv back. Throws HeaderMismatch.
std::vector<JunctionEntry> parse_junction_csv(std::string text);

nlohmann::json gazetteer_json(std::span<const GeoAddress> gazetteer);
std::vector<GeoAddress> parse_gazetteer(const nlohmann::json& j);
std::vector<GeoAddress> load_gazetteer(const std::filesystem::path& path);

/// Counts indexed [private][public] in kAllMaterials order.
using MaterialPivot = std::array<std::array<long, 7>, 7>;
MaterialPivot material_pivot(std::span<const ServiceLine> lines);
std::string material_pivot_csv(const MaterialPivot& pivot);

// Stage handoff files.
nlohmann::json projects_geojson(std::span<const Project> projects, std::span<const StreetSegment> segments);
struct ProjectGeometry {
  std::vector<Project> projects;
  std::vector<StreetSegment> segments;  // one per project, same order
};
ProjectGeometry parse_projects_geojson(const nlohmann::json& j);

/// project_id,segment_id,street_name,length_m,lead_line_count,child_count,value,cost,parcel_ids
std::string write_projects_scored_csv(std::span<const Project> projects);
std::vector<Project> parse_projects_scored_csv(std::string text);

/// rank,project_id,value,cost,bcr,cumulative_cost,cumulative_value
std::string write_ranked_csv(std::span<const RankedProject> ranked);

}  // namespace lslr
