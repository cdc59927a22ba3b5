#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lslr {

enum class ErrorCode {
  EmptyAddress,
  GeocoderUnavailable,
  UnknownPlaceId,
  DegenerateGeometry,
  GradeOutOfRange,
  NegativeAge,
  MissingProbability,
  ZeroCost,
  InstanceTooLarge,
  NonIntegralCost,
  NotEnoughProjects,
  ZeroTotalValue,
  IndexOutOfRange,
  FileUnreadable,
  HeaderMismatch,
  NotAFeatureCollection,
  StoreUnavailable,
  InvalidArgument,
};

std::string_view error_name(ErrorCode code);

// Every failure raised by the library carries a machine-readable code so the
// CLI and the HTTP service can report it in one line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

// Canonical geocoded place.
struct GeoAddress {
  std::string place_id;
  LatLon point;
  std::string street_number;
  std::string route;
  std::string locality;
  std::string postal_code;
  std::string formatted;

  friend bool operator==(const GeoAddress&, const GeoAddress&) = default;
};

struct MatchCandidate {
  GeoAddress address;
  double probability = 0.0;

  friend bool operator==(const MatchCandidate&, const MatchCandidate&) = default;
};

enum class PipeMaterial { brass, iron, copper, lead, pvc, steel, unknown };

inline constexpr PipeMaterial kAllMaterials[] = {
    PipeMaterial::brass, PipeMaterial::iron,  PipeMaterial::copper, PipeMaterial::lead,
    PipeMaterial::pvc,   PipeMaterial::steel, PipeMaterial::unknown};

std::string_view to_string(PipeMaterial material);

/// Case-insensitive, surrounding whitespace ignored. Anything outside the
/// closed set yields nullopt.
std::optional<PipeMaterial> parse_material(std::string_view text);

struct ServiceLine {
  std::string parcel_id;
  PipeMaterial public_material = PipeMaterial::unknown;
  PipeMaterial private_material = PipeMaterial::unknown;
  std::optional<double> lead_probability;
};

struct Parcel {
  std::string parcel_id;
  std::string address;   // mailing address text as found in the source
  std::string place_id;  // filled in by record linkage; empty when unlinked
  LatLon centroid;
  std::optional<int> year_built;
};

struct ChildRecord {
  std::string child_id;
  std::optional<int> grade;  // 0 = kindergarten
  std::optional<double> age_years;
  std::string raw_address;
};

struct StreetSegment {
  std::string segment_id;
  std::vector<LatLon> polyline;
  double length_m = 0.0;
  std::string street_name;  // normalized
};

struct Project {
  std::string project_id;
  std::string segment_id;
  std::string street_name;
  double length_m = 0.0;
  std::vector<std::string> parcel_ids;  // sorted
  double value_exposure_years = 0.0;
  double cost_units = 1.0;
  int lead_line_count = 0;
  int child_count = 0;  // children at lead-weighted parcels
};

struct AssumeLeadBuiltBefore {
  int year = 1950;
};
struct FixedUnknownWeight {
  double weight = 0.5;
};
struct ConservativeAllUnknownLead {};
struct UseProbabilityField {};

using LeadStatusPolicy = std::variant<AssumeLeadBuiltBefore, FixedUnknownWeight,
                                      ConservativeAllUnknownLead, UseProbabilityField>;

/// Accepts "year:<YYYY>", "fixed[:<w>]", "conservative", "probability".
LeadStatusPolicy parse_lead_policy(std::string_view text);
std::string to_string(const LeadStatusPolicy& policy);

enum class CostModel { per_line, street_length };

struct PlanConfig {
  double budget = 0.0;
  double per_line_cost = 1.0;
  double fixed_cost = 0.0;
  double leave_home_age = 18.0;
  std::optional<double> horizon_cap_years;
  LeadStatusPolicy lead_policy = ConservativeAllUnknownLead{};
  double max_segment_m = 150.0;
  double grade_age_offset = 5.5;
  CostModel cost_model = CostModel::per_line;
};

/// Throws InvalidArgument when a field violates its range.
void check_config(const PlanConfig& config);

enum class Severity { fatal, warning };

struct Defect {
  Severity severity = Severity::fatal;
  std::string kind;  // dangling_reference, duplicate_key, out_of_range, ...
  std::string key;
  std::string message;
};

struct ValidationReport {
  std::vector<Defect> defects;
  bool usable = true;

  std::size_t fatal_count() const;
};

/// Child-to-parcel links are optional; pass the resolved map when available
/// so dangling child references are caught too.
ValidationReport validate_snapshot(
    const std::vector<Parcel>& parcels, const std::vector<ServiceLine>& lines,
    const std::vector<ChildRecord>& children, const std::vector<StreetSegment>& segments,
    const std::map<std::string, std::string>& child_parcel_links = {});

}  // namespace lslr
