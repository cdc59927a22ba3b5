#include "lslr/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "lslr/geo.hpp"

namespace lslr {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyAddress: return "EmptyAddress";
    case ErrorCode::GeocoderUnavailable: return "GeocoderUnavailable";
    case ErrorCode::UnknownPlaceId: return "UnknownPlaceId";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::GradeOutOfRange: return "GradeOutOfRange";
    case ErrorCode::NegativeAge: return "NegativeAge";
    case ErrorCode::MissingProbability: return "MissingProbability";
    case ErrorCode::ZeroCost: return "ZeroCost";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::NonIntegralCost: return "NonIntegralCost";
    case ErrorCode::NotEnoughProjects: return "NotEnoughProjects";
    case ErrorCode::ZeroTotalValue: return "ZeroTotalValue";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::FileUnreadable: return "FileUnreadable";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::NotAFeatureCollection: return "NotAFeatureCollection";
    case ErrorCode::StoreUnavailable: return "StoreUnavailable";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view to_string(PipeMaterial material) {
  switch (material) {
    case PipeMaterial::brass: return "brass";
    case PipeMaterial::iron: return "iron";
    case PipeMaterial::copper: return "copper";
    case PipeMaterial::lead: return "lead";
    case PipeMaterial::pvc: return "pvc";
    case PipeMaterial::steel: return "steel";
    case PipeMaterial::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<PipeMaterial> parse_material(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (PipeMaterial m : kAllMaterials) {
    if (lower == to_string(m)) return m;
  }
  return std::nullopt;
}

LeadStatusPolicy parse_lead_policy(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "conservative") return ConservativeAllUnknownLead{};
  if (head == "probability") return UseProbabilityField{};
  if (head == "year") {
    int year = 0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), year);
    if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
      throw Error(ErrorCode::InvalidArgument, "lead policy year needs an integer cutoff: " + std::string(text));
    }
    return AssumeLeadBuiltBefore{year};
  }
  if (head == "fixed") {
    if (arg.empty()) return FixedUnknownWeight{};
    double w = std::stod(std::string(arg));
    if (!(w >= 0.0 && w <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "fixed unknown weight must lie in [0,1]");
    }
    return FixedUnknownWeight{w};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown lead policy: " + std::string(text));
}

std::string to_string(const LeadStatusPolicy& policy) {
  struct Visitor {
    std::string operator()(const AssumeLeadBuiltBefore& p) const { return "year:" + std::to_string(p.year); }
    std::string operator()(const FixedUnknownWeight& p) const {
      char buf[32];
      std::snprintf(buf, sizeof buf, "fixed:%g", p.weight);
      return buf;
    }
    std::string operator()(const ConservativeAllUnknownLead&) const { return "conservative"; }
    std::string operator()(const UseProbabilityField&) const { return "probability"; }
  };
  return std::visit(Visitor{}, policy);
}

void check_config(const PlanConfig& config) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(config.budget >= 0.0)) fail("budget must be >= 0");
  if (!(config.per_line_cost > 0.0)) fail("per-line cost d must be > 0");
  if (!(config.fixed_cost >= 0.0)) fail("fixed cost K must be >= 0");
  if (!(config.leave_home_age > 0.0)) fail("leave-home age must be > 0");
  if (config.horizon_cap_years && !(*config.horizon_cap_years > 0.0)) fail("horizon cap must be > 0");
  if (!(config.max_segment_m > 0.0)) fail("max segment length must be > 0");
  if (const auto* fixed = std::get_if<FixedUnknownWeight>(&config.lead_policy)) {
    if (!(fixed->weight >= 0.0 && fixed->weight <= 1.0)) fail("fixed unknown weight must lie in [0,1]");
  }
}

std::size_t ValidationReport::fatal_count() const {
  return static_cast<std::size_t>(std::count_if(defects.begin(), defects.end(),
                                                [](const Defect& d) { return d.severity == Severity::fatal; }));
}

namespace {

bool valid_point(LatLon p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

}  // namespace

ValidationReport validate_snapshot(const std::vector<Parcel>& parcels,
                                   const std::vector<ServiceLine>& lines,
                                   const std::vector<ChildRecord>& children,
                                   const std::vector<StreetSegment>& segments,
                                   const std::map<std::string, std::string>& child_parcel_links) {
  ValidationReport report;
  auto add = [&report](Severity severity, std::string kind, std::string key, std::string message) {
    report.defects.push_back({severity, std::move(kind), std::move(key), std::move(message)});
  };

  std::set<std::string> parcel_ids;
  for (const auto& p : parcels) {
    if (p.parcel_id.empty()) add(Severity::fatal, "missing_key", "", "parcel with empty parcel_id");
    if (!parcel_ids.insert(p.parcel_id).second) {
      add(Severity::fatal, "duplicate_key", p.parcel_id, "duplicate parcel_id");
    }
    if (!valid_point(p.centroid)) add(Severity::fatal, "out_of_range", p.parcel_id, "centroid outside WGS84 range");
  }

  std::set<std::string> line_parcels;
  for (const auto& l : lines) {
    if (!parcel_ids.contains(l.parcel_id)) {
      add(Severity::fatal, "dangling_reference", l.parcel_id, "service line references missing parcel");
    }
    if (!line_parcels.insert(l.parcel_id).second) {
      add(Severity::fatal, "duplicate_key", l.parcel_id, "more than one service line for parcel");
    }
    if (l.lead_probability && !(*l.lead_probability >= 0.0 && *l.lead_probability <= 1.0)) {
      add(Severity::fatal, "out_of_range", l.parcel_id, "lead_probability outside [0,1]");
    }
  }

  std::set<std::string> child_ids;
  for (const auto& c : children) {
    if (!child_ids.insert(c.child_id).second) add(Severity::fatal, "duplicate_key", c.child_id, "duplicate child_id");
    if (!c.grade && !c.age_years) add(Severity::fatal, "missing_field", c.child_id, "neither grade nor age present");
    if (c.grade && (*c.grade < 0 || *c.grade > 12)) {
      add(Severity::fatal, "out_of_range", c.child_id, "grade " + std::to_string(*c.grade) + " outside [0,12]");
    }
    if (c.age_years && !(*c.age_years >= 0.0)) add(Severity::fatal, "out_of_range", c.child_id, "negative age");
  }
  for (const auto& [child, parcel] : child_parcel_links) {
    if (!child_ids.contains(child)) {
      add(Severity::fatal, "dangling_reference", child, "link references missing child");
    }
    if (!parcel_ids.contains(parcel)) {
      add(Severity::fatal, "dangling_reference", child, "child linked to missing parcel " + parcel);
    }
  }

  std::set<std::string> segment_ids;
  for (const auto& s : segments) {
    if (!segment_ids.insert(s.segment_id).second) {
      add(Severity::fatal, "duplicate_key", s.segment_id, "duplicate segment_id");
    }
    if (s.polyline.size() < 2 || !(s.length_m > 0.0)) {
      add(Severity::fatal, "degenerate_geometry", s.segment_id, "segment needs >= 2 points and positive length");
      continue;
    }
    const double measured = geo::polyline_length_m(s.polyline);
    if (std::abs(measured - s.length_m) > 0.005 * measured) {
      add(Severity::fatal, "out_of_range", s.segment_id, "length_m disagrees with polyline length by > 0.5%");
    }
  }

  report.usable = report.fatal_count() == 0;
  return report;
}

}  // namespace lslr
