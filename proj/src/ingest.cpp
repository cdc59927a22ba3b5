#include "lslr/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "format.hpp"
#include "lslr/geo.hpp"
#include "lslr/geocache.hpp"

namespace lslr {

using detail::format_double;
using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::FileUnreadable, "cannot read " + path.string());
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::FileUnreadable, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::FileUnreadable, "cannot write " + path.string());
}

std::size_t sanitize_utf8(std::string& text) {
  static constexpr char kReplacement[] = "\xEF\xBF\xBD";
  std::string out;
  std::size_t fixes = 0;
  std::size_t i = 0;
  const auto n = text.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  bool clean = true;
  while (i < n) {
    const unsigned char c = byte(i);
    std::size_t len = 0;
    if (c < 0x80) len = 1;
    else if (c >= 0xC2 && c <= 0xDF) len = 2;
    else if (c >= 0xE0 && c <= 0xEF) len = 3;
    else if (c >= 0xF0 && c <= 0xF4) len = 4;
    bool ok = len > 0 && i + len <= n;
    for (std::size_t k = 1; ok && k < len; ++k) ok = (byte(i + k) & 0xC0) == 0x80;
    if (ok && len == 3) {
      const unsigned char c1 = byte(i + 1);
      ok = !(c == 0xE0 && c1 < 0xA0) && !(c == 0xED && c1 >= 0xA0);
    }
    if (ok && len == 4) {
      const unsigned char c1 = byte(i + 1);
      ok = !(c == 0xF0 && c1 < 0x90) && !(c == 0xF4 && c1 >= 0x90);
    }
    if (ok) {
      if (!clean) out.append(text, i, len);
      i += len;
      continue;
    }
    if (clean) {
      out.assign(text, 0, i);
      clean = false;
    }
    // One replacement per maximal ill-formed subpart: a truncated but
    // otherwise well-started sequence counts once.
    std::size_t skip = 1;
    if (len > 1) {
      for (std::size_t k = 1; k < len && i + k < n; ++k) {
        const unsigned char b = byte(i + k);
        unsigned char lo = 0x80, hi = 0xBF;
        if (k == 1) {
          if (c == 0xE0) lo = 0xA0;
          if (c == 0xED) hi = 0x9F;
          if (c == 0xF0) lo = 0x90;
          if (c == 0xF4) hi = 0x8F;
        }
        if (b < lo || b > hi) break;
        skip = k + 1;
      }
    }
    out += kReplacement;
    ++fixes;
    i += skip;
  }
  if (!clean) text = std::move(out);
  return fixes;
}

CsvTable parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false, field_started = false, row_has_content = false;
  std::size_t line = 1, row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = !row_has_content && row.size() == 1 && row[0].empty();
    if (!blank) {
      if (table.header.empty() && table.rows.empty()) {
        table.header = std::move(row);
      } else {
        table.rows.push_back(std::move(row));
        table.line_numbers.push_back(row_line);
      }
    }
    row.clear();
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
      row_has_content = true;
    } else if (c == ',') {
      end_field();
      row_has_content = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_row();
      ++line;
      row_line = line;
    } else {
      field.push_back(c);
      field_started = true;
      row_has_content = true;
    }
  }
  if (row_has_content || !field.empty() || !row.empty()) end_row();
  return table;
}

std::string csv_field(std::string_view value) {
  const bool quote = value.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!value.empty() && (value.front() == ' ' || value.back() == ' '));
  if (!quote) return std::string(value);
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_line(std::span<const std::string> fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_field(fields[i]);
  }
  out.push_back('\n');
  return out;
}

namespace {

std::string lower_trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::optional<long> parse_long(std::string_view s) {
  const std::string t = trim(s);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  const std::string t = trim(s);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Column positions of a CSV after alias mapping.
class Columns {
 public:
  Columns(const std::vector<std::string>& header, const HeaderAliases& aliases) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string name = lower_trim(header[i]);
      if (auto it = aliases.to_canonical.find(name); it != aliases.to_canonical.end()) name = it->second;
      index_.emplace(name, i);
    }
  }

  void require(std::initializer_list<const char*> names, std::string_view file) const {
    std::string missing;
    for (const char* n : names) {
      if (!index_.count(n)) missing += (missing.empty() ? "" : ",") + std::string(n);
    }
    if (!missing.empty()) {
      throw Error(ErrorCode::HeaderMismatch, std::string(file) + " header lacks " + missing);
    }
  }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::size_t> index_;
};

template <typename T>
CsvTable begin_csv(std::string& text, LoadResult<T>& result) {
  if (const std::size_t fixes = sanitize_utf8(text)) {
    result.warnings.push_back("replaced " + std::to_string(fixes) + " invalid UTF-8 sequence(s)");
  }
  return parse_csv(text);
}

void require_header(const CsvTable& table, std::string_view file) {
  if (table.header.empty()) throw Error(ErrorCode::HeaderMismatch, std::string(file) + " has no header row");
}

}  // namespace

HeaderAliases default_aliases() {
  HeaderAliases a;
  a.to_canonical = {
      {"student_id", "child_id"}, {"id", "child_id"},         {"grade_level", "grade"},
      {"age_years", "age"},       {"street_address", "address"}, {"raw_address", "address"},
      {"addr", "address"},        {"pin", "parcel_id"},       {"parcel", "parcel_id"},
      {"city_side", "public_material"},  {"public", "public_material"},
      {"private_side", "private_material"}, {"private", "private_material"},
      {"probability", "lead_probability"}, {"p_lead", "lead_probability"},
      {"key", "source_key"},      {"source", "dataset"},
  };
  return a;
}

HeaderAliases load_aliases(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  sanitize_utf8(text);
  const CsvTable table = parse_csv(text);
  require_header(table, path.string());
  const Columns cols(table.header, {});
  cols.require({"alias", "column"}, path.string());
  const std::size_t a = *cols.find("alias"), c = *cols.find("column");
  HeaderAliases aliases = default_aliases();
  for (const auto& row : table.rows) {
    if (row.size() <= std::max(a, c)) continue;
    aliases.to_canonical[lower_trim(row[a])] = lower_trim(row[c]);
  }
  return aliases;
}

LoadResult<ChildRecord> parse_students(std::string text, const HeaderAliases& aliases) {
  LoadResult<ChildRecord> result;
  const CsvTable table = begin_csv(text, result);
  require_header(table, "students");
  const Columns cols(table.header, aliases);
  cols.require({"child_id", "grade", "address"}, "students");
  const std::size_t id_col = *cols.find("child_id"), grade_col = *cols.find("grade"),
                    addr_col = *cols.find("address");
  const auto age_col = cols.find("age");

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    ++result.rows;
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    auto reject = [&](std::string reason, std::string detail) {
      result.rejects.push_back({line, std::move(reason), std::move(detail)});
    };
    if (row.size() != table.header.size()) {
      reject("FieldCount", "expected " + std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(row.size()));
      continue;
    }
    ChildRecord c;
    c.child_id = trim(row[id_col]);
    c.raw_address = trim(row[addr_col]);
    if (c.child_id.empty()) {
      reject("MissingKey", "child_id is empty");
      continue;
    }
    const std::string grade_text = trim(row[grade_col]);
    if (!grade_text.empty()) {
      std::string g = lower_trim(grade_text);
      if (g == "k" || g == "kg") g = "0";
      const auto grade = parse_long(g);
      if (!grade) {
        reject("BadGrade", "grade '" + grade_text + "' is not an integer");
        continue;
      }
      if (*grade < 0 || *grade > 12) {
        reject("GradeOutOfRange", "grade " + std::to_string(*grade) + " outside [0,12]");
        continue;
      }
      c.grade = static_cast<int>(*grade);
    }
    if (age_col && !trim(row[*age_col]).empty()) {
      const auto age = parse_real(row[*age_col]);
      if (!age) {
        reject("BadAge", "age '" + trim(row[*age_col]) + "' is not a number");
        continue;
      }
      if (*age < 0.0) {
        reject("NegativeAge", "age " + format_double(*age) + " is negative");
        continue;
      }
      c.age_years = *age;
    }
    if (!c.grade && !c.age_years) {
      reject("MissingAge", "neither grade nor age given");
      continue;
    }
    result.records.push_back(std::move(c));
  }
  return result;
}

LoadResult<ServiceLine> parse_service_lines(std::string text, const HeaderAliases& aliases) {
  LoadResult<ServiceLine> result;
  const CsvTable table = begin_csv(text, result);
  require_header(table, "service_lines");
  const Columns cols(table.header, aliases);
  cols.require({"parcel_id", "public_material", "private_material"}, "service_lines");
  const std::size_t id_col = *cols.find("parcel_id"), pub_col = *cols.find("public_material"),
                    priv_col = *cols.find("private_material");
  const auto prob_col = cols.find("lead_probability");

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    ++result.rows;
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    auto reject = [&](std::string reason, std::string detail) {
      result.rejects.push_back({line, std::move(reason), std::move(detail)});
    };
    if (row.size() != table.header.size()) {
      reject("FieldCount", "expected " + std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(row.size()));
      continue;
    }
    ServiceLine l;
    l.parcel_id = trim(row[id_col]);
    if (l.parcel_id.empty()) {
      reject("MissingKey", "parcel_id is empty");
      continue;
    }
    const auto pub = parse_material(row[pub_col]);
    const auto priv = parse_material(row[priv_col]);
    if (!pub || !priv) {
      reject("UnknownMaterial", "material '" + trim(!pub ? row[pub_col] : row[priv_col]) + "'");
      continue;
    }
    l.public_material = *pub;
    l.private_material = *priv;
    if (prob_col && !trim(row[*prob_col]).empty()) {
      const auto p = parse_real(row[*prob_col]);
      if (!p || *p < 0.0 || *p > 1.0) {
        reject("BadProbability", "lead_probability '" + trim(row[*prob_col]) + "' outside [0,1]");
        continue;
      }
      l.lead_probability = *p;
    }
    result.records.push_back(std::move(l));
  }
  return result;
}

LoadResult<Correction> parse_corrections(std::string text, const HeaderAliases& aliases) {
  LoadResult<Correction> result;
  const CsvTable table = begin_csv(text, result);
  require_header(table, "corrections");
  const Columns cols(table.header, aliases);
  cols.require({"dataset", "source_key", "place_id"}, "corrections");
  const std::size_t d = *cols.find("dataset"), k = *cols.find("source_key"), p = *cols.find("place_id");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    ++result.rows;
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      result.rejects.push_back({table.line_numbers[r], "FieldCount", "wrong number of fields"});
      continue;
    }
    Correction c{trim(row[d]), trim(row[k]), trim(row[p])};
    if (c.dataset.empty() || c.source_key.empty() || c.place_id.empty()) {
      result.rejects.push_back({table.line_numbers[r], "MissingKey", "empty dataset, source_key or place_id"});
      continue;
    }
    result.records.push_back(std::move(c));
  }
  return result;
}

LoadResult<ChildRecord> load_students(const std::filesystem::path& path, const HeaderAliases& aliases) {
  return parse_students(read_text_file(path), aliases);
}

LoadResult<ServiceLine> load_service_lines(const std::filesystem::path& path, const HeaderAliases& aliases) {
  return parse_service_lines(read_text_file(path), aliases);
}

LoadResult<Correction> load_corrections(const std::filesystem::path& path, const HeaderAliases& aliases) {
  return parse_corrections(read_text_file(path), aliases);
}

// GeoJSON ---------------------------------------------------------------

namespace {

template <typename T>
json begin_geojson(std::string& text, LoadResult<T>& result) {
  if (const std::size_t fixes = sanitize_utf8(text)) {
    result.warnings.push_back("replaced " + std::to_string(fixes) + " invalid UTF-8 sequence(s)");
  }
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::NotAFeatureCollection, "input is not valid JSON");
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw Error(ErrorCode::NotAFeatureCollection, "expected a GeoJSON FeatureCollection");
  }
  return doc;
}

// Throws std::invalid_argument with a reason tag on bad coordinates.
LatLon position(const json& p) {
  if (!p.is_array() || p.size() < 2 || !p[0].is_number() || !p[1].is_number()) {
    throw std::invalid_argument("BadCoordinates");
  }
  const LatLon ll{p[1].get<double>(), p[0].get<double>()};
  if (!(ll.lat >= -90.0 && ll.lat <= 90.0 && ll.lon >= -180.0 && ll.lon <= 180.0)) {
    throw std::invalid_argument("CoordinateOutOfRange");
  }
  return ll;
}

std::vector<LatLon> positions(const json& arr) {
  if (!arr.is_array()) throw std::invalid_argument("BadCoordinates");
  std::vector<LatLon> out;
  for (const auto& p : arr) out.push_back(position(p));
  return out;
}

json coords(std::span<const LatLon> pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.lon, p.lat});
  return arr;
}

std::string property_text(const json& props, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (!props.contains(n)) continue;
    const json& v = props[n];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
  }
  return {};
}

struct LineFeature {
  std::string id;
  std::string name;
  std::vector<LatLon> polyline;
};

// Shared LineString handling for centerlines and segments. Returns false and
// records a reject when the feature is unusable.
template <typename T>
bool read_line_feature(const json& f, std::size_t index, LoadResult<T>& result, LineFeature& out) {
  auto reject = [&](std::string reason, std::string detail) {
    result.rejects.push_back({index, std::move(reason), std::move(detail)});
    return false;
  };
  if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object()) {
    return reject("MissingGeometry", "feature has no geometry");
  }
  const json& g = f["geometry"];
  if (g.value("type", "") != "LineString") return reject("UnsupportedGeometry", "expected LineString");
  const json props = f.contains("properties") && f["properties"].is_object() ? f["properties"] : json::object();
  out.name = property_text(props, {"street_name", "name", "street", "STREET", "ST_NAME"});
  out.id = property_text(props, {"segment_id", "id"});
  if (out.name.empty()) return reject("MissingProperty", "no street name");
  try {
    out.polyline = positions(g.value("coordinates", json::array()));
  } catch (const std::invalid_argument& e) {
    return reject(e.what(), "invalid coordinates");
  }
  if (out.polyline.size() < 2 || !(geo::polyline_length_m(out.polyline) > 0.0)) {
    return reject("DegenerateGeometry", "zero-length line");
  }
  if (geo::self_intersects(out.polyline)) return reject("DegenerateGeometry", "self-intersecting line");
  return true;
}

}  // namespace

LoadResult<Centerline> parse_centerlines(std::string text) {
  LoadResult<Centerline> result;
  const json doc = begin_geojson(text, result);
  std::size_t index = 0;
  for (const auto& f : doc["features"]) {
    ++result.rows;
    LineFeature lf;
    if (!read_line_feature(f, ++index, result, lf)) continue;
    result.records.push_back({std::move(lf.name), std::move(lf.polyline)});
  }
  return result;
}

LoadResult<StreetSegment> parse_segments(std::string text) {
  LoadResult<StreetSegment> result;
  const json doc = begin_geojson(text, result);
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& f : doc["features"]) {
    ++result.rows;
    LineFeature lf;
    if (!read_line_feature(f, ++index, result, lf)) continue;
    StreetSegment s;
    char buf[24];
    std::snprintf(buf, sizeof buf, "F%06zu", index);
    s.segment_id = lf.id.empty() ? buf : lf.id;
    if (!seen.insert(s.segment_id).second) {
      result.rejects.push_back({index, "DuplicateKey", "segment_id " + s.segment_id + " repeated"});
      continue;
    }
    s.street_name = normalize_street_name(lf.name);
    s.polyline = std::move(lf.polyline);
    s.length_m = geo::polyline_length_m(s.polyline);
    result.records.push_back(std::move(s));
  }
  return result;
}

namespace {

LatLon polygon_centroid(const json& geometry) {
  const std::string type = geometry.value("type", "");
  std::vector<std::vector<LatLon>> outer_rings;
  if (type == "Polygon") {
    const json& rings = geometry.value("coordinates", json::array());
    if (!rings.is_array() || rings.empty()) throw std::invalid_argument("BadCoordinates");
    outer_rings.push_back(positions(rings[0]));
  } else {
    const json& polys = geometry.value("coordinates", json::array());
    if (!polys.is_array() || polys.empty()) throw std::invalid_argument("BadCoordinates");
    for (const auto& rings : polys) {
      if (!rings.is_array() || rings.empty()) throw std::invalid_argument("BadCoordinates");
      outer_rings.push_back(positions(rings[0]));
    }
  }
  for (const auto& ring : outer_rings) {
    if (ring.size() < 3) throw std::invalid_argument("DegenerateGeometry");
  }
  if (outer_rings.size() == 1) return geo::ring_centroid(outer_rings[0]);
  // Multipolygon: area-weighted mean of part centroids.
  double area = 0.0, lat = 0.0, lon = 0.0;
  for (const auto& ring : outer_rings) {
    const double a = std::abs(geo::ring_area_m2(ring));
    const LatLon c = geo::ring_centroid(ring);
    area += a;
    lat += a * c.lat;
    lon += a * c.lon;
  }
  if (!(area > 0.0)) throw std::invalid_argument("DegenerateGeometry");
  return {lat / area, lon / area};
}

}  // namespace

LoadResult<Parcel> parse_parcels(std::string text) {
  LoadResult<Parcel> result;
  const json doc = begin_geojson(text, result);
  std::size_t index = 0;
  for (const auto& f : doc["features"]) {
    ++result.rows;
    ++index;
    auto reject = [&](std::string reason, std::string detail) {
      result.rejects.push_back({index, std::move(reason), std::move(detail)});
    };
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object()) {
      reject("MissingGeometry", "feature has no geometry");
      continue;
    }
    const json props = f.contains("properties") && f["properties"].is_object() ? f["properties"] : json::object();
    Parcel p;
    p.parcel_id = trim(property_text(props, {"parcel_id", "PARCEL_ID", "pin", "id"}));
    p.address = trim(property_text(props, {"address", "ADDRESS", "site_address"}));
    p.place_id = property_text(props, {"place_id"});
    if (p.parcel_id.empty()) {
      reject("MissingProperty", "no parcel_id");
      continue;
    }
    if (p.address.empty()) {
      reject("MissingProperty", "no address");
      continue;
    }
    if (props.contains("year_built") && !props["year_built"].is_null()) {
      const auto year = props["year_built"].is_number_integer() ? std::optional<long>(props["year_built"].get<long>())
                                                                : parse_long(property_text(props, {"year_built"}));
      if (!year) {
        reject("BadYear", "year_built is not an integer");
        continue;
      }
      p.year_built = static_cast<int>(*year);
    }
    const json& g = f["geometry"];
    const std::string type = g.value("type", "");
    try {
      if (type == "Point") {
        p.centroid = position(g.value("coordinates", json::array()));
      } else if (type == "Polygon" || type == "MultiPolygon") {
        p.centroid = polygon_centroid(g);
      } else {
        reject("UnsupportedGeometry", "expected Point or Polygon, got '" + type + "'");
        continue;
      }
    } catch (const std::invalid_argument& e) {
      reject(e.what(), "invalid parcel geometry");
      continue;
    }
    result.records.push_back(std::move(p));
  }
  return result;
}

LoadResult<Centerline> load_centerlines(const std::filesystem::path& path) {
  return parse_centerlines(read_text_file(path));
}

LoadResult<StreetSegment> load_segments(const std::filesystem::path& path) {
  return parse_segments(read_text_file(path));
}

LoadResult<Parcel> load_parcels(const std::filesystem::path& path) { return parse_parcels(read_text_file(path)); }

// Writers ------------------------------------------------------------------

std::string write_students_csv(std::span<const ChildRecord> children) {
  std::string out = "child_id,grade,address,age\n";
  for (const auto& c : children) {
    const std::vector<std::string> f{c.child_id, c.grade ? std::to_string(*c.grade) : "", c.raw_address,
                                     c.age_years ? format_double(*c.age_years) : ""};
    out += csv_line(f);
  }
  return out;
}

std::string write_service_lines_csv(std::span<const ServiceLine> lines) {
  std::string out = "parcel_id,public_material,private_material,lead_probability\n";
  for (const auto& l : lines) {
    const std::vector<std::string> f{l.parcel_id, std::string(to_string(l.public_material)),
                                     std::string(to_string(l.private_material)),
                                     l.lead_probability ? format_double(*l.lead_probability) : ""};
    out += csv_line(f);
  }
  return out;
}

std::string write_corrections_csv(std::span<const Correction> corrections) {
  std::string out = "dataset,source_key,place_id\n";
  for (const auto& c : corrections) {
    const std::vector<std::string> f{c.dataset, c.source_key, c.place_id};
    out += csv_line(f);
  }
  return out;
}

json centerlines_geojson(std::span<const Centerline> centerlines) {
  json fc{{"type", "FeatureCollection"}, {"features", json::array()}};
  for (const auto& c : centerlines) {
    fc["features"].push_back({{"type", "Feature"},
                              {"properties", {{"street_name", c.street_name}}},
                              {"geometry", {{"type", "LineString"}, {"coordinates", coords(c.polyline)}}}});
  }
  return fc;
}

json segments_geojson(std::span<const StreetSegment> segments) {
  json fc{{"type", "FeatureCollection"}, {"features", json::array()}};
  for (const auto& s : segments) {
    fc["features"].push_back(
        {{"type", "Feature"},
         {"properties", {{"segment_id", s.segment_id}, {"street_name", s.street_name}, {"length_m", s.length_m}}},
         {"geometry", {{"type", "LineString"}, {"coordinates", coords(s.polyline)}}}});
  }
  return fc;
}

json parcels_geojson(std::span<const Parcel> parcels) {
  json fc{{"type", "FeatureCollection"}, {"features", json::array()}};
  for (const auto& p : parcels) {
    json props{{"parcel_id", p.parcel_id}, {"address", p.address}};
    if (!p.place_id.empty()) props["place_id"] = p.place_id;
    if (p.year_built) props["year_built"] = *p.year_built;
    fc["features"].push_back({{"type", "Feature"},
                              {"properties", props},
                              {"geometry", {{"type", "Point"}, {"coordinates", {p.centroid.lon, p.centroid.lat}}}}});
  }
  return fc;
}

std::string write_junction_csv(const Junction& junction) {
  std::string out = "dataset,source_key,place_id,probability,provenance\n";
  for (const auto& e : junction.entries) {
    const std::vector<std::string> f{e.source_dataset, e.source_key, e.place_id, format_double(e.probability),
                                     std::string(to_string(e.provenance))};
    out += csv_line(f);
  }
  return out;
}

std::string write_unmatched_csv(const Junction& junction) {
  std::string out = "dataset,source_key,raw_address,reason,best_place_id,best_probability\n";
  for (const auto& u : junction.unmatched) {
    const std::vector<std::string> f{u.dataset, u.key, u.raw_address, u.reason,
                                     u.best ? u.best->address.place_id : "",
                                     u.best ? format_double(u.best->probability) : ""};
    out += csv_line(f);
  }
  return out;
}

std::vector<JunctionEntry> parse_junction_csv(std::string text) {
  sanitize_utf8(text);
  const CsvTable table = parse_csv(text);
  require_header(table, "junction");
  const Columns cols(table.header, {});
  cols.require({"dataset", "source_key", "place_id", "probability", "provenance"}, "junction");
  const std::size_t d = *cols.find("dataset"), k = *cols.find("source_key"), p = *cols.find("place_id"),
                    pr = *cols.find("probability"), pv = *cols.find("provenance");
  std::vector<JunctionEntry> entries;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto prob = row.size() == table.header.size() ? parse_real(row[pr]) : std::nullopt;
    if (!prob) {
      throw Error(ErrorCode::HeaderMismatch, "junction line " + std::to_string(table.line_numbers[r]) + " is malformed");
    }
    entries.push_back({row[d], row[k], row[p], *prob,
                       trim(row[pv]) == "manual" ? Provenance::manual : Provenance::automatic});
  }
  return entries;
}

json gazetteer_json(std::span<const GeoAddress> gazetteer) {
  json arr = json::array();
  for (const auto& g : gazetteer) arr.push_back(to_json(g));
  return arr;
}

std::vector<GeoAddress> parse_gazetteer(const json& j) {
  const json& arr = j.is_object() && j.contains("results") ? j["results"] : j;
  if (!arr.is_array()) throw Error(ErrorCode::InvalidArgument, "gazetteer must be a JSON array");
  std::vector<GeoAddress> out;
  for (const auto& g : arr) out.push_back(geo_address_from_json(g));
  return out;
}

std::vector<GeoAddress> load_gazetteer(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  sanitize_utf8(text);
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::InvalidArgument, path.string() + " is not valid JSON");
  return parse_gazetteer(doc);
}

MaterialPivot material_pivot(std::span<const ServiceLine> lines) {
  MaterialPivot pivot{};
  for (const auto& l : lines) {
    ++pivot[static_cast<std::size_t>(l.private_material)][static_cast<std::size_t>(l.public_material)];
  }
  return pivot;
}

std::string material_pivot_csv(const MaterialPivot& pivot) {
  std::string out = "private\\public";
  for (const auto m : kAllMaterials) out += "," + std::string(to_string(m));
  out += "\n";
  for (const auto priv : kAllMaterials) {
    out += std::string(to_string(priv));
    for (const auto pub : kAllMaterials) {
      out += "," + std::to_string(pivot[static_cast<std::size_t>(priv)][static_cast<std::size_t>(pub)]);
    }
    out += "\n";
  }
  return out;
}

json projects_geojson(std::span<const Project> projects, std::span<const StreetSegment> segments) {
  std::map<std::string_view, const StreetSegment*> seg_by_id;
  for (const auto& s : segments) seg_by_id.emplace(s.segment_id, &s);
  json fc{{"type", "FeatureCollection"}, {"features", json::array()}};
  for (const auto& p : projects) {
    auto it = seg_by_id.find(p.segment_id);
    if (it == seg_by_id.end()) {
      throw Error(ErrorCode::InvalidArgument, "project " + p.project_id + " has no segment " + p.segment_id);
    }
    fc["features"].push_back({{"type", "Feature"},
                              {"properties",
                               {{"project_id", p.project_id},
                                {"segment_id", p.segment_id},
                                {"street_name", p.street_name},
                                {"length_m", p.length_m},
                                {"parcel_ids", p.parcel_ids},
                                {"lead_line_count", p.lead_line_count}}},
                              {"geometry", {{"type", "LineString"}, {"coordinates", coords(it->second->polyline)}}}});
  }
  return fc;
}

ProjectGeometry parse_projects_geojson(const json& j) {
  if (!j.is_object() || j.value("type", "") != "FeatureCollection" || !j.contains("features")) {
    throw Error(ErrorCode::NotAFeatureCollection, "projects file is not a FeatureCollection");
  }
  ProjectGeometry out;
  for (const auto& f : j["features"]) {
    try {
      const json& props = f.at("properties");
      Project p;
      p.project_id = props.at("project_id").get<std::string>();
      p.segment_id = props.value("segment_id", p.project_id);
      p.street_name = props.value("street_name", "");
      p.length_m = props.value("length_m", 0.0);
      p.parcel_ids = props.value("parcel_ids", std::vector<std::string>{});
      std::sort(p.parcel_ids.begin(), p.parcel_ids.end());
      p.lead_line_count = props.value("lead_line_count", 0);
      StreetSegment s;
      s.segment_id = p.segment_id;
      s.street_name = p.street_name;
      s.polyline = positions(f.at("geometry").at("coordinates"));
      s.length_m = p.length_m;
      out.projects.push_back(std::move(p));
      out.segments.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::NotAFeatureCollection, std::string("malformed project feature: ") + e.what());
    }
  }
  return out;
}

std::string write_projects_scored_csv(std::span<const Project> projects) {
  std::string out = "project_id,segment_id,street_name,length_m,lead_line_count,child_count,value,cost,parcel_ids\n";
  for (const auto& p : projects) {
    std::string ids;
    for (const auto& id : p.parcel_ids) ids += (ids.empty() ? "" : ";") + id;
    const std::vector<std::string> f{p.project_id,
                                     p.segment_id,
                                     p.street_name,
                                     format_double(p.length_m),
                                     std::to_string(p.lead_line_count),
                                     std::to_string(p.child_count),
                                     format_double(p.value_exposure_years),
                                     format_double(p.cost_units),
                                     ids};
    out += csv_line(f);
  }
  return out;
}

std::vector<Project> parse_projects_scored_csv(std::string text) {
  sanitize_utf8(text);
  const CsvTable table = parse_csv(text);
  require_header(table, "projects_scored");
  const Columns cols(table.header, {});
  cols.require({"project_id", "value", "cost"}, "projects_scored");
  auto col = [&](const char* name) { return cols.find(name); };
  std::vector<Project> projects;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto bad = [&](const std::string& what) {
      return Error(ErrorCode::HeaderMismatch,
                   "projects_scored line " + std::to_string(table.line_numbers[r]) + ": " + what);
    };
    if (row.size() != table.header.size()) throw bad("wrong number of fields");
    auto real = [&](const char* name, double fallback) {
      const auto c = col(name);
      if (!c) return fallback;
      const auto v = parse_real(row[*c]);
      if (!v) throw bad(std::string("bad ") + name);
      return *v;
    };
    auto integer = [&](const char* name) {
      const auto c = col(name);
      if (!c) return 0;
      const auto v = parse_long(row[*c]);
      if (!v) throw bad(std::string("bad ") + name);
      return static_cast<int>(*v);
    };
    Project p;
    p.project_id = row[*col("project_id")];
    p.segment_id = col("segment_id") ? row[*col("segment_id")] : p.project_id;
    p.street_name = col("street_name") ? row[*col("street_name")] : "";
    p.length_m = real("length_m", 0.0);
    p.lead_line_count = integer("lead_line_count");
    p.child_count = integer("child_count");
    p.value_exposure_years = real("value", 0.0);
    p.cost_units = real("cost", 0.0);
    if (const auto c = col("parcel_ids")) {
      std::string_view ids = row[*c];
      while (!ids.empty()) {
        const auto cut = ids.find(';');
        p.parcel_ids.emplace_back(ids.substr(0, cut));
        if (cut == std::string_view::npos) break;
        ids.remove_prefix(cut + 1);
      }
    }
    projects.push_back(std::move(p));
  }
  return projects;
}

std::string write_ranked_csv(std::span<const RankedProject> ranked) {
  std::string out = "rank,project_id,value,cost,bcr,cumulative_cost,cumulative_value\n";
  double cost = 0.0, value = 0.0;
  for (const auto& r : ranked) {
    cost += r.cost;
    value += r.value;
    const std::vector<std::string> f{std::to_string(r.rank), r.project_id, format_double(r.value),
                                     format_double(r.cost), format_double(r.bcr), format_double(cost),
                                     format_double(value)};
    out += csv_line(f);
  }
  return out;
}

}  // namespace lslr
