#include "lslr/geocoder.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <thread>

#include "lslr/geocache.hpp"

namespace lslr {

namespace {

bool starts_with_digit(std::string_view s) {
  return !s.empty() && std::isdigit(static_cast<unsigned char>(s.front()));
}

struct StreetParts {
  std::string number;
  std::string name;
};

StreetParts split_street(const NormalizedAddress& n) {
  StreetParts parts;
  std::size_t from = 0;
  if (!n.tokens.empty() && starts_with_digit(n.tokens.front())) {
    parts.number = n.tokens.front();
    from = 1;
  }
  for (std::size_t i = from; i < n.tokens.size(); ++i) {
    if (!parts.name.empty()) parts.name.push_back(' ');
    parts.name += n.tokens[i];
  }
  return parts;
}

}  // namespace

MockGeocoder::MockGeocoder(std::vector<GeoAddress> gazetteer, MockGeocoderOptions options)
    : gazetteer_(std::move(gazetteer)), options_(options) {
  for (std::size_t i = 0; i < gazetteer_.size(); ++i) {
    const GeoAddress& g = gazetteer_[i];
    NormalizedAddress n;
    try {
      n = normalize_address(g.street_number + " " + g.route);
    } catch (const Error&) {
      continue;
    }
    StreetParts parts = split_street(n);
    by_key_[n.street_key()].push_back(entries_.size());
    by_number_[parts.number].push_back(entries_.size());
    entries_.push_back({i, std::move(parts.number), std::move(parts.name), n.suffix});
  }
}

std::vector<MatchCandidate> MockGeocoder::lookup(std::string_view raw) {
  const NormalizedAddress q = normalize_address(raw);
  std::vector<MatchCandidate> out;

  if (auto it = by_key_.find(q.street_key()); it != by_key_.end()) {
    for (const std::size_t e : it->second) out.push_back({gazetteer_[entries_[e].index], 1.0});
    return out;
  }
  if (!options_.fuzzy) return out;

  const StreetParts parts = split_street(q);
  auto score = [&](const Entry& e) {
    const int edits = osa_distance(parts.name, e.name);
    if (edits > options_.max_edits) return 0.0;
    double p = std::max(0.0, 1.0 - options_.per_edit_penalty * edits);
    if (parts.number != e.number) p *= options_.number_mismatch_factor;
    if (q.suffix.empty() && !e.suffix.empty()) {
      p *= options_.missing_suffix_factor;
    } else if (q.suffix != e.suffix) {
      p *= options_.suffix_mismatch_factor;
    }
    return p;
  };

  auto consider = [&](std::size_t e) {
    const double p = score(entries_[e]);
    if (p >= options_.min_probability) out.push_back({gazetteer_[entries_[e].index], p});
  };
  if (auto it = by_number_.find(parts.number); it != by_number_.end() && !parts.number.empty()) {
    for (const std::size_t e : it->second) consider(e);
  } else {
    for (std::size_t e = 0; e < entries_.size(); ++e) consider(e);
  }

  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.address.place_id < b.address.place_id;
  });
  if (out.size() > options_.max_candidates) out.resize(options_.max_candidates);
  return out;
}

CacheGeocoder::CacheGeocoder(GeocodeCache& cache, GeocoderPort* upstream)
    : cache_(cache), upstream_(upstream) {}

bool CacheGeocoder::thread_safe() const { return upstream_ == nullptr || upstream_->thread_safe(); }

std::vector<MatchCandidate> CacheGeocoder::lookup(std::string_view raw) {
  const std::string key = normalize_address(raw).to_string();
  if (auto hit = cache_.get(key)) return hit->candidates;
  if (upstream_ == nullptr) {
    throw Error(ErrorCode::GeocoderUnavailable, "cache-only geocoder has no entry for '" + key + "'");
  }
  std::vector<MatchCandidate> fetched = upstream_->lookup(raw);
  cache_.put(key, fetched);
  return fetched;
}

HttpGeocoder::HttpGeocoder(HttpGeocoderOptions options) : options_(std::move(options)) {}

std::vector<MatchCandidate> HttpGeocoder::lookup(std::string_view raw) {
  if (options_.min_interval.count() > 0) {
    std::lock_guard lock(rate_mutex_);
    const auto next = last_request_ + options_.min_interval;
    const auto now = std::chrono::steady_clock::now();
    if (now < next) std::this_thread::sleep_for(next - now);
    last_request_ = std::chrono::steady_clock::now();
  }

  httplib::Client client(options_.base_url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), static_cast<time_t>(usecs.count()));
  client.set_read_timeout(secs.count(), static_cast<time_t>(usecs.count()));

  httplib::Params params{{"address", std::string(raw)}};
  if (!options_.api_key.empty()) params.emplace("key", options_.api_key);
  auto res = client.Get(options_.path, params, httplib::Headers{});
  if (!res) {
    throw Error(ErrorCode::GeocoderUnavailable,
                "geocoder request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::GeocoderUnavailable, "geocoder returned HTTP " + std::to_string(res->status));
  }
  nlohmann::json payload;
  try {
    payload = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::GeocoderUnavailable, std::string("geocoder returned malformed JSON: ") + e.what());
  }
  if (payload.is_object() && payload.contains("status")) {
    const std::string status = payload.value("status", "");
    if (status != "OK" && status != "ZERO_RESULTS") {
      throw Error(ErrorCode::GeocoderUnavailable, "geocoder status " + status);
    }
  }
  return parse_geocode_response(payload);
}

double location_type_probability(std::string_view location_type, bool partial_match) {
  double p = 0.5;
  if (location_type == "ROOFTOP") {
    p = 1.0;
  } else if (location_type == "RANGE_INTERPOLATED") {
    p = 0.9;
  } else if (location_type == "GEOMETRIC_CENTER") {
    p = 0.7;
  }
  return partial_match ? p * 0.9 : p;
}

GeoAddress parse_geo_address(const nlohmann::json& result) {
  GeoAddress a;
  a.place_id = result.value("place_id", "");
  a.formatted = result.value("formatted_address", "");
  if (auto comps = result.find("address_components"); comps != result.end() && comps->is_array()) {
    for (const auto& c : *comps) {
      const std::string long_name = c.value("long_name", "");
      const auto types = c.value("types", std::vector<std::string>{});
      auto has = [&](std::string_view t) { return std::find(types.begin(), types.end(), t) != types.end(); };
      if (has("street_number")) a.street_number = long_name;
      else if (has("route")) a.route = long_name;
      else if (has("locality")) a.locality = long_name;
      else if (has("postal_code")) a.postal_code = long_name;
    }
  }
  if (auto geom = result.find("geometry"); geom != result.end() && geom->is_object()) {
    if (auto loc = geom->find("location"); loc != geom->end() && loc->is_object()) {
      a.point.lat = loc->value("lat", 0.0);
      a.point.lon = loc->value("lng", 0.0);
    }
  }
  return a;
}

std::vector<MatchCandidate> parse_geocode_response(const nlohmann::json& payload) {
  const nlohmann::json* results = &payload;
  if (payload.is_object()) {
    auto it = payload.find("results");
    if (it == payload.end()) return {};
    results = &*it;
  }
  std::vector<MatchCandidate> out;
  if (!results->is_array()) return out;
  for (const auto& r : *results) {
    if (!r.is_object()) continue;
    MatchCandidate c;
    c.address = parse_geo_address(r);
    if (c.address.place_id.empty()) continue;
    std::string location_type;
    if (auto geom = r.find("geometry"); geom != r.end() && geom->is_object()) {
      location_type = geom->value("location_type", "");
    }
    c.probability = location_type_probability(location_type, r.value("partial_match", false));
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace lslr
