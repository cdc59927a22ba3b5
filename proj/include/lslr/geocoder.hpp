#pragma once

#include <chrono>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "lslr/core.hpp"
#include "lslr/linkage.hpp"

namespace lslr {

class GeocodeCache;

class GeocoderPort {
 public:
  virtual ~GeocoderPort() = default;

  /// Candidate places for free-entry text; empty when nothing matches.
  /// Throws GeocoderUnavailable on transport failure.
  virtual std::vector<MatchCandidate> lookup(std::string_view raw) = 0;

  virtual bool thread_safe() const { return true; }
};

struct MockGeocoderOptions {
  bool fuzzy = true;
  double per_edit_penalty = 0.1;
  int max_edits = 3;
  double suffix_mismatch_factor = 0.6;
  double missing_suffix_factor = 0.8;
  double number_mismatch_factor = 0.5;
  double min_probability = 0.3;
  std::size_t max_candidates = 5;
};

// Deterministic table-backed geocoder. Exact matches on the normalized street
// address score 1.0; with `fuzzy` set, near misses are scored by edit distance
// on the street name and agreement of house number and suffix.
class MockGeocoder final : public GeocoderPort {
 public:
  explicit MockGeocoder(std::vector<GeoAddress> gazetteer, MockGeocoderOptions options = {});

  std::vector<MatchCandidate> lookup(std::string_view raw) override;

  const std::vector<GeoAddress>& gazetteer() const { return gazetteer_; }

 private:
  struct Entry {
    std::size_t index;
    std::string number;
    std::string name;
    std::string suffix;
  };

  std::vector<GeoAddress> gazetteer_;
  MockGeocoderOptions options_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_key_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_number_;
};

/// Serves lookups from the persistent cache. On a miss the upstream geocoder
/// is consulted and its answer stored; with no upstream a miss is reported as
/// GeocoderUnavailable (offline mode).
class CacheGeocoder final : public GeocoderPort {
 public:
  explicit CacheGeocoder(GeocodeCache& cache, GeocoderPort* upstream = nullptr);

  std::vector<MatchCandidate> lookup(std::string_view raw) override;
  bool thread_safe() const override;

 private:
  GeocodeCache& cache_;
  GeocoderPort* upstream_;
};

struct HttpGeocoderOptions {
  std::string base_url = "https://maps.googleapis.com";
  std::string path = "/maps/api/geocode/json";
  std::string api_key;
  std::chrono::milliseconds timeout{10000};
  std::chrono::milliseconds min_interval{0};  // per-host rate limit
};

class HttpGeocoder final : public GeocoderPort {
 public:
  explicit HttpGeocoder(HttpGeocoderOptions options);

  std::vector<MatchCandidate> lookup(std::string_view raw) override;

 private:
  HttpGeocoderOptions options_;
  std::mutex rate_mutex_;
  std::chrono::steady_clock::time_point last_request_{};
};

/// Probability assigned to a result from its location_type: ROOFTOP 1.0,
/// RANGE_INTERPOLATED 0.9, GEOMETRIC_CENTER 0.7, APPROXIMATE 0.5, other or
/// missing 0.5. A partial_match flag multiplies by 0.9.
double location_type_probability(std::string_view location_type, bool partial_match);

/// Parses either a bare result array or an object with a "results" array.
/// Absent fields are tolerated.
std::vector<MatchCandidate> parse_geocode_response(const nlohmann::json& payload);

GeoAddress parse_geo_address(const nlohmann::json& result);

}  // namespace lslr
