#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "lslr/core.hpp"

namespace lslr {

struct GeocodeCacheEntry {
  std::string normalized_key;
  std::vector<MatchCandidate> candidates;
  std::string fetched_at;  // ISO-8601 UTC
};

nlohmann::json to_json(const GeoAddress& address);
GeoAddress geo_address_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MatchCandidate& candidate);
MatchCandidate match_candidate_from_json(const nlohmann::json& j);

// Append-only newline-delimited JSON file with an in-memory index. Later
// records for the same key replace earlier ones on reload; a torn final line
// from a crash is skipped. Reads may run concurrently; writes are serialized.
class GeocodeCache {
 public:
  /// In-memory only.
  GeocodeCache() = default;

  /// Loads any existing records and appends new ones to `path`.
  explicit GeocodeCache(std::filesystem::path path);

  std::optional<GeocodeCacheEntry> get(const std::string& normalized_key) const;
  void put(const std::string& normalized_key, std::vector<MatchCandidate> candidates);

  std::size_t size() const;
  std::size_t skipped_lines() const { return skipped_lines_; }

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, GeocodeCacheEntry> index_;
  std::ofstream out_;
  std::size_t skipped_lines_ = 0;
};

}  // namespace lslr
