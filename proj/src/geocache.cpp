#include "lslr/geocache.hpp"

#include <chrono>
#include <ctime>
#include <mutex>

namespace lslr {

nlohmann::json to_json(const GeoAddress& a) {
  return {{"place_id", a.place_id},       {"lat", a.point.lat},         {"lon", a.point.lon},
          {"street_number", a.street_number}, {"route", a.route},       {"locality", a.locality},
          {"postal_code", a.postal_code},   {"formatted", a.formatted}};
}

GeoAddress geo_address_from_json(const nlohmann::json& j) {
  GeoAddress a;
  a.place_id = j.value("place_id", "");
  a.point.lat = j.value("lat", 0.0);
  a.point.lon = j.value("lon", 0.0);
  a.street_number = j.value("street_number", "");
  a.route = j.value("route", "");
  a.locality = j.value("locality", "");
  a.postal_code = j.value("postal_code", "");
  a.formatted = j.value("formatted", "");
  return a;
}

nlohmann::json to_json(const MatchCandidate& c) {
  return {{"address", to_json(c.address)}, {"probability", c.probability}};
}

MatchCandidate match_candidate_from_json(const nlohmann::json& j) {
  return {geo_address_from_json(j.at("address")), j.at("probability").get<double>()};
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

GeocodeCache::GeocodeCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(*path_)) {
    std::ifstream in(*path_);
    if (!in) throw Error(ErrorCode::StoreUnavailable, "cannot read cache file " + path_->string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        GeocodeCacheEntry entry;
        entry.normalized_key = j.at("key").get<std::string>();
        entry.fetched_at = j.value("fetched_at", "");
        for (const auto& c : j.at("candidates")) entry.candidates.push_back(match_candidate_from_json(c));
        index_[entry.normalized_key] = std::move(entry);
      } catch (const nlohmann::json::exception&) {
        ++skipped_lines_;
      }
    }
  }
  out_.open(*path_, std::ios::app);
  if (!out_) throw Error(ErrorCode::StoreUnavailable, "cannot open cache file " + path_->string());
}

std::optional<GeocodeCacheEntry> GeocodeCache::get(const std::string& normalized_key) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(normalized_key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void GeocodeCache::put(const std::string& normalized_key, std::vector<MatchCandidate> candidates) {
  GeocodeCacheEntry entry{normalized_key, std::move(candidates), utc_now()};
  std::unique_lock lock(mutex_);
  if (path_) {
    nlohmann::json j{{"key", entry.normalized_key}, {"fetched_at", entry.fetched_at}};
    j["candidates"] = nlohmann::json::array();
    for (const auto& c : entry.candidates) j["candidates"].push_back(to_json(c));
    out_ << j.dump() << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::StoreUnavailable, "write to cache file failed");
  }
  index_[normalized_key] = std::move(entry);
}

std::size_t GeocodeCache::size() const {
  std::shared_lock lock(mutex_);
  return index_.size();
}

}  // namespace lslr
