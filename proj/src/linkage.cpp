#include "lslr/linkage.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <exception>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "lslr/geocoder.hpp"

namespace lslr {

namespace {

// Postal-service street suffix abbreviations. Canonical forms map to
// themselves so rendering and re-normalizing is stable.
const std::unordered_map<std::string_view, std::string_view>& suffix_table() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"ST", "ST"},       {"STREET", "ST"},    {"STR", "ST"},       {"RD", "RD"},
      {"ROAD", "RD"},     {"AVE", "AVE"},      {"AVENUE", "AVE"},   {"AV", "AVE"},
      {"AVEN", "AVE"},    {"BLVD", "BLVD"},    {"BOULEVARD", "BLVD"}, {"DR", "DR"},
      {"DRIVE", "DR"},    {"LN", "LN"},        {"LANE", "LN"},      {"CT", "CT"},
      {"COURT", "CT"},    {"PL", "PL"},        {"PLACE", "PL"},     {"TER", "TER"},
      {"TERRACE", "TER"}, {"TERR", "TER"},     {"CIR", "CIR"},      {"CIRCLE", "CIR"},
      {"PKWY", "PKWY"},   {"PARKWAY", "PKWY"}, {"HWY", "HWY"},      {"HIGHWAY", "HWY"},
      {"SQ", "SQ"},       {"SQUARE", "SQ"},    {"WAY", "WAY"},      {"WY", "WAY"},
      {"TRL", "TRL"},     {"TRAIL", "TRL"},    {"ALY", "ALY"},      {"ALLEY", "ALY"},
      {"HTS", "HTS"},     {"HEIGHTS", "HTS"},  {"ROW", "ROW"},      {"PARK", "PARK"},
  };
  return table;
}

bool is_extension(std::string_view token) {
  return token == "EXT" || token == "EXTN" || token == "EXTENSION";
}

bool is_unit_marker(std::string_view token) {
  return token == "#" || token == "APT" || token == "APARTMENT" || token == "UNIT" ||
         token == "STE" || token == "SUITE";
}

std::vector<std::string> tokenize(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (const char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::toupper(c)));
    } else if (c == '\'') {
      // O'Brien -> OBRIEN
    } else if (c == '#') {
      flush();
      tokens.emplace_back("#");
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool starts_with_digit(std::string_view s) {
  return !s.empty() && std::isdigit(static_cast<unsigned char>(s.front()));
}

void join_into(std::string& out, const std::vector<std::string>& parts) {
  for (const auto& p : parts) {
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
}

}  // namespace

std::string NormalizedAddress::street_key() const {
  std::string out;
  join_into(out, tokens);
  if (!suffix.empty()) {
    if (!out.empty()) out.push_back(' ');
    out += suffix;
  }
  return out;
}

std::string NormalizedAddress::to_string() const {
  std::string out = street_key();
  join_into(out, tail);
  if (unit) {
    if (!out.empty()) out.push_back(' ');
    out += "# ";
    out += *unit;
  }
  return out;
}

NormalizedAddress normalize_address(std::string_view raw) {
  std::vector<std::string> all = tokenize(raw);

  NormalizedAddress result;
  std::vector<std::string> rest;
  rest.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (is_unit_marker(all[i])) {
      if (i + 1 < all.size()) {
        if (!result.unit) result.unit = all[i + 1];
        ++i;
      }
      continue;
    }
    rest.push_back(std::move(all[i]));
  }

  const auto& table = suffix_table();
  std::size_t suffix_at = 0;
  for (std::size_t i = rest.size(); i-- > 1;) {
    if (table.contains(rest[i])) {
      suffix_at = i;
      break;
    }
  }
  if (suffix_at == 0) {
    result.tokens = std::move(rest);
  } else {
    result.tokens.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(suffix_at));
    result.suffix = std::string(table.at(rest[suffix_at]));
    std::size_t tail_from = suffix_at + 1;
    if (tail_from < rest.size() && is_extension(rest[tail_from])) {
      result.suffix += " EXT";
      ++tail_from;
    }
    result.tail.assign(rest.begin() + static_cast<std::ptrdiff_t>(tail_from), rest.end());
  }

  if (result.tokens.empty() && result.suffix.empty() && !result.unit && result.tail.empty()) {
    throw Error(ErrorCode::EmptyAddress, "address is blank after normalization");
  }
  return result;
}

std::string route_key(const NormalizedAddress& address) {
  NormalizedAddress street;
  street.suffix = address.suffix;
  street.tokens = address.tokens;
  if (street.tokens.size() > 1 && starts_with_digit(street.tokens.front())) {
    street.tokens.erase(street.tokens.begin());
  }
  return street.street_key();
}

std::string normalize_street_name(std::string_view name) { return route_key(normalize_address(name)); }

int osa_distance(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<int> prev2(m + 1), prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        cur[j] = std::min(cur[j], prev2[j - 2] + 1);
      }
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

std::vector<MatchCandidate> geocode(std::string_view raw, GeocoderPort& geocoder) {
  (void)normalize_address(raw);
  std::vector<MatchCandidate> candidates = geocoder.lookup(raw);
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.address.place_id < b.address.place_id;
  });
  return candidates;
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::manual ? "manual" : "auto";
}

const JunctionEntry* Junction::find(std::string_view dataset, std::string_view key) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{dataset, key},
                             [](const JunctionEntry& e, const auto& k) {
                               return std::tie(e.source_dataset, e.source_key) <
                                      std::tie(k.first, k.second);
                             });
  if (it != entries.end() && it->source_dataset == dataset && it->source_key == key) return &*it;
  return nullptr;
}

namespace {

template <typename T>
void sort_by_record_key(std::vector<T>& items) {
  std::sort(items.begin(), items.end(), [](const T& a, const T& b) {
    if constexpr (std::is_same_v<T, JunctionEntry>) {
      return std::tie(a.source_dataset, a.source_key) < std::tie(b.source_dataset, b.source_key);
    } else {
      return std::tie(a.dataset, a.key) < std::tie(b.dataset, b.key);
    }
  });
}

}  // namespace

Junction build_junction(std::span<const LinkRecord> records, GeocoderPort& geocoder, double threshold,
                        int parallelism) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "match threshold must lie in [0,1]");
  }

  // Later duplicates of a (dataset, key) pair are ignored.
  std::vector<std::size_t> unique;
  {
    std::set<std::pair<std::string_view, std::string_view>> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (seen.emplace(records[i].dataset, records[i].key).second) unique.push_back(i);
    }
  }

  struct Outcome {
    std::vector<MatchCandidate> candidates;
    bool empty_address = false;
  };
  std::vector<Outcome> outcomes(unique.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const int threads = parallelism > 0 ? parallelism : omp_get_max_threads();
  const long count = static_cast<long>(unique.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads) if (geocoder.thread_safe())
  for (long i = 0; i < count; ++i) {
    const LinkRecord& rec = records[unique[static_cast<std::size_t>(i)]];
    try {
      outcomes[static_cast<std::size_t>(i)].candidates = geocode(rec.raw_address, geocoder);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyAddress) {
        outcomes[static_cast<std::size_t>(i)].empty_address = true;
      } else {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  Junction junction;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    const LinkRecord& rec = records[unique[i]];
    const Outcome& out = outcomes[i];
    if (out.empty_address) {
      junction.unmatched.push_back({rec.dataset, rec.key, rec.raw_address, "EmptyAddress", std::nullopt});
    } else if (out.candidates.empty()) {
      junction.unmatched.push_back({rec.dataset, rec.key, rec.raw_address, "no_candidates", std::nullopt});
    } else if (out.candidates.front().probability < threshold) {
      junction.unmatched.push_back(
          {rec.dataset, rec.key, rec.raw_address, "below_threshold", out.candidates.front()});
    } else {
      const auto& best = out.candidates.front();
      junction.entries.push_back(
          {rec.dataset, rec.key, best.address.place_id, best.probability, Provenance::automatic});
    }
  }
  sort_by_record_key(junction.entries);
  sort_by_record_key(junction.unmatched);
  return junction;
}

Junction apply_corrections(Junction junction, std::span<const Correction> overrides,
                           const std::set<std::string>& known_place_ids) {
  for (const auto& fix : overrides) {
    if (!known_place_ids.contains(fix.place_id)) {
      throw Error(ErrorCode::UnknownPlaceId, "correction for " + fix.dataset + "/" + fix.source_key +
                                                 " names unknown place_id " + fix.place_id);
    }
  }
  for (const auto& fix : overrides) {
    auto it = std::find_if(junction.entries.begin(), junction.entries.end(), [&](const JunctionEntry& e) {
      return e.source_dataset == fix.dataset && e.source_key == fix.source_key;
    });
    if (it != junction.entries.end()) {
      it->place_id = fix.place_id;
      it->probability = 1.0;
      it->provenance = Provenance::manual;
    } else {
      junction.entries.push_back({fix.dataset, fix.source_key, fix.place_id, 1.0, Provenance::manual});
    }
    std::erase_if(junction.unmatched, [&](const UnmatchedRecord& u) {
      return u.dataset == fix.dataset && u.key == fix.source_key;
    });
  }
  sort_by_record_key(junction.entries);
  return junction;
}

ChildParcelJoin children_by_parcel(const Junction& children, const Junction& parcels) {
  std::unordered_map<std::string_view, std::vector<std::string_view>> parcels_at_place;
  for (const auto& e : parcels.entries) parcels_at_place[e.place_id].push_back(e.source_key);

  ChildParcelJoin join;
  std::set<std::string> unmatched;
  for (const auto& e : children.entries) {
    auto it = parcels_at_place.find(e.place_id);
    if (it == parcels_at_place.end()) {
      unmatched.insert(e.source_key);
      continue;
    }
    for (const auto parcel : it->second) join.children_by_parcel[std::string(parcel)].insert(e.source_key);
  }
  for (const auto& u : children.unmatched) unmatched.insert(u.key);
  join.unmatched_children.assign(unmatched.begin(), unmatched.end());
  return join;
}

}  // namespace lslr
