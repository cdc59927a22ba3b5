#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lslr/core.hpp"

namespace lslr {

class GeocoderPort;

// Uppercase street address with its suffix canonicalized and any unit marker
// pulled out. Tokens after the suffix (town, state, postcode) land in `tail`.
struct NormalizedAddress {
  std::vector<std::string> tokens;
  std::string suffix;  // canonical, e.g. "ST" or "ST EXT"; empty if none found
  std::optional<std::string> unit;
  std::vector<std::string> tail;

  /// Street part only: tokens followed by the suffix.
  std::string street_key() const;
  /// Full canonical rendering; normalize_address(x.to_string()) == x.
  std::string to_string() const;

  friend bool operator==(const NormalizedAddress&, const NormalizedAddress&) = default;
};

NormalizedAddress normalize_address(std::string_view raw);

/// Street name without the leading house number: "12 Maple Street" and
/// "Maple St" both give "MAPLE ST".
std::string route_key(const NormalizedAddress& address);

/// "Maple Street" -> "MAPLE ST". Used to compare parcel routes with
/// centerline names.
std::string normalize_street_name(std::string_view name);

/// Optimal string alignment distance (Damerau-Levenshtein restricted to
/// non-overlapping transpositions).
int osa_distance(std::string_view a, std::string_view b);

/// Validates the input, queries the geocoder and returns candidates sorted by
/// descending probability, ties by place_id.
std::vector<MatchCandidate> geocode(std::string_view raw, GeocoderPort& geocoder);

enum class Provenance { automatic, manual };

std::string_view to_string(Provenance provenance);

struct JunctionEntry {
  std::string source_dataset;
  std::string source_key;
  std::string place_id;
  double probability = 0.0;
  Provenance provenance = Provenance::automatic;

  friend bool operator==(const JunctionEntry&, const JunctionEntry&) = default;
};

struct LinkRecord {
  std::string dataset;
  std::string key;
  std::string raw_address;
};

struct UnmatchedRecord {
  std::string dataset;
  std::string key;
  std::string raw_address;
  std::string reason;  // no_candidates, below_threshold, EmptyAddress
  std::optional<MatchCandidate> best;
};

struct Junction {
  std::vector<JunctionEntry> entries;      // sorted by (dataset, key)
  std::vector<UnmatchedRecord> unmatched;  // sorted by (dataset, key)

  const JunctionEntry* find(std::string_view dataset, std::string_view key) const;
};

inline constexpr double kDefaultMatchThreshold = 0.85;

/// Links every record whose top candidate reaches `threshold`; the rest go to
/// the unmatched list for manual correction. Geocoding runs on up to
/// `parallelism` threads (0 = OpenMP default) when the geocoder is
/// thread-safe; the result does not depend on completion order.
Junction build_junction(std::span<const LinkRecord> records, GeocoderPort& geocoder,
                        double threshold = kDefaultMatchThreshold, int parallelism = 0);

struct Correction {
  std::string dataset;
  std::string source_key;
  std::string place_id;
};

Junction apply_corrections(Junction junction, std::span<const Correction> overrides,
                           const std::set<std::string>& known_place_ids);

struct ChildParcelJoin {
  std::map<std::string, std::set<std::string>> children_by_parcel;
  std::vector<std::string> unmatched_children;  // sorted
};

/// A child belongs to a parcel iff both resolve to the same place_id.
ChildParcelJoin children_by_parcel(const Junction& children, const Junction& parcels);

}  // namespace lslr
