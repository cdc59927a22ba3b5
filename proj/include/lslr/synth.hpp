#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lslr/core.hpp"
#include "lslr/ingest.hpp"
#include "lslr/linkage.hpp"
#include "lslr/partitioning.hpp"

namespace lslr {

// Synthetic municipal snapshot with the ground truth the generator used.
struct SyntheticCity {
  std::vector<GeoAddress> gazetteer;     // one place per parcel
  std::vector<Parcel> parcels;           // place_id left empty; linkage fills it
  std::vector<ServiceLine> lines;        // one per parcel
  std::vector<ChildRecord> children;
  std::vector<Centerline> centerlines;   // one per street, unsplit
  std::map<std::string, std::string> child_parcel;   // child_id -> parcel_id
  std::map<std::string, std::string> parcel_place;   // parcel_id -> place_id
};

struct CityOptions {
  std::uint64_t seed = 1;
  int horizontal_streets = 10;
  int vertical_streets = 10;
  double block_min_m = 80.0;
  double block_max_m = 200.0;
  double parcel_spacing_m = 25.0;   // frontage per parcel on each side
  int clusters = 3;                 // child hot spots
  double cluster_radius_m = 250.0;
  double children_per_parcel = 0.15;  // mean far from any cluster
  double cluster_boost = 1.5;         // extra mean at a cluster center
  double messy_address_rate = 0.3;    // suffix / case / punctuation variants
  LatLon origin{42.4251, -71.0662};
};

/// Grid city with varied block lengths, materials drawn from the reference
/// mix and children clustered around a few hot spots.
SyntheticCity generate_city(const CityOptions& options);

// Reference cumulative curve: (project index, cumulative fraction).
inline constexpr std::pair<int, double> kReferenceCurveAnchors[] = {
    {0, 0.0},     {5, 0.103},   {10, 0.155},  {20, 0.227},  {50, 0.372},  {100, 0.530},
    {150, 0.645}, {200, 0.732}, {300, 0.864}, {400, 0.947}, {500, 1.0}};

/// Target fraction at index k from the anchors, linear in between.
double reference_curve_target(double k);

struct CalibratedCityOptions {
  std::uint64_t seed = 1;
  int streets_per_direction = 17;
  double block_m = 120.0;
  int parcels_per_side = 4;
  double total_exposure_years = 5000.0;
  LatLon origin{42.4251, -71.0662};
};

/// City whose projects (under the default 150 m split) carry values that
/// follow the reference curve: 500 valued projects, the rest zero.
SyntheticCity generate_reference_curve_city(const CalibratedCityOptions& options);

/// Reference service-line counts, [private][public] in kAllMaterials order.
MaterialPivot reference_material_counts();
/// One ServiceLine per counted line, parcel ids "T000001"...
std::vector<ServiceLine> expand_pivot(const MaterialPivot& counts);

struct TypoCorpus {
  std::vector<GeoAddress> gazetteer;
  std::vector<LinkRecord> records;
  std::map<std::string, std::string> truth;  // record key -> place_id
  std::vector<std::string> typo_keys;        // records that received a typo
};

/// `size` addresses from a synthetic gazetteer written with varied suffix
/// spellings, case and punctuation; `typo_rate` of them also get one
/// character edit in the street name.
TypoCorpus typo_corpus(std::uint64_t seed, std::size_t size = 200, double typo_rate = 0.1);

/// Writes students.csv, service_lines.csv, parcels.geojson,
/// segments.geojson (centerlines), gazetteer.json and truth.csv.
void write_city(const SyntheticCity& city, const std::filesystem::path& dir);

}  // namespace lslr
