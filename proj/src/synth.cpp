#include "lslr/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "lslr/geo.hpp"
#include "lslr/geocache.hpp"
#include "lslr/rng.hpp"

namespace lslr {

namespace {

// None of these are suffix words and no two are within two edits.
constexpr const char* kStreetNames[] = {
    "Maple",     "Pleasant",  "Ferry",    "Salem",      "Highland", "Winthrop", "Chestnut",  "Forest",
    "Greenleaf", "Lincoln",   "Washington", "Madison",  "Clifton",  "Beach",    "Summer",    "Winter",
    "Cross",     "Harvard",   "Dartmouth", "Princeton", "Bowdoin", "Emerson",  "Thoreau",   "Hawthorne",
    "Longfellow", "Whittier", "Franklin", "Jefferson",  "Monroe",   "Revere",   "Concord",   "Lexington",
    "Medford",   "Everett",   "Melrose",  "Saugus",     "Newton",   "Quincy",   "Dedham",    "Sycamore",
};
constexpr std::size_t kNameCount = std::size(kStreetNames);

struct SuffixForms {
  const char* canonical;
  const char* long_form;
  const char* variants[3];
};

constexpr SuffixForms kSuffixes[] = {
    {"ST", "Street", {"St.", "STREET", "Str"}},
    {"AVE", "Avenue", {"Ave.", "AVENUE", "Av"}},
    {"RD", "Road", {"Rd.", "ROAD", "rd"}},
};

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Street {
  std::string name;  // title case, e.g. "Maple"
  const SuffixForms* suffix;
  std::string route() const { return name + " " + suffix->long_form; }
};

Street street_for(std::size_t index) {
  Street s;
  s.name = kStreetNames[index % kNameCount];
  if (index >= kNameCount) s.name += " " + std::string(1, static_cast<char>('A' + index / kNameCount - 1));
  s.suffix = &kSuffixes[index % std::size(kSuffixes)];
  return s;
}

// Free-entry spelling of an address: suffix variants, case, punctuation,
// unit markers and a town tail. Always normalizes to the same street key.
std::string messy_address(const std::string& number, const Street& street, Rng& rng, double messy_rate) {
  if (!rng.bernoulli(messy_rate)) return number + " " + street.name + " " + street.suffix->long_form;
  std::string suffix = street.suffix->variants[rng.below(3)];
  std::string text = number + " " + street.name + " " + suffix;
  switch (rng.below(4)) {
    case 0: text = upper(text); break;
    case 1: text = lower(text); break;
    default: break;
  }
  switch (rng.below(4)) {
    case 0: text += " #" + std::to_string(1 + rng.below(4)); break;
    case 1: text += " Apt " + std::to_string(1 + rng.below(4)); break;
    default: break;
  }
  if (rng.bernoulli(0.5)) text += rng.bernoulli(0.5) ? ", Malden, MA 02148" : " malden ma";
  return text;
}

std::string place_id_for(std::uint64_t seed, std::size_t index) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "SYN%06zu%08llX", index,
                static_cast<unsigned long long>(derive_seed(seed, index) & 0xFFFFFFFFull));
  return buf;
}

GeoAddress make_place(std::uint64_t seed, std::size_t index, const std::string& number, const Street& street,
                      LatLon point) {
  GeoAddress g;
  g.place_id = place_id_for(seed, index);
  g.point = point;
  g.street_number = number;
  g.route = street.route();
  g.locality = "Malden";
  g.postal_code = "02148";
  g.formatted = number + " " + street.name + " " + street.suffix->canonical[0] +
                lower(std::string(street.suffix->canonical).substr(1)) + ", Malden, MA 02148, USA";
  return g;
}

// reference material mix as a sampling distribution over (private, public).
struct MaterialSampler {
  std::vector<std::pair<PipeMaterial, PipeMaterial>> cells;
  std::vector<double> cumulative;

  MaterialSampler() {
    const MaterialPivot counts = reference_material_counts();
    double acc = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 7; ++j) {
        if (counts[i][j] == 0) continue;
        acc += static_cast<double>(counts[i][j]);
        cells.emplace_back(kAllMaterials[i], kAllMaterials[j]);
        cumulative.push_back(acc);
      }
    }
  }

  std::pair<PipeMaterial, PipeMaterial> draw(Rng& rng) const {
    const double u = rng.uniform01() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return cells[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cells.size() - 1)];
  }
};

int poisson(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  int k = 0;
  double p = rng.uniform01();
  while (p > limit) {
    ++k;
    p *= rng.uniform01();
  }
  return k;
}

struct GridLayout {
  std::vector<double> xs;  // vertical street positions, meters
  std::vector<double> ys;  // horizontal street positions
};

// Parcels along one block of a street, both sides, with addresses numbered
// by block. `along` and `across` are unit vectors in the projection.
struct BlockSpec {
  const Street* street;
  std::size_t block;
  geo::XY start;
  geo::XY along;
  geo::XY across;
  double length;
  int per_side;
};

struct CityBuilder {
  std::uint64_t seed;
  geo::LocalProjection proj;
  SyntheticCity city;
  std::vector<std::size_t> parcels_of_block_start;  // per block, index of first parcel

  CityBuilder(std::uint64_t s, LatLon origin) : seed(s), proj(origin) {}

  void add_block(const BlockSpec& b, Rng& rng) {
    parcels_of_block_start.push_back(city.parcels.size());
    for (int k = 0; k < b.per_side; ++k) {
      const double t = (k + 0.5) / b.per_side * b.length;
      for (int side = 0; side < 2; ++side) {
        const double off = side ? -12.0 : 12.0;
        const geo::XY xy{b.start.x + b.along.x * t + b.across.x * off, b.start.y + b.along.y * t + b.across.y * off};
        const std::string number = std::to_string(100 * (b.block + 1) + 2 * k + 1 + side);
        const std::size_t index = city.parcels.size();
        Parcel p;
        char id[24];
        std::snprintf(id, sizeof id, "P%06zu", index);
        p.parcel_id = id;
        p.address = upper(number + " " + b.street->name + " " + b.street->suffix->canonical);
        p.centroid = proj.unproject(xy);
        p.year_built = static_cast<int>(rng.between(1880, 2015));
        GeoAddress g = make_place(seed, index, number, *b.street, p.centroid);
        city.parcel_place[p.parcel_id] = g.place_id;
        city.gazetteer.push_back(std::move(g));
        city.parcels.push_back(std::move(p));
      }
    }
  }

  // Streets run along every grid line; each contributes one centerline and
  // one block spec per gap between cross streets.
  std::vector<BlockSpec> layout(const GridLayout& grid, std::vector<Street>& streets, double spacing) {
    std::vector<BlockSpec> blocks;
    const std::size_t h = grid.ys.size(), v = grid.xs.size();
    streets.clear();
    for (std::size_t i = 0; i < h + v; ++i) streets.push_back(street_for(i));
    for (std::size_t i = 0; i < h; ++i) {
      Centerline c{streets[i].route(), {}};
      for (std::size_t j = 0; j < v; ++j) c.polyline.push_back(proj.unproject({grid.xs[j], grid.ys[i]}));
      city.centerlines.push_back(std::move(c));
    }
    for (std::size_t j = 0; j < v; ++j) {
      Centerline c{streets[h + j].route(), {}};
      for (std::size_t i = 0; i < h; ++i) c.polyline.push_back(proj.unproject({grid.xs[j], grid.ys[i]}));
      city.centerlines.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j + 1 < v; ++j) {
        const double len = grid.xs[j + 1] - grid.xs[j];
        blocks.push_back({&streets[i], j, {grid.xs[j], grid.ys[i]}, {1, 0}, {0, 1}, len,
                          std::max(1, static_cast<int>(len / spacing))});
      }
    }
    for (std::size_t j = 0; j < v; ++j) {
      for (std::size_t i = 0; i + 1 < h; ++i) {
        const double len = grid.ys[i + 1] - grid.ys[i];
        blocks.push_back({&streets[h + j], i, {grid.xs[j], grid.ys[i]}, {0, 1}, {-1, 0}, len,
                          std::max(1, static_cast<int>(len / spacing))});
      }
    }
    return blocks;
  }

  void add_child(std::size_t parcel_index, std::optional<int> grade, std::optional<double> age, Rng& rng,
                 double messy_rate) {
    const Parcel& p = city.parcels[parcel_index];
    const GeoAddress& g = city.gazetteer[parcel_index];
    ChildRecord c;
    char id[24];
    std::snprintf(id, sizeof id, "C%06zu", city.children.size());
    c.child_id = id;
    c.grade = grade;
    c.age_years = age;
    // Recover the street from the gazetteer route ("Maple Street").
    const auto space = g.route.rfind(' ');
    Street s;
    s.name = g.route.substr(0, space);
    s.suffix = &kSuffixes[0];
    for (const auto& sf : kSuffixes) {
      if (g.route.substr(space + 1) == sf.long_form) s.suffix = &sf;
    }
    c.raw_address = messy_address(g.street_number, s, rng, messy_rate);
    city.child_parcel[c.child_id] = p.parcel_id;
    city.children.push_back(std::move(c));
  }
};

}  // namespace

MaterialPivot reference_material_counts() {
  // Rows private side, columns public (city) side, both in kAllMaterials
  // order: brass, iron, copper, lead, pvc, steel, unknown.
  MaterialPivot t{};
  auto row = [&](PipeMaterial m) -> std::array<long, 7>& { return t[static_cast<std::size_t>(m)]; };
  row(PipeMaterial::iron) = {0, 46, 77, 5, 0, 2, 87};
  row(PipeMaterial::copper) = {5, 6, 5516, 975, 2, 24, 1275};
  row(PipeMaterial::steel) = {0, 0, 0, 0, 0, 0, 3};
  row(PipeMaterial::lead) = {1, 0, 1415, 267, 0, 6, 1049};
  row(PipeMaterial::unknown) = {0, 1, 32, 7, 0, 0, 282};
  return t;
}

std::vector<ServiceLine> expand_pivot(const MaterialPivot& counts) {
  std::vector<ServiceLine> lines;
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) {
      for (long n = 0; n < counts[i][j]; ++n) {
        ServiceLine l;
        char id[24];
        std::snprintf(id, sizeof id, "T%06zu", lines.size() + 1);
        l.parcel_id = id;
        l.private_material = kAllMaterials[i];
        l.public_material = kAllMaterials[j];
        lines.push_back(std::move(l));
      }
    }
  }
  return lines;
}

SyntheticCity generate_city(const CityOptions& options) {
  if (options.horizontal_streets < 2 || options.vertical_streets < 2) {
    throw Error(ErrorCode::InvalidArgument, "a city needs at least two streets each way");
  }
  if (!(options.block_min_m > 0.0 && options.block_max_m >= options.block_min_m)) {
    throw Error(ErrorCode::InvalidArgument, "block lengths must satisfy 0 < min <= max");
  }
  Rng rng(options.seed);
  CityBuilder b(options.seed, options.origin);

  GridLayout grid;
  grid.xs.push_back(0.0);
  for (int j = 1; j < options.vertical_streets; ++j) {
    grid.xs.push_back(grid.xs.back() + rng.uniform(options.block_min_m, options.block_max_m));
  }
  grid.ys.push_back(0.0);
  for (int i = 1; i < options.horizontal_streets; ++i) {
    grid.ys.push_back(grid.ys.back() + rng.uniform(options.block_min_m, options.block_max_m));
  }
  std::vector<Street> streets;
  const auto blocks = b.layout(grid, streets, options.parcel_spacing_m);
  for (const auto& block : blocks) b.add_block(block, rng);

  const MaterialSampler sampler;
  for (const auto& p : b.city.parcels) {
    const auto [priv, pub] = sampler.draw(rng);
    ServiceLine l;
    l.parcel_id = p.parcel_id;
    l.private_material = priv;
    l.public_material = pub;
    const bool any_unknown = priv == PipeMaterial::unknown || pub == PipeMaterial::unknown;
    if (any_unknown) l.lead_probability = std::round(rng.uniform01() * 100.0) / 100.0;
    b.city.lines.push_back(std::move(l));
  }

  std::vector<geo::XY> centers;
  for (int k = 0; k < options.clusters; ++k) {
    centers.push_back({rng.uniform(0.0, grid.xs.back()), rng.uniform(0.0, grid.ys.back())});
  }
  const double two_r2 = 2.0 * options.cluster_radius_m * options.cluster_radius_m;
  for (std::size_t i = 0; i < b.city.parcels.size(); ++i) {
    const geo::XY xy = b.proj.project(b.city.parcels[i].centroid);
    double mean = options.children_per_parcel;
    for (const auto& c : centers) {
      const double d2 = (xy.x - c.x) * (xy.x - c.x) + (xy.y - c.y) * (xy.y - c.y);
      mean += options.cluster_boost * std::exp(-d2 / two_r2);
    }
    const int kids = poisson(rng, mean);
    for (int k = 0; k < kids; ++k) {
      if (rng.bernoulli(0.2)) {
        b.add_child(i, std::nullopt, std::round(rng.uniform(4.0, 19.0) * 4.0) / 4.0, rng,
                    options.messy_address_rate);
      } else {
        b.add_child(i, static_cast<int>(rng.between(0, 12)), std::nullopt, rng, options.messy_address_rate);
      }
    }
  }
  return std::move(b.city);
}

double reference_curve_target(double k) {
  if (k <= 0.0) return 0.0;
  for (std::size_t i = 1; i < std::size(kReferenceCurveAnchors); ++i) {
    const auto [k1, f1] = kReferenceCurveAnchors[i];
    if (k <= k1) {
      const auto [k0, f0] = kReferenceCurveAnchors[i - 1];
      return f0 + (f1 - f0) * (k - k0) / (k1 - k0);
    }
  }
  return 1.0;
}

SyntheticCity generate_reference_curve_city(const CalibratedCityOptions& options) {
  const int n = options.streets_per_direction;
  const std::size_t blocks_total = 2u * static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1);
  const int valued = kReferenceCurveAnchors[std::size(kReferenceCurveAnchors) - 1].first;
  if (blocks_total < static_cast<std::size_t>(valued)) {
    throw Error(ErrorCode::InvalidArgument, "calibrated city needs at least " + std::to_string(valued) + " blocks");
  }
  if (options.block_m > 150.0) {
    throw Error(ErrorCode::InvalidArgument, "calibrated blocks must not exceed the 150 m split length");
  }
  Rng rng(options.seed);
  CityBuilder b(options.seed, options.origin);
  GridLayout grid;
  for (int i = 0; i < n; ++i) {
    grid.xs.push_back(i * options.block_m);
    grid.ys.push_back(i * options.block_m);
  }
  std::vector<Street> streets;
  const auto blocks = b.layout(grid, streets, options.block_m / options.parcels_per_side);
  for (const auto& block : blocks) b.add_block(block, rng);

  const MaterialSampler sampler;
  for (const auto& p : b.city.parcels) {
    const auto [priv, pub] = sampler.draw(rng);
    b.city.lines.push_back({p.parcel_id, pub, priv, std::nullopt});
  }

  // Values by rank, rounded to half years with error carried forward so the
  // cumulative sums track the target curve.
  auto half = [](double x) { return std::round(x * 2.0) / 2.0; };
  std::vector<double> values;
  for (int k = 1; k <= valued; ++k) {
    values.push_back(half(options.total_exposure_years * reference_curve_target(k)) -
                     half(options.total_exposure_years * reference_curve_target(k - 1)));
  }

  std::vector<std::size_t> order(blocks.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  for (int k = 0; k < valued; ++k) {
    const std::size_t block = order[static_cast<std::size_t>(k)];
    const std::size_t first = b.parcels_of_block_start[block];
    const std::size_t count = 2u * static_cast<std::size_t>(blocks[block].per_side);
    std::vector<double> years;
    double remaining = values[static_cast<std::size_t>(k)];
    while (remaining > 13.0) {
      const double t = 0.5 + static_cast<double>(rng.between(0, 12));
      years.push_back(t);
      remaining -= t;
    }
    if (remaining > 0.0) {
      if (std::fmod(remaining, 1.0) != 0.0) {
        years.push_back(remaining);
      } else {
        years.push_back(0.5);
        years.push_back(remaining - 0.5);
      }
    }
    for (std::size_t c = 0; c < years.size(); ++c) {
      const std::size_t parcel = first + c % count;
      // Known private lead: weight 1 under every lead-status policy.
      b.city.lines[parcel].private_material = PipeMaterial::lead;
      const int grade = static_cast<int>(12.5 - years[c]);
      b.add_child(parcel, grade, std::nullopt, rng, 0.5);
    }
  }
  // Every block keeps at least one lead line so it stays a project.
  for (std::size_t block = 0; block < blocks.size(); ++block) {
    b.city.lines[b.parcels_of_block_start[block]].private_material = PipeMaterial::lead;
  }
  return std::move(b.city);
}

TypoCorpus typo_corpus(std::uint64_t seed, std::size_t size, double typo_rate) {
  Rng rng(seed);
  TypoCorpus corpus;
  const std::size_t street_count = 20, numbers = 30;
  std::vector<Street> streets;
  for (std::size_t s = 0; s < street_count; ++s) streets.push_back(street_for(s));
  const geo::LocalProjection proj(LatLon{42.4251, -71.0662});
  for (std::size_t s = 0; s < street_count; ++s) {
    for (std::size_t k = 0; k < numbers; ++k) {
      const std::size_t index = corpus.gazetteer.size();
      corpus.gazetteer.push_back(make_place(seed, index, std::to_string(2 * k + 1), streets[s],
                                            proj.unproject({s * 150.0, k * 20.0})));
    }
  }
  if (size > corpus.gazetteer.size()) throw Error(ErrorCode::InvalidArgument, "corpus larger than gazetteer");

  std::vector<std::size_t> pick(corpus.gazetteer.size());
  std::iota(pick.begin(), pick.end(), 0);
  for (std::size_t i = 0; i < size; ++i) std::swap(pick[i], pick[i + rng.below(pick.size() - i)]);
  const auto typos = static_cast<std::size_t>(std::llround(typo_rate * static_cast<double>(size)));

  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t g = pick[i];
    const std::size_t s = g / numbers;
    Street street = streets[s];
    char key[24];
    std::snprintf(key, sizeof key, "R%03zu", i);
    if (i < typos) {
      std::string name = upper(street.name);
      for (;;) {
        std::string edited = name;
        const std::size_t pos = 1 + rng.below(edited.size() - 2);
        const char letter = static_cast<char>('A' + rng.below(26));
        switch (rng.below(4)) {
          case 0: edited[pos] = letter; break;
          case 1: std::swap(edited[pos], edited[pos + 1]); break;
          case 2: edited.erase(pos, 1); break;
          default: edited.insert(pos, 1, letter); break;
        }
        if (edited == name) continue;
        bool clashes = false;
        for (const auto& other : streets) clashes = clashes || upper(other.name) == edited;
        if (clashes) continue;
        street.name = edited;
        break;
      }
      corpus.typo_keys.push_back(key);
    }
    corpus.records.push_back({"corpus", key, messy_address(corpus.gazetteer[g].street_number, street, rng, 0.7)});
    corpus.truth[key] = corpus.gazetteer[g].place_id;
  }
  std::sort(corpus.typo_keys.begin(), corpus.typo_keys.end());
  return corpus;
}

void write_city(const SyntheticCity& city, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::FileUnreadable, "cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "students.csv", write_students_csv(city.children));
  write_text_file(dir / "service_lines.csv", write_service_lines_csv(city.lines));
  write_text_file(dir / "parcels.geojson", parcels_geojson(city.parcels).dump(1) + "\n");
  write_text_file(dir / "segments.geojson", centerlines_geojson(city.centerlines).dump(1) + "\n");
  write_text_file(dir / "gazetteer.json", gazetteer_json(city.gazetteer).dump(1) + "\n");
  std::string truth = "child_id,parcel_id,place_id\n";
  for (const auto& [child, parcel] : city.child_parcel) {
    truth += child + "," + parcel + "," + city.parcel_place.at(parcel) + "\n";
  }
  write_text_file(dir / "truth.csv", truth);
}

}  // namespace lslr
