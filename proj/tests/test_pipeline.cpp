#include <gtest/gtest.h>

#include <filesystem>

#include "lslr/geocoder.hpp"
#include "lslr/ingest.hpp"
#include "lslr/pipeline.hpp"
#include "lslr/policy_sim.hpp"
#include "lslr/synth.hpp"

using namespace lslr;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

bool has_kind(const ValidationReport& r, const std::string& kind) {
  return std::any_of(r.defects.begin(), r.defects.end(), [&](const Defect& d) { return d.kind == kind; });
}

}  // namespace

TEST(Validate, Empty) {
  const auto r = validate_snapshot({}, {}, {}, {});
  EXPECT_TRUE(r.usable);
  EXPECT_TRUE(r.defects.empty());
}

TEST(Validate, DanglingLine) {
  std::vector<ServiceLine> lines{{"ghost", PipeMaterial::lead, PipeMaterial::lead, std::nullopt}};
  const auto r = validate_snapshot({}, lines, {}, {});
  EXPECT_FALSE(r.usable);
  EXPECT_TRUE(has_kind(r, "dangling_reference"));
}

TEST(Validate, GradeOutOfRange) {
  std::vector<ChildRecord> kids{{"c1", 13, std::nullopt, "1 Elm St"}};
  const auto r = validate_snapshot({}, {}, kids, {});
  EXPECT_TRUE(has_kind(r, "out_of_range"));
  EXPECT_FALSE(r.usable);
}

TEST(Validate, DuplicateAndDanglingChild) {
  std::vector<Parcel> ps(2);
  ps[0].parcel_id = ps[1].parcel_id = "p1";
  ps[0].address = ps[1].address = "1 Elm St";
  std::vector<ChildRecord> kids{{"c1", 3, std::nullopt, "1 Elm St"}};
  const auto r = validate_snapshot(ps, {}, kids, {}, {{"c1", "p9"}});
  EXPECT_TRUE(has_kind(r, "duplicate_key"));
  EXPECT_TRUE(has_kind(r, "dangling_reference"));
}

TEST(Config, Checks) {
  PlanConfig c;
  EXPECT_NO_THROW(check_config(c));
  c.per_line_cost = 0;
  EXPECT_THROW(check_config(c), Error);
  EXPECT_EQ(to_string(parse_lead_policy("year:1940")), "year:1940");
  EXPECT_EQ(to_string(parse_lead_policy("fixed:0.25")), "fixed:0.25");
  EXPECT_THROW(parse_lead_policy("sometimes"), Error);
}

TEST(Synth, CityIsConsistent) {
  CityOptions opt;
  opt.seed = 5;
  const auto a = generate_city(opt);
  const auto b = generate_city(opt);
  EXPECT_EQ(a.parcel_place, b.parcel_place);
  EXPECT_EQ(a.parcels.size(), a.lines.size());
  EXPECT_EQ(a.gazetteer.size(), a.parcels.size());
  EXPECT_EQ(a.child_parcel.size(), a.children.size());
  EXPECT_GT(a.children.size(), 0u);
  const auto r = validate_snapshot(a.parcels, a.lines, a.children, {});
  EXPECT_TRUE(r.usable);
}

TEST(Synth, ReferenceAnchorsInterpolate) {
  EXPECT_DOUBLE_EQ(reference_curve_target(100), 0.530);
  EXPECT_NEAR(reference_curve_target(75), (0.372 + 0.530) / 2, 1e-12);
  EXPECT_DOUBLE_EQ(reference_curve_target(500), 1.0);
}

TEST(Pipeline, EndToEndFromFiles) {
  CityOptions opt;
  opt.seed = 8;
  const auto city = generate_city(opt);
  const auto dir = fresh_dir("lslr_pipeline_test");
  write_city(city, dir);
  SnapshotPaths paths;
  paths.students = dir / "students.csv";
  paths.lines = dir / "service_lines.csv";
  paths.parcels = dir / "parcels.geojson";
  paths.segments = dir / "segments.geojson";
  auto loaded = load_inputs(paths);
  EXPECT_TRUE(loaded.warnings.empty());
  EXPECT_EQ(loaded.inputs.parcels.size(), city.parcels.size());
  MockGeocoder geo(load_gazetteer(dir / "gazetteer.json"));
  const Snapshot snap = build_snapshot(loaded.inputs, geo);
  ASSERT_TRUE(snap.report.usable);
  EXPECT_TRUE(snap.junction.unmatched.empty());
  EXPECT_FALSE(snap.projects.empty());

  // Same city built in memory gives the same projects.
  SnapshotInputs in;
  in.parcels = city.parcels;
  in.lines = city.lines;
  in.children = city.children;
  in.centerlines = city.centerlines;
  MockGeocoder geo2(city.gazetteer);
  const Snapshot mem = build_snapshot(in, geo2);
  ASSERT_EQ(mem.projects.size(), snap.projects.size());
  for (std::size_t i = 0; i < mem.projects.size(); ++i) {
    EXPECT_EQ(mem.projects[i].project_id, snap.projects[i].project_id);
    EXPECT_EQ(mem.projects[i].value_exposure_years, snap.projects[i].value_exposure_years);
  }
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, CorrectionsApplied) {
  CityOptions opt;
  opt.seed = 9;
  opt.horizontal_streets = 4;
  opt.vertical_streets = 4;
  auto city = generate_city(opt);
  ASSERT_FALSE(city.children.empty());
  city.children[0].raw_address = "1 Nowhere Lane";
  SnapshotInputs in;
  in.parcels = city.parcels;
  in.lines = city.lines;
  in.children = city.children;
  in.centerlines = city.centerlines;
  MockGeocoder geo(city.gazetteer);
  const auto without = build_snapshot(in, geo);
  ASSERT_EQ(without.junction.unmatched.size(), 1u);

  const std::string kid = city.children[0].child_id;
  const std::string place = city.parcel_place.at(city.child_parcel.at(kid));
  in.corrections = {{kStudentsDataset, kid, place}};
  for (const auto& g : city.gazetteer) in.place_universe.insert(g.place_id);
  const auto with = build_snapshot(in, geo);
  EXPECT_TRUE(with.junction.unmatched.empty());
  EXPECT_TRUE(with.join.children_by_parcel.at(city.child_parcel.at(kid)).count(kid));
}

TEST(Pipeline, CalibratedCityFollowsReferenceCurve) {
  const auto city = generate_reference_curve_city({});
  SnapshotInputs in;
  in.parcels = city.parcels;
  in.lines = city.lines;
  in.children = city.children;
  in.centerlines = city.centerlines;
  MockGeocoder geo(city.gazetteer);
  const auto snap = build_snapshot(in, geo);
  ASSERT_TRUE(snap.report.usable);
  const auto curve = cumulative_curve(snap.projects);
  const std::vector<std::size_t> idx{5, 10, 20, 50, 100, 200, 400};
  const double expected[] = {10.3, 15.5, 22.7, 37.2, 53.0, 73.2, 94.7};
  const auto table = quantile_table(curve, idx);
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_NEAR(table[i].percent, expected[i], 0.5) << idx[i];
}
