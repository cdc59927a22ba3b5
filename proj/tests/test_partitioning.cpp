#include <gtest/gtest.h>

#include <random>

#include "lslr/geo.hpp"
#include "lslr/partitioning.hpp"
#include "lslr/pipeline.hpp"
#include "lslr/synth.hpp"
#include "oracles.hpp"

using namespace lslr;

namespace {

const LatLon kOrigin{42.42, -71.07};

LatLon offset(double east_m, double north_m) {
  const geo::LocalProjection proj(kOrigin);
  return proj.unproject({east_m, north_m});
}

Centerline straight(std::string name, double x0, double y0, double x1, double y1) {
  return {std::move(name), {offset(x0, y0), offset(x1, y1)}};
}

Parcel parcel_at(std::string id, std::string address, double x, double y) {
  Parcel p;
  p.parcel_id = std::move(id);
  p.address = std::move(address);
  p.centroid = offset(x, y);
  return p;
}

}  // namespace

TEST(Geo, HaversineKnownDistance) {
  // One degree of latitude on the mean sphere.
  EXPECT_NEAR(geo::haversine_m({0, 0}, {1, 0}), 111195.08, 0.01);
  EXPECT_DOUBLE_EQ(geo::haversine_m(kOrigin, kOrigin), 0.0);
}

TEST(Geo, ProjectionRoundTrip) {
  const geo::LocalProjection proj(kOrigin);
  const auto back = proj.project(proj.unproject({123.0, -456.0}));
  EXPECT_NEAR(back.x, 123.0, 1e-9);
  EXPECT_NEAR(back.y, -456.0, 1e-9);
}

TEST(Split, ShortStreetSingleSegment) {
  std::vector<Centerline> c{straight("Elm Street", 0, 0, 0, 120)};
  const auto s = split_streets(c, 150);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0].length_m, 120.0, 0.01);
  EXPECT_EQ(s[0].street_name, "ELM ST");
}

TEST(Split, LongStreetEvenHalves) {
  std::vector<Centerline> c{straight("Elm St", 0, 0, 0, 300)};
  const auto s = split_streets(c, 150);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0].length_m, 150.0, 0.01);
  EXPECT_NEAR(s[1].length_m, 150.0, 0.01);
  EXPECT_NEAR(s[0].length_m, s[1].length_m, 1e-6);
  Project a, b;
  a.length_m = s[0].length_m;
  b.length_m = s[1].length_m;
  EXPECT_NEAR(project_cost_length(a), project_cost_length(b), 1e-6);
}

TEST(Split, DegenerateRejected) {
  std::vector<Centerline> c{straight("Elm St", 0, 0, 0, 0)};
  try {
    split_streets(c, 150);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateGeometry);
  }
}

TEST(Split, GridSegmentsEqualIntersectionGraphEdges) {
  // Three east-west streets crossing two north-south streets, all extending
  // past the outermost crossings.
  std::vector<Centerline> c;
  const double ys[] = {0, 100, 200};
  const double xs[] = {50, 150};
  for (double y : ys) c.push_back(straight("H" + std::to_string(int(y)) + " St", 0, y, 200, y));
  for (double x : xs) c.push_back(straight("V" + std::to_string(int(x)) + " Ave", x, -50, x, 250));

  // Graph: nodes are endpoints and crossings; each street contributes
  // (nodes on it - 1) edges.
  std::size_t edges = 0;
  for (std::size_t i = 0; i < std::size(ys); ++i) edges += (2 + std::size(xs)) - 1;
  for (std::size_t i = 0; i < std::size(xs); ++i) edges += (2 + std::size(ys)) - 1;

  const auto s = split_streets(c, 500);
  EXPECT_EQ(s.size(), edges);
  EXPECT_EQ(s.size(), 17u);
}

TEST(Split, SegmentIdsInInputOrder) {
  std::vector<Centerline> c{straight("A St", 0, 0, 0, 100), straight("B St", 500, 0, 500, 100)};
  const auto s = split_streets(c, 150);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_LT(s[0].segment_id, s[1].segment_id);
  EXPECT_EQ(s[0].street_name, "A ST");
}

TEST(Assign, SingleCandidate) {
  const auto segs = split_streets(std::vector<Centerline>{straight("Elm St", 0, 0, 0, 100)}, 150);
  std::vector<Parcel> p{parcel_at("p1", "5 Elm St", 10, 50)};
  const auto a = assign_parcels(p, segs);
  EXPECT_EQ(a.segment_of.at("p1"), segs[0].segment_id);
  EXPECT_TRUE(a.flagged.empty());
}

TEST(Assign, TieGoesToLowerId) {
  const auto segs = split_streets(std::vector<Centerline>{straight("Elm St", 0, 0, 0, 200)}, 100);
  ASSERT_EQ(segs.size(), 2u);
  // Exactly abeam the shared endpoint.
  const LatLon mid = segs[0].polyline.back();
  Parcel p;
  p.parcel_id = "p1";
  p.address = "5 Elm St";
  p.centroid = {mid.lat, mid.lon + 0.0001};
  std::vector<Parcel> ps{p};
  EXPECT_EQ(assign_parcels(ps, segs).segment_of.at("p1"), segs[0].segment_id);
  EXPECT_EQ(reference::assign_parcels(ps, segs).segment_of.at("p1"), segs[0].segment_id);
}

TEST(Assign, WrongStreetNameIsFlagged) {
  const auto segs = split_streets(std::vector<Centerline>{straight("Elm St", 0, 0, 0, 100)}, 150);
  std::vector<Parcel> p{parcel_at("p1", "5 Oak St", 10, 50)};
  const auto a = assign_parcels(p, segs);
  EXPECT_EQ(a.segment_of.at("p1"), segs[0].segment_id);
  EXPECT_EQ(a.flagged, (std::vector<std::string>{"p1"}));
}

TEST(Assign, RandomParcelsMatchBruteForce) {
  std::vector<Centerline> c{{"Main St", {offset(0, 0), offset(150, 40), offset(300, 10), offset(420, 200)}},
                            straight("Main St", 420, 200, 420, 600),
                            straight("Side Rd", 0, 0, 0, 500)};
  const auto segs = split_streets(c, 60);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ux(-50, 470), uy(-50, 650);
  std::vector<Parcel> parcels;
  for (int i = 0; i < 2000; ++i) {
    parcels.push_back(parcel_at("p" + std::to_string(i), i % 3 ? "1 Main Street" : "1 Side Road", ux(gen), uy(gen)));
  }
  const auto a = assign_parcels(parcels, segs);
  EXPECT_EQ(a.segment_of, reference::assign_parcels(parcels, segs).segment_of);
  for (const auto& p : parcels) {
    const std::string name = p.address.find("Main") != std::string::npos ? "MAIN ST" : "SIDE RD";
    double best = INFINITY;
    for (const auto& s : segs) {
      if (s.street_name == name) best = std::min(best, oracle::point_polyline_m(p.centroid, s.polyline));
    }
    const auto& chosen = *std::find_if(segs.begin(), segs.end(),
                                       [&](const StreetSegment& s) { return s.segment_id == a.segment_of.at(p.parcel_id); });
    ASSERT_EQ(chosen.street_name, name);
    ASSERT_NEAR(oracle::point_polyline_m(p.centroid, chosen.polyline), best, 1e-6) << p.parcel_id;
  }
}

TEST(Projects, NoLeadNoProject) {
  const auto segs = split_streets(std::vector<Centerline>{straight("Elm St", 0, 0, 0, 100)}, 150);
  std::vector<Parcel> p{parcel_at("p1", "5 Elm St", 10, 50)};
  std::vector<ServiceLine> l{{"p1", PipeMaterial::copper, PipeMaterial::copper, std::nullopt}};
  EXPECT_TRUE(build_projects(segs, assign_parcels(p, segs), l, p, ConservativeAllUnknownLead{}).empty());
}

TEST(Projects, LeadSidesCounted) {
  const auto segs = split_streets(std::vector<Centerline>{straight("Elm St", 0, 0, 0, 100)}, 150);
  std::vector<Parcel> p{parcel_at("p1", "1 Elm St", 10, 20), parcel_at("p2", "3 Elm St", 10, 50),
                        parcel_at("p3", "5 Elm St", 10, 80)};
  std::vector<ServiceLine> l{{"p1", PipeMaterial::lead, PipeMaterial::copper, std::nullopt},
                             {"p2", PipeMaterial::copper, PipeMaterial::lead, std::nullopt},
                             {"p3", PipeMaterial::lead, PipeMaterial::pvc, std::nullopt}};
  const auto projects = build_projects(segs, assign_parcels(p, segs), l, p, ConservativeAllUnknownLead{});
  ASSERT_EQ(projects.size(), 1u);
  EXPECT_EQ(projects[0].lead_line_count, 3);
  EXPECT_EQ(projects[0].parcel_ids, (std::vector<std::string>{"p1", "p2", "p3"}));
}

TEST(Projects, SyntheticCityLeadSidesMatchFullTableCount) {
  CityOptions opt;
  opt.seed = 21;
  const auto city = generate_city(opt);
  const auto segs = split_streets(city.centerlines, 150);
  const auto assignment = assign_parcels(city.parcels, segs);
  EXPECT_TRUE(assignment.flagged.empty());
  EXPECT_EQ(assignment.segment_of.size(), city.parcels.size());

  const LeadStatusPolicy policy = ConservativeAllUnknownLead{};
  const auto projects = build_projects(segs, assignment, city.lines, city.parcels, policy);
  long total = 0;
  std::set<std::string> seen;
  for (const auto& pr : projects) {
    total += pr.lead_line_count;
    for (const auto& id : pr.parcel_ids) EXPECT_TRUE(seen.insert(id).second) << "parcel in two projects: " << id;
  }
  std::set<std::string> all;
  for (const auto& p : city.parcels) all.insert(p.parcel_id);
  EXPECT_EQ(total, oracle::count_lead_sides(city.lines, city.parcels, policy, all));
}
