#include <gtest/gtest.h>

#include <httplib.h>

#include <chrono>
#include <random>
#include <thread>

#include "lslr/geocoder.hpp"
#include "lslr/prioritization.hpp"
#include "lslr/service.hpp"
#include "lslr/synth.hpp"

using namespace lslr;
using nlohmann::json;

namespace {

std::shared_ptr<const Snapshot> city_snapshot(std::uint64_t seed) {
  CityOptions opt;
  opt.seed = seed;
  const auto city = generate_city(opt);
  SnapshotInputs in;
  in.parcels = city.parcels;
  in.lines = city.lines;
  in.children = city.children;
  in.centerlines = city.centerlines;
  MockGeocoder geo(city.gazetteer);
  return std::make_shared<const Snapshot>(build_snapshot(in, geo));
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { snap_ = city_snapshot(3); }
  static void TearDownTestSuite() { snap_.reset(); }
  static std::shared_ptr<const Snapshot> snap_;
};

std::shared_ptr<const Snapshot> ServiceTest::snap_;

}  // namespace

TEST(ServiceNoSnapshot, NotReady) {
  Service s;
  EXPECT_EQ(s.projects().status, 503);
  EXPECT_EQ(json::parse(s.healthz().body)["snapshot_loaded"], false);
  EXPECT_EQ(s.reload().status, 400);
}

TEST(ServiceNoSnapshot, EmptySnapshotEmptyArray) {
  Service s;
  s.set_snapshot(std::make_shared<const Snapshot>());
  const auto r = s.projects();
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, "[]");
  const auto cart = json::parse(s.evaluate_cart(R"({"project_ids":[]})").body);
  EXPECT_EQ(cart["total_value"], 0.0);
  EXPECT_EQ(cart["within_budget"], true);
}

TEST_F(ServiceTest, ProjectsComplete) {
  Service s;
  s.set_snapshot(snap_);
  const auto body = json::parse(s.projects().body);
  ASSERT_EQ(body.size(), snap_->projects.size());
  for (const auto& p : body) {
    EXPECT_TRUE(p.contains("geometry"));
    EXPECT_EQ(p["geometry"]["type"], "LineString");
    EXPECT_TRUE(p.contains("bcr"));
  }
}

TEST_F(ServiceTest, CartMatchesBruteForce) {
  Service s;
  s.set_snapshot(snap_);
  std::mt19937_64 gen(1);
  const auto& ps = snap_->projects;
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> ids;
    for (const auto& p : ps) {
      if (gen() % 4 == 0) ids.push_back(p.project_id);
    }
    std::shuffle(ids.begin(), ids.end(), gen);
    const auto r = s.evaluate_cart(json{{"project_ids", ids}, {"budget", 40}}.dump());
    ASSERT_EQ(r.status, 200);
    const auto body = json::parse(r.body);
    std::vector<std::string> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    double v = 0, c = 0;
    for (const auto& id : sorted) {
      for (const auto& p : ps) {
        if (p.project_id == id) {
          v += p.value_exposure_years;
          c += p.cost_units;
        }
      }
    }
    ASSERT_EQ(body["total_value"].get<double>(), v);
    ASSERT_EQ(body["total_cost"].get<double>(), c);
    ASSERT_EQ(body["within_budget"].get<bool>(), c <= 40);
  }
}

TEST_F(ServiceTest, CartFullAndErrors) {
  Service s;
  s.set_snapshot(snap_);
  std::vector<std::string> all;
  double v = 0;
  for (const auto& p : snap_->projects) all.push_back(p.project_id);
  std::sort(all.begin(), all.end());
  for (const auto& id : all) {
    for (const auto& p : snap_->projects) {
      if (p.project_id == id) v += p.value_exposure_years;
    }
  }
  EXPECT_EQ(json::parse(s.evaluate_cart(json{{"project_ids", all}}.dump()).body)["total_value"].get<double>(), v);
  EXPECT_EQ(s.evaluate_cart("{bad").status, 400);
  EXPECT_EQ(s.evaluate_cart(R"({"project_ids":["nope"]})").status, 404);
  const std::string dup = json{{"project_ids", {all[0], all[0]}}}.dump();
  EXPECT_EQ(s.evaluate_cart(dup).status, 400);
  EXPECT_EQ(s.evaluate_cart(R"({"project_ids":[],"budget":-1})").status, 400);
}

TEST_F(ServiceTest, Rankings) {
  Service s;
  s.set_snapshot(snap_);
  const auto body = json::parse(s.rankings({{"policy", "by_bcr"}}).body);
  const auto ranked = rank_projects(snap_->projects);
  ASSERT_EQ(body["project_ids"].size(), ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) EXPECT_EQ(body["project_ids"][i], ranked[i].project_id);

  const Params seeded{{"policy", "uniform_random"}, {"seed", "7"}};
  EXPECT_EQ(s.rankings(seeded).body, s.rankings(seeded).body);
  EXPECT_EQ(s.rankings({{"policy", "bogus"}}).status, 400);
  EXPECT_EQ(s.rankings({{"n", "999999"}}).status, 400);
}

TEST_F(ServiceTest, Simulation) {
  Service s;
  s.set_snapshot(snap_);
  const Params one{{"policies", "by_value"}, {"iterations", "1"}, {"n", "10"}};
  const auto body = json::parse(s.simulation(one).body);
  ASSERT_EQ(body["policies"].size(), 1u);
  EXPECT_EQ(body["policies"][0]["median"]["exposure_years"].size(), 10u);

  const Params seeded{{"n", "20"}, {"iterations", "10"}, {"seed", "4"}};
  EXPECT_EQ(s.simulation(seeded).body, s.simulation(seeded).body);
  EXPECT_EQ(s.simulation({{"iterations", "100000"}}).status, 400);
  EXPECT_EQ(s.simulation({{"policies", "bogus"}}).status, 400);
}

TEST(ServiceReload, SwapAndReject) {
  int calls = 0;
  Service s({}, [&]() -> std::shared_ptr<const Snapshot> {
    ++calls;
    if (calls == 2) {
      auto bad = std::make_shared<Snapshot>();
      bad->report.usable = false;
      bad->report.defects.push_back({Severity::fatal, "duplicate_key", "p1", "dup"});
      return bad;
    }
    return city_snapshot(4);
  });
  EXPECT_EQ(s.reload().status, 200);
  const auto first = s.snapshot();
  EXPECT_EQ(s.reload().status, 422);
  EXPECT_EQ(s.snapshot(), first);
}

TEST(ServiceHttp, RealServer) {
  Service svc;
  svc.set_snapshot(city_snapshot(6));
  httplib::Server server;
  svc.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto h = cli.Get("/healthz");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);
  EXPECT_EQ(h->get_header_value("Access-Control-Allow-Origin"), "*");
  auto p = cli.Get("/api/projects");
  ASSERT_TRUE(p);
  const auto projects = json::parse(p->body);
  ASSERT_FALSE(projects.empty());
  const std::string id = projects[0]["project_id"];
  auto c = cli.Post("/api/cart/evaluate", json{{"project_ids", {id}}}.dump(), "application/json");
  ASSERT_TRUE(c);
  EXPECT_EQ(json::parse(c->body)["total_value"], projects[0]["value"]);
  auto r1 = cli.Get("/api/simulation?n=10&iterations=5&seed=3");
  auto r2 = cli.Get("/api/simulation?n=10&iterations=5&seed=3");
  ASSERT_TRUE(r1 && r2);
  EXPECT_EQ(r1->body, r2->body);
  auto bad = cli.Get("/api/rankings?policy=bogus");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto opt = cli.Options("/api/projects");
  ASSERT_TRUE(opt);
  EXPECT_EQ(opt->status, 204);

  server.stop();
  t.join();
}
