#include <gtest/gtest.h>

#include "lslr/geocoder.hpp"
#include "lslr/pipeline.hpp"
#include "lslr/scoring.hpp"
#include "lslr/synth.hpp"
#include "oracles.hpp"

using namespace lslr;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Age, FromGrade) {
  EXPECT_DOUBLE_EQ(estimate_age_from_grade(0), 5.5);
  EXPECT_DOUBLE_EQ(estimate_age_from_grade(12), 17.5);
  for (int g = 1; g <= 12; ++g) EXPECT_GT(estimate_age_from_grade(g), estimate_age_from_grade(g - 1));
  EXPECT_EQ(code_of([] { estimate_age_from_grade(13); }), ErrorCode::GradeOutOfRange);
  EXPECT_EQ(code_of([] { estimate_age_from_grade(-1); }), ErrorCode::GradeOutOfRange);
}

TEST(Exposure, Formula) {
  EXPECT_EQ(exposure_years(18, 18), 0.0);
  EXPECT_EQ(exposure_years(0, 18), 18.0);
  EXPECT_EQ(exposure_years(3, 18, 10.0), 10.0);
  EXPECT_EQ(exposure_years(25, 18), 0.0);
  EXPECT_EQ(code_of([] { exposure_years(-1, 18); }), ErrorCode::NegativeAge);
}

TEST(LeadWeight, Policies) {
  Parcel old, fresh;
  old.year_built = 1920;
  fresh.year_built = 1980;
  const ServiceLine mixed{"p", PipeMaterial::copper, PipeMaterial::lead, std::nullopt};
  for (const LeadStatusPolicy& pol : {LeadStatusPolicy{ConservativeAllUnknownLead{}},
                                      LeadStatusPolicy{FixedUnknownWeight{0.4}}, LeadStatusPolicy{UseProbabilityField{}},
                                      LeadStatusPolicy{AssumeLeadBuiltBefore{1950}}}) {
    EXPECT_EQ(lead_weight(mixed, old, pol), (SideWeights{0.0, 1.0}));
  }
  const ServiceLine unknown{"p", PipeMaterial::unknown, PipeMaterial::unknown, std::nullopt};
  EXPECT_EQ(lead_weight(unknown, old, ConservativeAllUnknownLead{}), (SideWeights{1.0, 1.0}));
  EXPECT_EQ(lead_weight(unknown, old, FixedUnknownWeight{0.4}), (SideWeights{0.4, 0.4}));
  EXPECT_EQ(lead_weight(unknown, old, AssumeLeadBuiltBefore{1950}), (SideWeights{1.0, 1.0}));
  EXPECT_EQ(lead_weight(unknown, fresh, AssumeLeadBuiltBefore{1950}), (SideWeights{0.0, 0.0}));
  EXPECT_EQ(code_of([&] { lead_weight(unknown, old, UseProbabilityField{}); }), ErrorCode::MissingProbability);
  const ServiceLine prob{"p", PipeMaterial::unknown, PipeMaterial::iron, 0.3};
  EXPECT_EQ(lead_weight(prob, old, UseProbabilityField{}), (SideWeights{0.3, 0.0}));
}

TEST(Value, Examples) {
  PlanConfig config;
  Project pr;
  pr.parcel_ids = {"p1"};
  ScoringInputs in;
  in.parcel_weight["p1"] = 1.0;
  EXPECT_EQ(project_value(pr, in, config), 0.0);

  in.children_by_parcel["p1"] = {"c1"};
  in.child_age["c1"] = 8.0;
  EXPECT_EQ(project_value(pr, in, config), 10.0);
  EXPECT_EQ(project_child_count(pr, in), 1);

  in.parcel_weight["p1"] = 0.0;
  EXPECT_EQ(project_value(pr, in, config), 0.0);
  EXPECT_EQ(project_child_count(pr, in), 0);
}

TEST(Cost, Examples) {
  Project pr;
  pr.lead_line_count = 3;
  PlanConfig config;
  config.per_line_cost = 10000;
  config.fixed_cost = 5000;
  EXPECT_EQ(project_cost(pr, config), 35000.0);
  pr.lead_line_count = 0;
  EXPECT_EQ(project_cost(pr, config), 5000.0);
  config.per_line_cost = 1;
  config.fixed_cost = 0;
  pr.lead_line_count = 7;
  EXPECT_EQ(project_cost(pr, config), 7.0);
  pr.length_m = 150;
  EXPECT_EQ(project_cost_length(pr), 150.0);
  config.cost_model = CostModel::street_length;
  EXPECT_EQ(project_cost_for(pr, config), 150.0);
}

std::string policy_label(const ::testing::TestParamInfo<LeadStatusPolicy>& info) {
  static const char* names[] = {"Year", "Fixed", "Conservative", "Probability"};
  return names[info.param.index()];
}

class ScoringOracle : public ::testing::TestWithParam<LeadStatusPolicy> {};

TEST_P(ScoringOracle, SnapshotMatchesBruteForce) {
  CityOptions opt;
  opt.seed = 77;
  opt.horizontal_streets = 5;
  opt.vertical_streets = 5;
  const auto city = generate_city(opt);
  ASSERT_LE(city.parcels.size(), 500u);
  MockGeocoder geo(city.gazetteer);
  SnapshotInputs in;
  in.parcels = city.parcels;
  in.lines = city.lines;
  in.children = city.children;
  in.centerlines = city.centerlines;
  in.config.lead_policy = GetParam();
  in.config.per_line_cost = 3.0;
  in.config.fixed_cost = 2.0;
  in.config.horizon_cap_years = 12.0;
  const Snapshot snap = build_snapshot(in, geo);
  ASSERT_TRUE(snap.report.usable);
  ASSERT_FALSE(snap.projects.empty());

  const auto values = oracle::project_values(snap.projects, snap.parcels, snap.lines, snap.children,
                                             snap.junction.entries, snap.config);
  for (const auto& p : snap.projects) {
    EXPECT_EQ(p.value_exposure_years, values.at(p.project_id)) << p.project_id;
    std::set<std::string> mine(p.parcel_ids.begin(), p.parcel_ids.end());
    const int sides = oracle::count_lead_sides(snap.lines, snap.parcels, snap.config.lead_policy, mine);
    EXPECT_EQ(p.cost_units, 3.0 * sides + 2.0) << p.project_id;
  }

  auto serial = snap.projects;
  auto parallel = snap.projects;
  const auto inputs = make_scoring_inputs(snap.parcels, snap.lines, snap.children, snap.join.children_by_parcel,
                                          snap.config);
  reference::score_projects(serial, inputs, snap.config);
  score_projects(parallel, inputs, snap.config);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].value_exposure_years, parallel[i].value_exposure_years);
    EXPECT_EQ(serial[i].cost_units, parallel[i].cost_units);
    EXPECT_EQ(serial[i].child_count, parallel[i].child_count);
  }
}

INSTANTIATE_TEST_SUITE_P(Policies, ScoringOracle,
                         ::testing::Values(LeadStatusPolicy{ConservativeAllUnknownLead{}},
                                           LeadStatusPolicy{FixedUnknownWeight{0.35}},
                                           LeadStatusPolicy{UseProbabilityField{}},
                                           LeadStatusPolicy{AssumeLeadBuiltBefore{1940}}),
                         policy_label);
