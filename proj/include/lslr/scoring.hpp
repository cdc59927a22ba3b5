#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lslr/core.hpp"

namespace lslr {

/// Expected age mid-year for a school grade: grade + offset (kindergarten is
/// grade 0). Throws GradeOutOfRange outside [0, 12].
double estimate_age_from_grade(int grade, double offset = 5.5);

/// Years a child stays exposed if nothing is replaced:
/// max(0, leave_home_age - age), optionally capped at the replacement horizon.
double exposure_years(double age, double leave_home_age = 18.0, std::optional<double> cap = std::nullopt);

/// Child age in years; age_years wins over the grade estimate.
double child_age(const ChildRecord& child, const PlanConfig& config);

struct SideWeights {
  double public_side = 0.0;
  double private_side = 0.0;

  /// A parcel exposes its residents if either side carries lead.
  double combined() const { return public_side > private_side ? public_side : private_side; }
  int lead_sides() const { return (public_side > 0.0) + (private_side > 0.0); }

  friend bool operator==(const SideWeights&, const SideWeights&) = default;
};

/// Known materials decide a side outright (lead 1, anything else 0); unknown
/// sides defer to the policy. UseProbabilityField throws MissingProbability
/// when an unknown side meets a line without lead_probability.
SideWeights lead_weight(const ServiceLine& line, const Parcel& parcel, const LeadStatusPolicy& policy);

// Everything project scoring reads, resolved once per snapshot.
struct ScoringInputs {
  std::map<std::string, std::set<std::string>> children_by_parcel;
  std::unordered_map<std::string, double> child_age;
  std::unordered_map<std::string, double> parcel_weight;  // combined side weight
};

ScoringInputs make_scoring_inputs(std::span<const Parcel> parcels, std::span<const ServiceLine> lines,
                                  std::span<const ChildRecord> children,
                                  const std::map<std::string, std::set<std::string>>& children_by_parcel,
                                  const PlanConfig& config);

/// Sum over children at the project's parcels of exposure years scaled by the
/// parcel's lead weight. Parcels with zero weight contribute nothing.
double project_value(const Project& project, const ScoringInputs& inputs, const PlanConfig& config);

/// Children at the project's parcels whose parcel weight is positive.
int project_child_count(const Project& project, const ScoringInputs& inputs);

/// d * |P| + K.
double project_cost(const Project& project, const PlanConfig& config);

/// Street length of the project's segment in meters.
double project_cost_length(const Project& project);

/// Cost under the configured cost model.
double project_cost_for(const Project& project, const PlanConfig& config);

/// Fills value, cost and child count for every project. Runs in parallel over
/// projects; reference::score_projects is the serial twin used in tests.
void score_projects(std::span<Project> projects, const ScoringInputs& inputs, const PlanConfig& config);

namespace reference {
void score_projects(std::span<Project> projects, const ScoringInputs& inputs, const PlanConfig& config);
}

}  // namespace lslr
