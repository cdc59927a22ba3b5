#include "lslr/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace lslr {

double estimate_age_from_grade(int grade, double offset) {
  if (grade < 0 || grade > 12) {
    throw Error(ErrorCode::GradeOutOfRange, "grade " + std::to_string(grade) + " outside [0,12]");
  }
  return static_cast<double>(grade) + offset;
}

double exposure_years(double age, double leave_home_age, std::optional<double> cap) {
  if (!(age >= 0.0)) throw Error(ErrorCode::NegativeAge, "age must be >= 0");
  double years = std::max(0.0, leave_home_age - age);
  if (cap) years = std::min(years, *cap);
  return years;
}

double child_age(const ChildRecord& child, const PlanConfig& config) {
  if (child.age_years) return *child.age_years;
  if (child.grade) return estimate_age_from_grade(*child.grade, config.grade_age_offset);
  throw Error(ErrorCode::InvalidArgument, "child " + child.child_id + " has neither age nor grade");
}

namespace {

struct UnknownSideWeight {
  const ServiceLine& line;
  const Parcel& parcel;

  double operator()(const AssumeLeadBuiltBefore& p) const {
    return parcel.year_built && *parcel.year_built < p.year ? 1.0 : 0.0;
  }
  double operator()(const FixedUnknownWeight& p) const { return p.weight; }
  double operator()(const ConservativeAllUnknownLead&) const { return 1.0; }
  double operator()(const UseProbabilityField&) const {
    if (!line.lead_probability) {
      throw Error(ErrorCode::MissingProbability, "service line for parcel " + line.parcel_id +
                                                     " has no lead_probability");
    }
    return *line.lead_probability;
  }
};

double side_weight(PipeMaterial material, const ServiceLine& line, const Parcel& parcel,
                   const LeadStatusPolicy& policy) {
  if (material == PipeMaterial::lead) return 1.0;
  if (material != PipeMaterial::unknown) return 0.0;
  return std::visit(UnknownSideWeight{line, parcel}, policy);
}

}  // namespace

SideWeights lead_weight(const ServiceLine& line, const Parcel& parcel, const LeadStatusPolicy& policy) {
  return {side_weight(line.public_material, line, parcel, policy),
          side_weight(line.private_material, line, parcel, policy)};
}

ScoringInputs make_scoring_inputs(std::span<const Parcel> parcels, std::span<const ServiceLine> lines,
                                  std::span<const ChildRecord> children,
                                  const std::map<std::string, std::set<std::string>>& children_by_parcel,
                                  const PlanConfig& config) {
  ScoringInputs inputs;
  inputs.children_by_parcel = children_by_parcel;

  std::unordered_map<std::string_view, const Parcel*> parcel_by_id;
  for (const auto& p : parcels) parcel_by_id.emplace(p.parcel_id, &p);
  for (const auto& line : lines) {
    auto it = parcel_by_id.find(line.parcel_id);
    if (it == parcel_by_id.end()) continue;
    inputs.parcel_weight[line.parcel_id] = lead_weight(line, *it->second, config.lead_policy).combined();
  }
  for (const auto& c : children) inputs.child_age[c.child_id] = child_age(c, config);
  return inputs;
}

namespace {

double parcel_weight(const ScoringInputs& inputs, const std::string& parcel_id) {
  auto it = inputs.parcel_weight.find(parcel_id);
  return it == inputs.parcel_weight.end() ? 0.0 : it->second;
}

}  // namespace

double project_value(const Project& project, const ScoringInputs& inputs, const PlanConfig& config) {
  double value = 0.0;
  for (const auto& parcel_id : project.parcel_ids) {
    const double w = parcel_weight(inputs, parcel_id);
    if (w <= 0.0) continue;
    auto kids = inputs.children_by_parcel.find(parcel_id);
    if (kids == inputs.children_by_parcel.end()) continue;
    for (const auto& child_id : kids->second) {
      auto age = inputs.child_age.find(child_id);
      if (age == inputs.child_age.end()) continue;
      value += w * exposure_years(age->second, config.leave_home_age, config.horizon_cap_years);
    }
  }
  return value;
}

int project_child_count(const Project& project, const ScoringInputs& inputs) {
  int count = 0;
  for (const auto& parcel_id : project.parcel_ids) {
    if (parcel_weight(inputs, parcel_id) <= 0.0) continue;
    auto kids = inputs.children_by_parcel.find(parcel_id);
    if (kids != inputs.children_by_parcel.end()) count += static_cast<int>(kids->second.size());
  }
  return count;
}

double project_cost(const Project& project, const PlanConfig& config) {
  return config.per_line_cost * project.lead_line_count + config.fixed_cost;
}

double project_cost_length(const Project& project) {
  if (!(project.length_m > 0.0)) {
    throw Error(ErrorCode::DegenerateGeometry, "project " + project.project_id + " has no street length");
  }
  return project.length_m;
}

double project_cost_for(const Project& project, const PlanConfig& config) {
  return config.cost_model == CostModel::street_length ? project_cost_length(project)
                                                       : project_cost(project, config);
}

void score_projects(std::span<Project> projects, const ScoringInputs& inputs, const PlanConfig& config) {
  detail::parallel_for(static_cast<long>(projects.size()), [&](long i) {
    Project& p = projects[static_cast<std::size_t>(i)];
    p.value_exposure_years = project_value(p, inputs, config);
    p.child_count = project_child_count(p, inputs);
    p.cost_units = project_cost_for(p, config);
  });
}

}  // namespace lslr
