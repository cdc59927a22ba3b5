#include "lslr/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_map>

#include "lslr/policy_sim.hpp"
#include "lslr/prioritization.hpp"
#include "lslr/rng.hpp"

namespace lslr {

using nlohmann::json;

namespace {

Response error_response(int status, std::string_view code, const std::string& message) {
  return {status, json{{"error", code}, {"message", message}}.dump()};
}

Response not_ready() { return error_response(503, "SnapshotNotReady", "no snapshot loaded"); }

const std::string* param(const Params& params, const std::string& name) {
  auto it = params.find(name);
  return it == params.end() ? nullptr : &it->second;
}

// Parses an unsigned query parameter; nullopt result with `bad` set when the
// text is not a number.
std::optional<std::uint64_t> uint_param(const Params& params, const std::string& name, bool& bad) {
  const std::string* text = param(params, name);
  if (!text) return std::nullopt;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc{} || ptr != text->data() + text->size()) {
    bad = true;
    return std::nullopt;
  }
  return v;
}

json geometry(const StreetSegment* segment) {
  if (!segment) return nullptr;
  json coords = json::array();
  for (const auto& p : segment->polyline) coords.push_back({p.lon, p.lat});
  return {{"type", "LineString"}, {"coordinates", coords}};
}

std::vector<const Project*> sorted_projects(const Snapshot& snap) {
  std::vector<const Project*> out;
  for (const auto& p : snap.projects) out.push_back(&p);
  std::sort(out.begin(), out.end(), [](const Project* a, const Project* b) { return a->project_id < b->project_id; });
  return out;
}

}  // namespace

json project_summary(const Project& p, const StreetSegment* segment) {
  return {{"project_id", p.project_id},
          {"street_name", p.street_name},
          {"length_m", p.length_m},
          {"value", p.value_exposure_years},
          {"cost", p.cost_units},
          {"bcr", p.cost_units > 0.0 ? json(p.value_exposure_years / p.cost_units) : json(nullptr)},
          {"lead_line_count", p.lead_line_count},
          {"child_count", p.child_count},
          {"geometry", geometry(segment)}};
}

Service::Service(ServiceLimits limits, Loader loader)
    : limits_(std::move(limits)),
      loader_(std::move(loader)),
      simulation_slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(limits_.simulation_workers, 1, 64))),
      server_(std::make_unique<httplib::Server>()) {}

Service::~Service() = default;

void Service::set_snapshot(std::shared_ptr<const Snapshot> snapshot) {
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const Snapshot> Service::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

Response Service::healthz() const {
  const auto snap = snapshot();
  return {200, json{{"status", "ok"},
                    {"snapshot_loaded", snap != nullptr},
                    {"projects", snap ? snap->projects.size() : 0}}
                   .dump()};
}

Response Service::projects() const {
  const auto snap = snapshot();
  if (!snap) return not_ready();
  std::unordered_map<std::string_view, const StreetSegment*> seg_by_id;
  for (const auto& s : snap->segments) seg_by_id.emplace(s.segment_id, &s);
  json out = json::array();
  for (const Project* p : sorted_projects(*snap)) {
    auto it = seg_by_id.find(p->segment_id);
    out.push_back(project_summary(*p, it == seg_by_id.end() ? nullptr : it->second));
  }
  return {200, out.dump()};
}

Response Service::evaluate_cart(std::string_view body) const {
  const auto snap = snapshot();
  if (!snap) return not_ready();
  const json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_response(400, "BadRequest", "body must be a JSON object");
  if (!req.contains("project_ids") || !req["project_ids"].is_array()) {
    return error_response(400, "BadRequest", "project_ids must be an array");
  }
  std::optional<double> budget;
  if (req.contains("budget") && !req["budget"].is_null()) {
    if (!req["budget"].is_number() || req["budget"].get<double>() < 0.0) {
      return error_response(400, "BadRequest", "budget must be a non-negative number");
    }
    budget = req["budget"].get<double>();
  } else if (snap->config.budget > 0.0) {
    budget = snap->config.budget;
  }

  std::unordered_map<std::string_view, const Project*> by_id;
  for (const auto& p : snap->projects) by_id.emplace(p.project_id, &p);
  std::set<std::string> ids;
  for (const auto& v : req["project_ids"]) {
    if (!v.is_string()) return error_response(400, "BadRequest", "project ids must be strings");
    const std::string id = v.get<std::string>();
    if (!by_id.count(id)) return error_response(404, "UnknownProject", "unknown project " + id);
    if (!ids.insert(id).second) return error_response(400, "DuplicateId", "project " + id + " listed twice");
  }

  // Canonical id order makes the response independent of request order.
  json per_project = json::array();
  double total_value = 0.0, total_cost = 0.0;
  for (const auto& id : ids) {
    const Project& p = *by_id.at(id);
    total_value += p.value_exposure_years;
    total_cost += p.cost_units;
    per_project.push_back({{"project_id", id},
                           {"value", p.value_exposure_years},
                           {"cost", p.cost_units},
                           {"bcr", p.value_exposure_years / p.cost_units}});
  }
  json out{{"project_ids", ids},
           {"total_value", total_value},
           {"total_cost", total_cost},
           {"budget", budget ? json(*budget) : json(nullptr)},
           {"within_budget", !budget || total_cost <= *budget},
           {"per_project", per_project}};
  return {200, out.dump()};
}

Response Service::rankings(const Params& params) const {
  const auto snap = snapshot();
  if (!snap) return not_ready();
  bool bad = false;
  const std::uint64_t seed = uint_param(params, "seed", bad).value_or(0);
  const auto n_param = uint_param(params, "n", bad);
  if (bad) return error_response(400, "BadRequest", "seed and n must be non-negative integers");
  const std::string* name = param(params, "policy");
  Policy policy;
  try {
    policy = parse_policy(name ? *name : "by_bcr", seed);
  } catch (const Error& e) {
    return error_response(400, "UnknownPolicy", e.what());
  }
  const std::size_t n = n_param ? static_cast<std::size_t>(*n_param) : snap->projects.size();
  if (n > snap->projects.size()) {
    return error_response(400, "LimitExceeded", "n exceeds the " + std::to_string(snap->projects.size()) +
                                                    " available projects");
  }
  std::vector<std::size_t> order;
  try {
    order = policy_order(policy, snap->projects, n);
  } catch (const Error& e) {
    return error_response(400, std::string(e.name()), e.what());
  }
  const auto steps = cumulative_metrics(snap->projects, order);
  json items = json::array();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Project& p = snap->projects[order[k]];
    items.push_back({{"rank", k + 1},
                     {"project_id", p.project_id},
                     {"value", p.value_exposure_years},
                     {"cost", p.cost_units},
                     {"bcr", p.value_exposure_years / p.cost_units},
                     {"cumulative_exposure_years", steps[k].exposure_years},
                     {"cumulative_cost", steps[k].cost}});
  }
  json ids = json::array();
  for (const auto i : order) ids.push_back(snap->projects[i].project_id);
  json out{{"policy", policy_name(policy)},
           {"seed", is_stochastic(policy) ? json(seed) : json(nullptr)},
           {"n", n},
           {"project_ids", ids},
           {"projects", items}};
  return {200, out.dump()};
}

Response Service::simulation(const Params& params) const {
  const auto snap = snapshot();
  if (!snap) return not_ready();
  bool bad = false;
  const std::uint64_t seed = uint_param(params, "seed", bad).value_or(0);
  const auto n_param = uint_param(params, "n", bad);
  const auto it_param = uint_param(params, "iterations", bad);
  if (bad) return error_response(400, "BadRequest", "n, iterations and seed must be non-negative integers");
  const std::size_t n = n_param ? *n_param : std::min<std::size_t>(100, snap->projects.size());
  const std::size_t iterations = it_param ? *it_param : limits_.default_iterations;
  if (n > limits_.max_n || iterations > limits_.max_iterations || iterations < 1) {
    return error_response(400, "LimitExceeded", "n must be <= " + std::to_string(limits_.max_n) +
                                                    " and iterations in 1.." +
                                                    std::to_string(limits_.max_iterations));
  }
  if (n > snap->projects.size()) {
    return error_response(400, "LimitExceeded", "n exceeds the " + std::to_string(snap->projects.size()) +
                                                    " available projects");
  }

  std::vector<Policy> policies;
  const std::string* list = param(params, "policies");
  std::string names = list ? *list : "uniform_random,by_length,by_lead_per_meter,weighted_by_exposure,by_bcr,by_value";
  try {
    std::size_t start = 0;
    while (start <= names.size()) {
      const std::size_t comma = std::min(names.find(',', start), names.size());
      const std::string name = names.substr(start, comma - start);
      if (!name.empty()) {
        // Each stochastic policy gets its own stream off the request seed.
        policies.push_back(parse_policy(name, derive_seed(seed, policies.size())));
      }
      start = comma + 1;
    }
  } catch (const Error& e) {
    return error_response(400, "UnknownPolicy", e.what());
  }
  if (policies.empty()) return error_response(400, "UnknownPolicy", "no policies given");

  const std::string* runs = param(params, "runs");
  const bool include_runs = runs && (*runs == "1" || *runs == "true");

  simulation_slots_.acquire();
  struct Release {
    std::counting_semaphore<64>& s;
    ~Release() { s.release(); }
  } release{simulation_slots_};
  const auto sims = simulate(policies, snap->projects, n, iterations);
  json out = trajectories_json(sims, include_runs);
  out["n"] = n;
  out["iterations"] = iterations;
  out["seed"] = seed;
  return {200, out.dump()};
}

Response Service::reload() {
  if (!loader_) return error_response(400, "BadRequest", "service has no snapshot source to reload from");
  std::lock_guard lock(reload_mutex_);
  try {
    auto fresh = loader_();
    if (!fresh) return error_response(500, "ReloadFailed", "loader returned no snapshot");
    if (!fresh->report.usable) {
      return error_response(422, "SnapshotUnusable", std::to_string(fresh->report.fatal_count()) +
                                                         " fatal validation defect(s)");
    }
    const std::size_t count = fresh->projects.size();
    set_snapshot(std::move(fresh));
    return {200, json{{"status", "reloaded"}, {"projects", count}}.dump()};
  } catch (const Error& e) {
    return error_response(500, e.name(), e.what());
  }
}

void Service::mount(httplib::Server& server) {
  const std::string origin = limits_.cors_origin;
  server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  auto params_of = [](const httplib::Request& req) {
    Params p;
    for (const auto& [k, v] : req.params) p.emplace(k, v);
    return p;
  };
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/healthz", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, healthz()); });
  server.Get("/api/projects",
             [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, projects()); });
  server.Post("/api/cart/evaluate", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, evaluate_cart(req.body));
  });
  server.Get("/api/rankings", [this, reply, params_of](const httplib::Request& req, httplib::Response& res) {
    reply(res, rankings(params_of(req)));
  });
  server.Get("/api/simulation", [this, reply, params_of](const httplib::Request& req, httplib::Response& res) {
    reply(res, simulation(params_of(req)));
  });
  server.Post("/admin/reload", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, reload()); });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string code = "InternalError", message = "unexpected failure";
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      code = std::string(e.name());
      message = e.what();
    } catch (const std::exception& e) {
      message = e.what();
    }
    res.status = 500;
    res.set_content(json{{"error", code}, {"message", message}}.dump(), "application/json");
  });
}

bool Service::listen(const std::string& host, int port) {
  mount(*server_);
  return server_->listen(host, port);
}

void Service::stop() { server_->stop(); }

}  // namespace lslr
