// lslr: batch entry point. Each subcommand reads files, runs one stage and
// writes its result files into --out.

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>

#include "lslr/core.hpp"
#include "lslr/geocache.hpp"
#include "lslr/geocoder.hpp"
#include "lslr/ingest.hpp"
#include "lslr/linkage.hpp"
#include "lslr/partitioning.hpp"
#include "lslr/pipeline.hpp"
#include "lslr/policy_sim.hpp"
#include "lslr/prioritization.hpp"
#include "lslr/rng.hpp"
#include "lslr/scoring.hpp"
#include "lslr/service.hpp"
#include "lslr/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GeocoderArgs {
  std::string kind = "mock";
  std::string gazetteer;
  std::string cache;
  std::string url = "https://maps.googleapis.com";
  std::string api_key;
  int rate_ms = 50;
  bool exact_only = false;
};

struct ConfigArgs {
  double budget = 0.0;
  double d = 1.0;
  double k = 0.0;
  std::optional<double> cap;
  double leave_age = 18.0;
  std::string lead_policy = "conservative";
  std::string cost_model = "per_line";
  double max_len = 150.0;
  double grade_offset = 5.5;
};

void add_geocoder_options(CLI::App* cmd, GeocoderArgs& g) {
  cmd->add_option("--geocoder", g.kind, "mock, cache or live")
      ->check(CLI::IsMember({"mock", "cache", "live"}))
      ->capture_default_str();
  cmd->add_option("--gazetteer", g.gazetteer, "place table for the mock geocoder (JSON)");
  cmd->add_option("--cache", g.cache, "geocode cache file (NDJSON)");
  cmd->add_option("--geocoder-url", g.url, "live geocoder base URL")->capture_default_str();
  cmd->add_option("--api-key", g.api_key, "live geocoder key")->envname("LSLR_GEOCODER_KEY");
  cmd->add_option("--rate-ms", g.rate_ms, "minimum ms between live requests")->capture_default_str();
  cmd->add_flag("--exact-only", g.exact_only, "mock geocoder without fuzzy matching");
}

void add_config_options(CLI::App* cmd, ConfigArgs& c) {
  cmd->add_option("--budget", c.budget, "budget W in cost units")->capture_default_str();
  cmd->add_option("--d", c.d, "cost per lead line")->capture_default_str();
  cmd->add_option("--k", c.k, "fixed cost per project")->capture_default_str();
  cmd->add_option("--cap", c.cap, "cap on exposure years");
  cmd->add_option("--leave-age", c.leave_age, "age children leave home")->capture_default_str();
  cmd->add_option("--policy,--lead-policy", c.lead_policy,
                  "lead status for unknown sides: year:YYYY, fixed[:w], conservative, probability")
      ->capture_default_str();
  cmd->add_option("--cost-model", c.cost_model, "per_line or street_length")
      ->check(CLI::IsMember({"per_line", "street_length"}))
      ->capture_default_str();
  cmd->add_option("--max-len", c.max_len, "maximum segment length in meters")->capture_default_str();
  cmd->add_option("--grade-offset", c.grade_offset, "age = grade + offset")->capture_default_str();
}

lslr::PlanConfig make_config(const ConfigArgs& c) {
  lslr::PlanConfig config;
  config.budget = c.budget;
  config.per_line_cost = c.d;
  config.fixed_cost = c.k;
  config.horizon_cap_years = c.cap;
  config.leave_home_age = c.leave_age;
  config.lead_policy = lslr::parse_lead_policy(c.lead_policy);
  config.cost_model = c.cost_model == "street_length" ? lslr::CostModel::street_length : lslr::CostModel::per_line;
  config.max_segment_m = c.max_len;
  config.grade_age_offset = c.grade_offset;
  lslr::check_config(config);
  return config;
}

// Owns the geocoder chain picked on the command line.
struct GeocoderStack {
  std::unique_ptr<lslr::GeocodeCache> cache;
  std::unique_ptr<lslr::GeocoderPort> upstream;
  std::unique_ptr<lslr::GeocoderPort> front;
  std::set<std::string> universe;

  lslr::GeocoderPort& port() { return front ? *front : *upstream; }
};

GeocoderStack make_geocoder(const GeocoderArgs& g) {
  GeocoderStack s;
  if (!g.cache.empty()) s.cache = std::make_unique<lslr::GeocodeCache>(fs::path(g.cache));
  if (g.kind == "mock") {
    if (g.gazetteer.empty()) throw lslr::Error(lslr::ErrorCode::InvalidArgument, "--geocoder mock needs --gazetteer");
    auto places = lslr::load_gazetteer(g.gazetteer);
    for (const auto& p : places) s.universe.insert(p.place_id);
    lslr::MockGeocoderOptions options;
    options.fuzzy = !g.exact_only;
    s.upstream = std::make_unique<lslr::MockGeocoder>(std::move(places), options);
  } else if (g.kind == "live") {
    lslr::HttpGeocoderOptions options;
    options.base_url = g.url;
    options.api_key = g.api_key;
    options.min_interval = std::chrono::milliseconds(g.rate_ms);
    s.upstream = std::make_unique<lslr::HttpGeocoder>(options);
  } else if (!s.cache) {
    throw lslr::Error(lslr::ErrorCode::InvalidArgument, "--geocoder cache needs --cache");
  }
  if (s.cache) s.front = std::make_unique<lslr::CacheGeocoder>(*s.cache, s.upstream.get());
  return s;
}

fs::path out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw lslr::Error(lslr::ErrorCode::FileUnreadable, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

template <typename T>
std::vector<T> take(lslr::LoadResult<T> result, const std::string& file) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << file << ": " << w << "\n";
  for (const auto& r : result.rejects) {
    std::cerr << "reject: " << file << ":" << r.line << ": " << r.reason << ": " << r.detail << "\n";
  }
  return std::move(result.records);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    if (comma > start) out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

lslr::Service* g_service = nullptr;

void handle_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lead service line replacement planning toolkit"};
  app.require_subcommand(1);

  // link
  auto* link = app.add_subcommand("link", "geocode students and parcels into a junction table");
  std::string students, parcels, lines, segments, corrections, out = ".", aliases;
  double threshold = lslr::kDefaultMatchThreshold;
  GeocoderArgs geocoder_args;
  link->add_option("--students", students, "students.csv")->required();
  link->add_option("--parcels", parcels, "parcels.geojson")->required();
  link->add_option("--corrections", corrections, "corrections.csv (dataset,source_key,place_id)");
  link->add_option("--threshold", threshold, "minimum match probability")->capture_default_str();
  link->add_option("--aliases", aliases, "header alias CSV (alias,column)");
  link->add_option("--out", out, "output directory")->capture_default_str();
  add_geocoder_options(link, geocoder_args);

  // partition
  auto* partition = app.add_subcommand("partition", "split streets and group parcels into projects");
  ConfigArgs config_args;
  bool presegmented = false;
  partition->add_option("--segments", segments, "centerlines (GeoJSON LineStrings)")->required();
  partition->add_option("--parcels", parcels, "parcels.geojson")->required();
  partition->add_option("--lines", lines, "service_lines.csv")->required();
  partition->add_option("--aliases", aliases, "header alias CSV (alias,column)");
  partition->add_flag("--presegmented", presegmented, "use centerlines as segments without splitting");
  partition->add_option("--out", out, "output directory")->capture_default_str();
  add_config_options(partition, config_args);

  // score
  auto* score = app.add_subcommand("score", "value and cost every project");
  std::string projects_path, junction_path;
  score->add_option("--projects", projects_path, "projects.geojson from partition")->required();
  score->add_option("--junction", junction_path, "junction.csv from link")->required();
  score->add_option("--students", students, "students.csv")->required();
  score->add_option("--parcels", parcels, "parcels.geojson")->required();
  score->add_option("--lines", lines, "service_lines.csv")->required();
  score->add_option("--aliases", aliases, "header alias CSV (alias,column)");
  score->add_option("--out", out, "output directory")->capture_default_str();
  add_config_options(score, config_args);

  // rank
  auto* rank = app.add_subcommand("rank", "order projects by benefit-cost ratio");
  std::string scored_path;
  double budget = 0.0;
  bool fractional = false, exact = false;
  rank->add_option("--scored", scored_path, "projects_scored.csv from score")->required();
  rank->add_option("--budget", budget, "select greedily within this budget")->capture_default_str();
  rank->add_flag("--fractional", fractional, "allow a fractional last project");
  rank->add_flag("--exact", exact, "also solve the 0/1 knapsack exactly (integral costs)");
  rank->add_option("--out", out, "output directory")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate project selection policies");
  std::string policies = "uniform_random,by_length,by_lead_per_meter,weighted_by_exposure,by_bcr,by_value";
  std::size_t n = 100, iterations = 50;
  std::uint64_t seed = 0;
  std::string json_path;
  sim->add_option("--scored", scored_path, "projects_scored.csv from score")->required();
  sim->add_option("--policies", policies, "comma-separated policy names")->capture_default_str();
  sim->add_option("--n", n, "projects per run")->capture_default_str();
  sim->add_option("--iterations", iterations, "runs per stochastic policy")->capture_default_str();
  sim->add_option("--seed", seed, "base seed")->capture_default_str();
  sim->add_option("--json", json_path, "also write plot-ready JSON here");
  sim->add_option("--out", out, "output directory")->capture_default_str();

  // gap-bench
  auto* gap = app.add_subcommand("gap-bench", "greedy versus exact knapsack on random instances");
  std::size_t instances = 1000;
  lslr::GapInstanceSpec spec;
  bool serial = false;
  gap->add_option("--instances", instances, "number of instances")->capture_default_str();
  gap->add_option("--items", spec.items, "items per instance")->capture_default_str();
  gap->add_option("--budget-fraction", spec.budget_fraction, "budget as a fraction of total cost")
      ->capture_default_str();
  gap->add_option("--seed", seed, "base seed")->capture_default_str();
  gap->add_flag("--serial", serial, "run on one thread");
  gap->add_option("--out", out, "output directory")->capture_default_str();

  // gen-city
  auto* gen = app.add_subcommand("gen-city", "write a synthetic city snapshot");
  bool calibrate = false;
  int rows = 10, cols = 10;
  gen->add_flag("--calibrate-fig3", calibrate, "project values follow the reference cumulative curve");
  gen->add_option("--seed", seed, "generator seed")->capture_default_str();
  gen->add_option("--rows", rows, "east-west streets (uncalibrated)")->capture_default_str();
  gen->add_option("--cols", cols, "north-south streets (uncalibrated)")->capture_default_str();
  gen->add_option("--out", out, "output directory")->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "run the HTTP API over a snapshot");
  std::string host = "127.0.0.1";
  int port = 8080;
  lslr::ServiceLimits limits;
  serve->add_option("--students", students, "students.csv")->required();
  serve->add_option("--parcels", parcels, "parcels.geojson")->required();
  serve->add_option("--lines", lines, "service_lines.csv")->required();
  serve->add_option("--segments", segments, "centerlines (GeoJSON LineStrings)")->required();
  serve->add_option("--corrections", corrections, "corrections.csv");
  serve->add_option("--aliases", aliases, "header alias CSV (alias,column)");
  serve->add_option("--threshold", threshold, "minimum match probability")->capture_default_str();
  serve->add_flag("--presegmented", presegmented, "use centerlines as segments without splitting");
  serve->add_option("--host", host, "bind address")->capture_default_str()->envname("LSLR_HOST");
  serve->add_option("--port", port, "listen port")->capture_default_str()->envname("LSLR_PORT");
  serve->add_option("--max-n", limits.max_n, "largest simulation n")->capture_default_str();
  serve->add_option("--max-iterations", limits.max_iterations, "most simulation iterations")->capture_default_str();
  serve->add_option("--workers", limits.simulation_workers, "concurrent simulations")->capture_default_str();
  serve->add_option("--cors-origin", limits.cors_origin, "allowed browser origin")->capture_default_str();
  add_geocoder_options(serve, geocoder_args);
  add_config_options(serve, config_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  auto opt_path = [](const std::string& s) { return s.empty() ? std::optional<fs::path>() : fs::path(s); };
  auto header_aliases = [&] { return aliases.empty() ? lslr::default_aliases() : lslr::load_aliases(aliases); };

  try {
    if (link->parsed()) {
      const auto hdr = header_aliases();
      auto children = take(lslr::load_students(students, hdr), students);
      auto parcel_list = take(lslr::load_parcels(parcels), parcels);
      GeocoderStack stack = make_geocoder(geocoder_args);
      const auto records = lslr::link_records(children, parcel_list);
      lslr::Junction junction = lslr::build_junction(records, stack.port(), threshold);
      if (!corrections.empty()) {
        auto fixes = take(lslr::load_corrections(corrections, hdr), corrections);
        std::set<std::string> known = stack.universe;
        if (known.empty()) {
          for (const auto& e : junction.entries) known.insert(e.place_id);
          for (const auto& u : junction.unmatched) {
            if (u.best) known.insert(u.best->address.place_id);
          }
        }
        junction = lslr::apply_corrections(std::move(junction), fixes, known);
      }
      const fs::path dir = out_dir(out);
      lslr::write_text_file(dir / "junction.csv", lslr::write_junction_csv(junction));
      lslr::write_text_file(dir / "unmatched.csv", lslr::write_unmatched_csv(junction));
      std::cout << json{{"linked", junction.entries.size()}, {"unmatched", junction.unmatched.size()}}.dump() << "\n";
    } else if (partition->parsed()) {
      const auto config = make_config(config_args);
      const auto hdr = header_aliases();
      auto centerlines = take(lslr::load_centerlines(segments), segments);
      auto parcel_list = take(lslr::load_parcels(parcels), parcels);
      auto line_list = take(lslr::load_service_lines(lines, hdr), lines);
      const auto segs = presegmented ? lslr::segments_from_centerlines(centerlines)
                                     : lslr::split_streets(centerlines, config.max_segment_m);
      const auto assignment = lslr::assign_parcels(parcel_list, segs);
      for (const auto& id : assignment.flagged) std::cerr << "flagged: parcel " << id << " has no named segment\n";
      const auto projects = lslr::build_projects(segs, assignment, line_list, parcel_list, config.lead_policy);
      const fs::path dir = out_dir(out);
      lslr::write_text_file(dir / "projects.geojson", lslr::projects_geojson(projects, segs).dump(1) + "\n");
      std::cout << json{{"segments", segs.size()}, {"projects", projects.size()}, {"flagged", assignment.flagged.size()}}
                       .dump()
                << "\n";
    } else if (score->parsed()) {
      const auto config = make_config(config_args);
      const auto hdr = header_aliases();
      auto geometry = lslr::parse_projects_geojson(json::parse(lslr::read_text_file(projects_path)));
      auto children = take(lslr::load_students(students, hdr), students);
      auto parcel_list = take(lslr::load_parcels(parcels), parcels);
      auto line_list = take(lslr::load_service_lines(lines, hdr), lines);
      const auto entries = lslr::parse_junction_csv(lslr::read_text_file(junction_path));
      const auto join = lslr::join_from_junction(entries);
      const auto inputs =
          lslr::make_scoring_inputs(parcel_list, line_list, children, join.children_by_parcel, config);
      lslr::score_projects(geometry.projects, inputs, config);
      const fs::path dir = out_dir(out);
      lslr::write_text_file(dir / "projects_scored.csv", lslr::write_projects_scored_csv(geometry.projects));
      std::cout << json{{"projects", geometry.projects.size()}, {"unlinked_children", join.unmatched_children.size()}}
                       .dump()
                << "\n";
    } else if (rank->parsed()) {
      const auto projects = lslr::parse_projects_scored_csv(lslr::read_text_file(scored_path));
      const auto ranked = lslr::rank_projects(projects);
      const fs::path dir = out_dir(out);
      lslr::write_text_file(dir / "ranked.csv", lslr::write_ranked_csv(ranked));
      json summary{{"projects", ranked.size()}};
      if (budget > 0.0) {
        const auto sel = lslr::greedy_select(ranked, budget, fractional);
        summary["greedy"] = {{"selected", sel.selected.size()},
                             {"total_value", sel.total_value},
                             {"total_cost", sel.total_cost}};
        if (sel.fractional_last) {
          summary["greedy"]["fractional_last"] = {sel.fractional_last->first, sel.fractional_last->second};
        }
        if (exact) {
          const auto items = lslr::to_items(projects);
          const auto best = lslr::knapsack_exact(items, budget);
          summary["exact"] = {{"selected", best.selected.size()},
                              {"total_value", best.total_value},
                              {"total_cost", best.total_cost}};
        }
      }
      std::cout << summary.dump() << "\n";
    } else if (sim->parsed()) {
      const auto projects = lslr::parse_projects_scored_csv(lslr::read_text_file(scored_path));
      std::vector<lslr::Policy> list;
      for (const auto& name : split_list(policies)) {
        list.push_back(lslr::parse_policy(name, lslr::derive_seed(seed, list.size())));
      }
      if (list.empty()) throw lslr::Error(lslr::ErrorCode::InvalidArgument, "no policies given");
      const auto sims = lslr::simulate(list, projects, n, iterations);
      const fs::path dir = out_dir(out);
      lslr::write_text_file(dir / "trajectories.csv", lslr::trajectories_csv(sims));
      if (!json_path.empty()) lslr::write_text_file(json_path, lslr::trajectories_json(sims, true).dump() + "\n");
      json summary = json::object();
      for (const auto& s : sims) summary[lslr::policy_name(s.policy)] = s.median.back().exposure_years;
      std::cout << json{{"final_median_exposure_years", summary}}.dump() << "\n";
    } else if (gap->parsed()) {
      const auto stats =
          serial ? lslr::reference::gap_benchmark(instances, seed, spec) : lslr::gap_benchmark(instances, seed, spec);
      const fs::path dir = out_dir(out);
      std::string csv = "statistic,value\n";
      csv += "instances," + std::to_string(stats.ratios.size()) + "\n";
      csv += "items," + std::to_string(spec.items) + "\n";
      csv += "median," + std::to_string(stats.median) + "\n";
      csv += "mean," + std::to_string(stats.mean) + "\n";
      csv += "p05," + std::to_string(stats.p05) + "\n";
      csv += "min," + std::to_string(stats.min) + "\n";
      csv += "optimal," + std::to_string(stats.optimal) + "\n";
      lslr::write_text_file(dir / "gap_stats.csv", csv);
      std::string per = "instance,ratio\n";
      for (std::size_t i = 0; i < stats.ratios.size(); ++i) {
        per += std::to_string(i) + "," + json(stats.ratios[i]).dump() + "\n";
      }
      lslr::write_text_file(dir / "gap_ratios.csv", per);
      std::cout << json{{"median", stats.median}, {"mean", stats.mean}, {"min", stats.min}, {"optimal", stats.optimal}}
                       .dump()
                << "\n";
    } else if (gen->parsed()) {
      lslr::SyntheticCity city;
      if (calibrate) {
        lslr::CalibratedCityOptions options;
        options.seed = seed;
        city = lslr::generate_reference_curve_city(options);
      } else {
        lslr::CityOptions options;
        options.seed = seed;
        options.horizontal_streets = rows;
        options.vertical_streets = cols;
        city = lslr::generate_city(options);
      }
      lslr::write_city(city, out_dir(out));
      std::cout << json{{"parcels", city.parcels.size()}, {"children", city.children.size()},
                        {"centerlines", city.centerlines.size()}}
                       .dump()
                << "\n";
    } else if (serve->parsed()) {
      const auto config = make_config(config_args);
      lslr::SnapshotPaths paths{students, lines, parcels, segments, opt_path(corrections), opt_path(aliases),
                                presegmented};
      auto loader = [paths, config, geocoder_args, threshold]() {
        auto loaded = lslr::load_inputs(paths);
        for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
        loaded.inputs.config = config;
        loaded.inputs.threshold = threshold;
        GeocoderStack stack = make_geocoder(geocoder_args);
        loaded.inputs.place_universe = stack.universe;
        auto snap = std::make_shared<const lslr::Snapshot>(lslr::build_snapshot(std::move(loaded.inputs), stack.port()));
        for (const auto& d : snap->report.defects) {
          std::cerr << "defect: " << d.kind << " " << d.key << ": " << d.message << "\n";
        }
        return std::shared_ptr<const lslr::Snapshot>(snap);
      };
      lslr::Service service(limits, loader);
      const auto first = service.reload();
      if (first.status != 200) {
        std::cerr << first.body << "\n";
        return 1;
      }
      g_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "serving on " << host << ":" << port << "\n";
      if (!service.listen(host, port)) {
        throw lslr::Error(lslr::ErrorCode::InvalidArgument, "cannot listen on " + host + ":" + std::to_string(port));
      }
    }
  } catch (const lslr::Error& e) {
    std::cerr << json{{"error", e.name()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
