#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lslr/pipeline.hpp"

namespace httplib {
class Server;
}

namespace lslr {

struct ServiceLimits {
  std::size_t max_n = 1000;
  std::size_t max_iterations = 500;
  std::size_t default_iterations = 50;
  std::size_t simulation_workers = 2;  // concurrent simulation requests
  std::string cors_origin = "*";
};

struct Response {
  int status = 200;
  std::string body;
};

using Params = std::multimap<std::string, std::string>;

// Read-only JSON API over one snapshot. Handlers are plain functions of the
// request so they can be exercised without a socket; mount() wires them to
// an httplib server.
class Service {
 public:
  using Loader = std::function<std::shared_ptr<const Snapshot>()>;

  explicit Service(ServiceLimits limits = {}, Loader loader = {});
  ~Service();

  /// Replaces the served snapshot; readers holding the old one keep it.
  void set_snapshot(std::shared_ptr<const Snapshot> snapshot);
  std::shared_ptr<const Snapshot> snapshot() const;

  Response healthz() const;
  Response projects() const;
  Response evaluate_cart(std::string_view body) const;
  Response rankings(const Params& params) const;
  Response simulation(const Params& params) const;
  /// Rebuilds through the loader and swaps on success.
  Response reload();

  void mount(httplib::Server& server);

  /// Blocks serving on host:port until stop() or a signal.
  bool listen(const std::string& host, int port);
  void stop();

 private:
  ServiceLimits limits_;
  Loader loader_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::mutex reload_mutex_;
  mutable std::counting_semaphore<64> simulation_slots_;
  std::unique_ptr<httplib::Server> server_;
};

/// Project summary as served by /api/projects.
nlohmann::json project_summary(const Project& project, const StreetSegment* segment);

}  // namespace lslr
