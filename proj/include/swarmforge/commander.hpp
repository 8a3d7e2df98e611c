#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmforge/config.hpp"
#include "swarmforge/wire.hpp"

namespace swarmforge::commander {

class ScenarioTimeout : public std::runtime_error {
 public:
  explicit ScenarioTimeout(const std::string& what)
      : std::runtime_error(what) {}
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

struct NodeResult {
  std::string node_id;
  bool ok = false;
  wire::ResponseEnvelope response;  // meaningful only when transport worked
  std::string transport_error;      // nonempty when the exchange itself failed
};

// How agents get started on their nodes. SSH is one possible external
// command; tests use local process spawning.
class BootstrapTransport {
 public:
  virtual ~BootstrapTransport() = default;
  // Returns "started", "already-running" or "failed"; must not throw.
  virtual std::string launch(const config::NodeSpec& node) = 0;
};

// Spawns the agent executable directly on this machine (one per node
// entry, distinguished by port). Owns the spawned processes.
class LocalExecBootstrap : public BootstrapTransport {
 public:
  LocalExecBootstrap(std::string agent_binary, std::string state_root);
  ~LocalExecBootstrap() override;
  std::string launch(const config::NodeSpec& node) override;
  void shutdown_all();

 private:
  std::string agent_binary_;
  std::string state_root_;
  std::map<std::string, int> pids_;  // node_id -> pid
};

// Runs `command_template` with {host} {port} {user} {ssh_port} {agent_path}
// placeholders substituted, via /bin/sh.
class ExternalCommandBootstrap : public BootstrapTransport {
 public:
  explicit ExternalCommandBootstrap(std::string command_template);
  std::string launch(const config::NodeSpec& node) override;

 private:
  std::string command_template_;
};

// One wire exchange per node, concurrently; a failure on one node never
// affects another. Results come back in input order.
std::vector<NodeResult> fan_out(const std::vector<config::NodeSpec>& nodes,
                                const wire::CommandEnvelope& cmd);

std::vector<NodeResult> cmd_bootstrap(
    const std::vector<config::NodeSpec>& nodes, BootstrapTransport& transport);

// `node_id<TAB>key=value<TAB>...` per node, stable order.
std::string format_results(const std::vector<NodeResult>& results);
bool all_ok(const std::vector<NodeResult>& results);

struct PlacementOutcome {
  std::string node_id;
  std::string addr;
  std::int64_t session_id = -1;
  bool seeder = false;
  bool completed = false;
  std::optional<std::int64_t> completion_seconds;  // relative to swarm start
  std::string archive_path;
  std::string error;
};

struct ScenarioSummary {
  std::string swarm_id;
  std::string store_path;
  std::vector<PlacementOutcome> placements;
  // Mean plateau download speed per leecher class, keyed by the class's
  // down-limit rendering ("524288", "unlimited", ...).
  std::map<std::string, double> class_plateau_speed;
  double elapsed_seconds = 0.0;
};

struct ScenarioOptions {
  std::string store_path;
  std::string summary_path;  // JSON; empty: not written
  std::string work_dir;      // scratch root for agent state dirs
  std::string agent_binary;  // used by the local-exec transport
  std::optional<double> timeout_seconds;  // default: 10 * size / min down cap
  std::size_t ingest_chunk_rows = 10000;
};

ScenarioSummary run_scenario(const std::vector<config::NodeSpec>& nodes,
                             const config::SwarmSpec& swarm,
                             const ScenarioOptions& options);

std::string summary_to_json(const ScenarioSummary& summary);

}  // namespace swarmforge::commander
