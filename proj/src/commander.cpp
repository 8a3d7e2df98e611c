#include "swarmforge/commander.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "swarmforge/adapters.hpp"
#include "swarmforge/log_parsers.hpp"
#include "swarmforge/net.hpp"
#include "swarmforge/sim.hpp"
#include "swarmforge/store.hpp"
#include "swarmforge/torrent.hpp"

namespace swarmforge::commander {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

NodeResult exchange(const config::NodeSpec& node,
                    const wire::CommandEnvelope& cmd) {
  NodeResult result;
  result.node_id = node.node_id;
  try {
    net::Socket sock = net::Socket::connect(node.host, node.agent_port);
    result.response = net::roundtrip(sock, cmd);
    result.ok = result.response.status == wire::RespStatus::Ok;
    if (!result.ok && result.response.error_code) {
      result.transport_error.clear();
    }
  } catch (const std::exception& e) {
    result.ok = false;
    result.transport_error = e.what();
  }
  return result;
}

bool port_open(const std::string& host, std::uint16_t port) {
  try {
    net::Socket sock = net::Socket::connect(host, port);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

bool wait_for_port(const std::string& host, std::uint16_t port,
                   double seconds) {
  const auto deadline =
      Clock::now() + std::chrono::milliseconds(static_cast<int>(seconds * 1000));
  while (Clock::now() < deadline) {
    if (port_open(host, port)) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  return port_open(host, port);
}

}  // namespace

std::vector<NodeResult> fan_out(const std::vector<config::NodeSpec>& nodes,
                                const wire::CommandEnvelope& cmd) {
  std::vector<NodeResult> results(nodes.size());
  std::vector<std::thread> threads;
  threads.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    threads.emplace_back(
        [&, i] { results[i] = exchange(nodes[i], cmd); });
  }
  for (auto& t : threads) t.join();
  return results;
}

std::vector<NodeResult> cmd_bootstrap(
    const std::vector<config::NodeSpec>& nodes, BootstrapTransport& transport) {
  std::vector<NodeResult> results;
  results.reserve(nodes.size());
  for (const auto& node : nodes) {
    NodeResult result;
    result.node_id = node.node_id;
    std::string outcome;
    if (port_open(node.host, node.agent_port)) {
      outcome = "already-running";
    } else {
      outcome = transport.launch(node);
      if (outcome == "started" &&
          !wait_for_port(node.host, node.agent_port, 5.0)) {
        outcome = "failed";
      }
    }
    result.ok = outcome != "failed";
    result.response = wire::ResponseEnvelope::ok({{"bootstrap", outcome}});
    if (!result.ok) result.transport_error = "agent did not come up";
    results.push_back(std::move(result));
  }
  return results;
}

std::string format_results(const std::vector<NodeResult>& results) {
  std::string out;
  for (const auto& result : results) {
    out += result.node_id;
    if (!result.transport_error.empty()) {
      out += "\tERROR=" + result.transport_error;
    } else {
      if (result.response.status == wire::RespStatus::Err) {
        out += "\tERR=" +
               wire::error_code_name(*result.response.error_code);
      } else {
        out += "\tOK=1";
      }
      for (const auto& [key, value] : result.response.body) {
        out += "\t" + key + "=" + value;
      }
    }
    out += "\n";
  }
  return out;
}

bool all_ok(const std::vector<NodeResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const NodeResult& r) { return r.ok; });
}

LocalExecBootstrap::LocalExecBootstrap(std::string agent_binary,
                                       std::string state_root)
    : agent_binary_(std::move(agent_binary)),
      state_root_(std::move(state_root)) {}

LocalExecBootstrap::~LocalExecBootstrap() { shutdown_all(); }

std::string LocalExecBootstrap::launch(const config::NodeSpec& node) {
  if (pids_.count(node.node_id)) return "already-running";
  const std::string state_dir =
      (fs::path(state_root_) / node.node_id).string();
  std::error_code ec;
  fs::create_directories(state_dir, ec);
  std::vector<std::string> argv = {
      agent_binary_,  "--bind",      node.host,
      "--port",       std::to_string(node.agent_port),
      "--state-dir",  state_dir,
  };
  for (const auto& [client, path] : node.client_paths) {
    argv.push_back("--client");
    argv.push_back(client + "=" + path);
  }
  std::vector<char*> cargv;
  for (const auto& arg : argv) cargv.push_back(const_cast<char*>(arg.c_str()));
  cargv.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) return "failed";
  if (pid == 0) {
    // Daemon output goes to a per-node log, not the commander's terminal.
    const std::string log = state_dir + "/agent.log";
    const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd >= 0) {
      ::dup2(fd, STDOUT_FILENO);
      ::dup2(fd, STDERR_FILENO);
      ::close(fd);
    }
    ::execv(cargv[0], cargv.data());
    ::_exit(127);
  }
  pids_[node.node_id] = pid;
  return "started";
}

void LocalExecBootstrap::shutdown_all() {
  for (const auto& [node_id, pid] : pids_) {
    ::kill(pid, SIGTERM);
  }
  for (const auto& [node_id, pid] : pids_) {
    int status = 0;
    const auto deadline = Clock::now() + std::chrono::seconds(3);
    while (::waitpid(pid, &status, WNOHANG) == 0) {
      if (Clock::now() >= deadline) {
        ::kill(pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  pids_.clear();
}

ExternalCommandBootstrap::ExternalCommandBootstrap(std::string command_template)
    : command_template_(std::move(command_template)) {}

std::string ExternalCommandBootstrap::launch(const config::NodeSpec& node) {
  std::string cmd = command_template_;
  const std::pair<std::string, std::string> subs[] = {
      {"{host}", node.host},
      {"{port}", std::to_string(node.agent_port)},
      {"{user}", node.username},
      {"{ssh_port}", std::to_string(node.ssh_port)},
      {"{agent_path}", node.agent_path},
  };
  for (const auto& [token, value] : subs) {
    std::size_t pos = 0;
    while ((pos = cmd.find(token, pos)) != std::string::npos) {
      cmd.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  return std::system(cmd.c_str()) == 0 ? "started" : "failed";
}

namespace {

struct SessionHandle {
  const config::NodeSpec* node = nullptr;
  const config::PlacementSpec* placement = nullptr;
  std::string addr;
  std::int64_t session_id = -1;
  bool done = false;
  std::string final_state;
  std::string error;
};

wire::ResponseEnvelope one_shot(const config::NodeSpec& node,
                                const wire::CommandEnvelope& cmd) {
  net::Socket sock = net::Socket::connect(node.host, node.agent_port);
  return net::roundtrip(sock, cmd);
}

template <typename Row, typename Insert>
void insert_chunked(const std::vector<Row>& rows, std::size_t chunk,
                    const Insert& insert) {
  for (std::size_t start = 0; start < rows.size(); start += chunk) {
    const std::size_t end = std::min(rows.size(), start + chunk);
    insert(std::vector<Row>(rows.begin() + static_cast<std::ptrdiff_t>(start),
                            rows.begin() + static_cast<std::ptrdiff_t>(end)));
  }
}

double plateau_mean(const std::vector<StatusRecord>& status) {
  // Mean download speed over the trailing half of the session: past the
  // ramp for any leecher that reached a steady state.
  if (status.empty()) return 0.0;
  const std::size_t start = status.size() / 2;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = start; i < status.size(); ++i) {
    // Skip the final partial tick at 100%.
    if (status[i].percent_hundredths == 10000 && i + 1 == status.size()) break;
    sum += static_cast<double>(status[i].down_speed);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace

ScenarioSummary run_scenario(const std::vector<config::NodeSpec>& nodes,
                             const config::SwarmSpec& swarm,
                             const ScenarioOptions& options) {
  const auto wall_start = Clock::now();
  const torrent::TorrentInfo info = torrent::load_torrent(swarm.torrent_path);

  // The full roster every simulated client must agree on.
  std::vector<sim::SimPeer> roster;
  roster.reserve(swarm.placements.size());
  std::uint64_t min_down_cap = sim::kUnlimited;
  std::uint32_t num_seeders = 0;
  for (std::size_t i = 0; i < swarm.placements.size(); ++i) {
    const auto& placement = swarm.placements[i];
    sim::SimPeer peer;
    peer.peer_id = "p" + std::to_string(i);
    peer.addr = sim::default_peer_addr(i);
    peer.seeder = placement.role == config::Role::Seeder;
    peer.down_cap = placement.down_limit.value_or(sim::kUnlimited);
    peer.up_cap = placement.up_limit.value_or(sim::kUnlimited);
    peer.start_tick = static_cast<std::int64_t>(placement.start_offset);
    if (placement.stop_offset) {
      peer.stop_tick = static_cast<std::int64_t>(*placement.stop_offset);
    }
    if (peer.seeder) {
      ++num_seeders;
    } else if (peer.down_cap < min_down_cap) {
      min_down_cap = peer.down_cap;
    }
    roster.push_back(std::move(peer));
  }
  const std::string roster_text = sim::render_roster(roster);

  double timeout = options.timeout_seconds.value_or(
      min_down_cap == sim::kUnlimited || min_down_cap == 0
          ? 60.0
          : 10.0 * static_cast<double>(info.size) /
                static_cast<double>(min_down_cap));

  fs::create_directories(options.work_dir);
  LocalExecBootstrap transport(
      options.agent_binary, (fs::path(options.work_dir) / "agents").string());
  const auto boot = cmd_bootstrap(nodes, transport);
  if (!all_ok(boot)) {
    throw ScenarioError("bootstrap failed:\n" + format_results(boot));
  }

  ScenarioSummary summary;
  summary.swarm_id = swarm.swarm_id;
  summary.store_path = options.store_path;

  // Start every placement at its offset (offsets are small at desk scale).
  std::vector<SessionHandle> handles(swarm.placements.size());
  std::vector<std::size_t> order(swarm.placements.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return swarm.placements[a].start_offset < swarm.placements[b].start_offset;
  });
  for (const std::size_t i : order) {
    const auto& placement = swarm.placements[i];
    const config::NodeSpec* node = config::find_node(nodes, placement.node_id);
    if (!node) throw ScenarioError("unknown node " + placement.node_id);
    SessionHandle& handle = handles[i];
    handle.node = node;
    handle.placement = &placement;
    handle.addr = roster[i].addr;

    const auto elapsed = std::chrono::duration<double>(
                             Clock::now() - wall_start)
                             .count();
    if (static_cast<double>(placement.start_offset) > elapsed) {
      std::this_thread::sleep_for(std::chrono::duration<double>(
          static_cast<double>(placement.start_offset) - elapsed));
    }

    wire::CommandEnvelope start{wire::CommandKind::StartClient, {}};
    start.args = {
        {"TORRENT", swarm.torrent_path},
        {"DOWN_DIR", placement.download_dir},
        {"SLOG", placement.slog_path},
        {"VLOG", placement.vlog_path},
        {"CLIENT", placement.client},
        {"ROLE", placement.role == config::Role::Seeder ? "seeder" : "leecher"},
        {"SELF", handle.addr},
        {"PEERS", roster_text},
    };
    if (placement.down_limit) {
      start.args.emplace_back("DOWN", std::to_string(*placement.down_limit));
    }
    if (placement.up_limit) {
      start.args.emplace_back("UP", std::to_string(*placement.up_limit));
    }
    try {
      const auto resp = one_shot(*node, start);
      if (resp.status != wire::RespStatus::Ok) {
        handle.done = true;
        handle.error = "START-CLIENT: " +
                       wire::error_code_name(*resp.error_code);
        continue;
      }
      handle.session_id = std::stoll(*wire::find_arg(resp.body, "id"));
    } catch (const std::exception& e) {
      handle.done = true;
      handle.error = e.what();
    }
  }

  // Poll until every session left RUNNING (simulated clients exit on
  // their own once their logs are written).
  const auto deadline =
      wall_start + std::chrono::duration_cast<Clock::duration>(
                       std::chrono::duration<double>(timeout));
  while (true) {
    bool pending = false;
    for (auto& handle : handles) {
      if (handle.done) continue;
      wire::CommandEnvelope query{wire::CommandKind::GetClients, {}};
      try {
        const auto resp = one_shot(*handle.node, query);
        const auto state = wire::find_arg(
            resp.body, "state_" + std::to_string(handle.session_id));
        if (state && *state != "RUNNING") {
          handle.done = true;
          handle.final_state = *state;
          if (*state == "FAILED") handle.error = "client failed";
        } else {
          pending = true;
        }
      } catch (const std::exception& e) {
        handle.done = true;
        handle.error = e.what();
      }
    }
    if (!pending) break;
    if (Clock::now() >= deadline) {
      for (auto& handle : handles) {
        if (handle.done || handle.session_id < 0) continue;
        wire::CommandEnvelope stop{
            wire::CommandKind::StopClient,
            {{"ID", std::to_string(handle.session_id)}}};
        try {
          one_shot(*handle.node, stop);
        } catch (const std::exception&) {
        }
      }
      throw ScenarioTimeout("scenario exceeded " + std::to_string(timeout) +
                            " s");
    }
    std::this_thread::sleep_for(std::chrono::seconds(1));
  }

  // Ingest logs (shared filesystem at desk scale), then archive them.
  fs::remove(options.store_path);
  store::Store db(options.store_path);
  store::ExperimentMeta experiment;
  experiment.swarm_id = swarm.swarm_id;
  experiment.num_peers = static_cast<std::uint32_t>(swarm.placements.size());
  experiment.num_seeders = num_seeders;
  experiment.start_time = info.base_time;
  experiment.file_name = info.name;
  experiment.file_size = info.size;
  const std::int64_t experiment_id = db.add_experiment(experiment);

  const adapters::Registry registry = adapters::Registry::with_builtins();
  std::map<std::string, double> class_sums;
  std::map<std::string, std::size_t> class_counts;
  for (std::size_t i = 0; i < swarm.placements.size(); ++i) {
    const auto& placement = swarm.placements[i];
    SessionHandle& handle = handles[i];
    PlacementOutcome outcome;
    outcome.node_id = placement.node_id;
    outcome.addr = handle.addr;
    outcome.session_id = handle.session_id;
    outcome.seeder = placement.role == config::Role::Seeder;
    outcome.error = handle.error;

    store::PeerMeta peer;
    peer.experiment_id = experiment_id;
    peer.client_name = placement.client;
    peer.addr = handle.addr;
    peer.down_limit = placement.down_limit;
    peer.up_limit = placement.up_limit;
    const std::int64_t peer_id = db.add_peer(peer);

    std::vector<std::string> session_files;
    if (handle.error.empty()) {
      try {
        const auto status = logs::parse_status_file(placement.slog_path);
        insert_chunked(status, options.ingest_chunk_rows,
                       [&](const std::vector<StatusRecord>& chunk) {
                         db.insert_status_batch(peer_id, chunk);
                       });
        session_files.push_back(placement.slog_path);

        const logs::Dialect dialect =
            registry.has(placement.client)
                ? registry.resolve(placement.client).vlog_dialect
                : logs::Dialect::UnifiedFile;
        std::vector<std::string> vlog_files;
        if (dialect == logs::Dialect::UnifiedFile) {
          vlog_files.push_back(placement.vlog_path);
        } else {
          const fs::path stem(placement.vlog_path);
          const std::string prefix = stem.stem().string() + ".";
          std::error_code ec;
          for (const auto& entry :
               fs::directory_iterator(stem.parent_path(), ec)) {
            const std::string name = entry.path().filename().string();
            if (name.starts_with(prefix) &&
                !logs::remote_peer_from_filename(name).empty()) {
              vlog_files.push_back(entry.path().string());
            }
          }
          std::sort(vlog_files.begin(), vlog_files.end());
        }
        std::vector<VerboseRecord> events;
        for (const auto& file : vlog_files) {
          const std::string remote = logs::remote_peer_from_filename(file);
          const auto records = logs::parse_verbose_file(file, dialect);
          events.insert(events.end(), records.begin(), records.end());
          (void)remote;
        }
        std::stable_sort(events.begin(), events.end(),
                         [](const VerboseRecord& a, const VerboseRecord& b) {
                           return a.timestamp < b.timestamp;
                         });
        insert_chunked(events, options.ingest_chunk_rows,
                       [&](const std::vector<VerboseRecord>& chunk) {
                         db.insert_verbose_batch(peer_id, chunk);
                       });
        session_files.insert(session_files.end(), vlog_files.begin(),
                             vlog_files.end());

        if (!status.empty() && !outcome.seeder) {
          for (const auto& rec : status) {
            if (rec.percent_hundredths == 10000) {
              outcome.completed = true;
              outcome.completion_seconds = rec.timestamp - info.base_time;
              break;
            }
          }
        }
        if (outcome.seeder) outcome.completed = true;

        if (!outcome.seeder && placement.down_limit) {
          const std::string key = config::render_limit(placement.down_limit);
          class_sums[key] += plateau_mean(status);
          class_counts[key] += 1;
        }
      } catch (const std::exception& e) {
        outcome.error = e.what();
      }
    }

    if (!session_files.empty()) {
      std::string files;
      for (const auto& file : session_files) {
        if (!files.empty()) files.push_back(',');
        files += file;
      }
      wire::CommandEnvelope archive{wire::CommandKind::Archive,
                                    {{"FILES", files}}};
      try {
        const auto resp = one_shot(*handle.node, archive);
        if (resp.status == wire::RespStatus::Ok) {
          outcome.archive_path = *wire::find_arg(resp.body, "archive");
        }
      } catch (const std::exception& e) {
        if (outcome.error.empty()) outcome.error = e.what();
      }
    }
    summary.placements.push_back(std::move(outcome));
  }

  for (const auto& [key, sum] : class_sums) {
    summary.class_plateau_speed[key] =
        sum / static_cast<double>(class_counts[key]);
  }
  summary.elapsed_seconds =
      std::chrono::duration<double>(Clock::now() - wall_start).count();
  if (!options.summary_path.empty()) {
    std::ofstream out(options.summary_path, std::ios::trunc);
    out << summary_to_json(summary) << '\n';
  }
  transport.shutdown_all();
  return summary;
}

std::string summary_to_json(const ScenarioSummary& summary) {
  nlohmann::json j;
  j["swarm_id"] = summary.swarm_id;
  j["store_path"] = summary.store_path;
  j["elapsed_seconds"] = summary.elapsed_seconds;
  j["class_plateau_speed"] = summary.class_plateau_speed;
  j["placements"] = nlohmann::json::array();
  for (const auto& p : summary.placements) {
    nlohmann::json e;
    e["node_id"] = p.node_id;
    e["addr"] = p.addr;
    e["session_id"] = p.session_id;
    e["seeder"] = p.seeder;
    e["completed"] = p.completed;
    if (p.completion_seconds) e["completion_seconds"] = *p.completion_seconds;
    e["archive"] = p.archive_path;
    e["error"] = p.error;
    j["placements"].push_back(std::move(e));
  }
  return j.dump(2);
}

}  // namespace swarmforge::commander
