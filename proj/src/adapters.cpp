#include "swarmforge/adapters.hpp"

#include <algorithm>

namespace swarmforge::adapters {

namespace {

void check_path(const std::string& value, const std::string& what) {
  if (value.empty()) throw AdapterError("MissingPath: " + what);
}

void forbid_shell_metachars(const std::vector<std::string>& argv) {
  for (const auto& arg : argv) {
    if (arg.find_first_of(";|&$`<>\n") != std::string::npos) {
      throw AdapterError("shell metacharacter in argv element: " + arg);
    }
  }
}

std::vector<std::string> simulated_argv(const AdapterSpec& spec,
                                        const LaunchSpec& launch) {
  check_path(launch.torrent_path, "torrent");
  check_path(launch.download_dir, "download dir");
  check_path(launch.slog_path, "slog");
  check_path(launch.vlog_path, "vlog");
  std::vector<std::string> argv = {
      spec.executable,
      "--torrent", launch.torrent_path,
      "--role", launch.seeder ? "seeder" : "leecher",
  };
  if (launch.down_limit) {
    argv.push_back("--down");
    argv.push_back(std::to_string(*launch.down_limit));
  }
  if (launch.up_limit) {
    argv.push_back("--up");
    argv.push_back(std::to_string(*launch.up_limit));
  }
  argv.insert(argv.end(), {"--down-dir", launch.download_dir, "--slog",
                           launch.slog_path, "--vlog", launch.vlog_path,
                           "--dialect",
                           spec.vlog_dialect == logs::Dialect::UnifiedFile
                               ? "unified"
                               : "per-peer"});
  // Swarm-wide parameters travel as ordered extras.
  for (const auto& [key, value] : launch.extra) {
    argv.push_back("--" + key);
    argv.push_back(value);
  }
  forbid_shell_metachars(argv);
  return argv;
}

// Wrapper templates for the real instrumented clients; shipped for
// completeness, not exercised by automated tests.
std::vector<std::string> hrktorrent_argv(const AdapterSpec& spec,
                                         const LaunchSpec& launch) {
  check_path(launch.torrent_path, "torrent");
  check_path(launch.download_dir, "download dir");
  std::vector<std::string> argv = {spec.executable, "-d", launch.download_dir};
  if (launch.down_limit) {
    argv.push_back("--maxdown");
    argv.push_back(std::to_string(*launch.down_limit / 1024));
  }
  if (launch.up_limit) {
    argv.push_back("--maxup");
    argv.push_back(std::to_string(*launch.up_limit / 1024));
  }
  argv.push_back(launch.torrent_path);
  forbid_shell_metachars(argv);
  return argv;
}

std::vector<std::string> tribler_argv(const AdapterSpec& spec,
                                      const LaunchSpec& launch) {
  check_path(launch.torrent_path, "torrent");
  check_path(launch.download_dir, "download dir");
  check_path(launch.vlog_path, "vlog");
  std::vector<std::string> argv = {
      spec.executable,       "--torrent", launch.torrent_path,
      "--dest",              launch.download_dir,
      "--status-log",        launch.slog_path,
      "--verbose-log",       launch.vlog_path,
  };
  if (launch.down_limit) {
    argv.push_back("--downrate");
    argv.push_back(std::to_string(*launch.down_limit / 1024));
  }
  if (launch.up_limit) {
    argv.push_back("--uprate");
    argv.push_back(std::to_string(*launch.up_limit / 1024));
  }
  forbid_shell_metachars(argv);
  return argv;
}

}  // namespace

Registry Registry::with_builtins(
    const std::map<std::string, std::string>& client_paths) {
  const auto path_of = [&](const std::string& name,
                           const std::string& fallback) {
    const auto it = client_paths.find(name);
    return it == client_paths.end() ? fallback : it->second;
  };
  Registry registry;
  registry.register_adapter(AdapterSpec{
      "simulated", path_of("simulated", "btsim"),
      logs::Dialect::UnifiedFile, &simulated_argv});
  // libtorrent-rasterbar keeps one session log per remote peer.
  registry.register_adapter(AdapterSpec{
      "hrktorrent", path_of("hrktorrent", "hrktorrent"),
      logs::Dialect::PerPeerFiles, &hrktorrent_argv});
  // Tribler logs every verbose message into a single file.
  registry.register_adapter(AdapterSpec{
      "tribler", path_of("tribler", "tribler"),
      logs::Dialect::UnifiedFile, &tribler_argv});
  return registry;
}

void Registry::register_adapter(AdapterSpec spec) {
  if (adapters_.contains(spec.name)) {
    throw AdapterError("DuplicateAdapter: " + spec.name);
  }
  adapters_.emplace(spec.name, std::move(spec));
}

const AdapterSpec& Registry::resolve(const std::string& name) const {
  const auto it = adapters_.find(name);
  if (it == adapters_.end()) throw AdapterError("UnknownAdapter: " + name);
  return it->second;
}

bool Registry::has(const std::string& name) const {
  return adapters_.contains(name);
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, spec] : adapters_) out.push_back(name);
  return out;
}

std::vector<std::string> build_command_line(const AdapterSpec& spec,
                                            const LaunchSpec& launch) {
  return spec.build_command_line(spec, launch);
}

}  // namespace swarmforge::adapters
