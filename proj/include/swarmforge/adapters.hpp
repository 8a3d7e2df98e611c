#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmforge/log_parsers.hpp"

namespace swarmforge::adapters {

class AdapterError : public std::runtime_error {
 public:
  explicit AdapterError(const std::string& what) : std::runtime_error(what) {}
};

struct LaunchSpec {
  std::string torrent_path;
  std::string download_dir;
  std::string slog_path;
  std::string vlog_path;
  std::optional<std::uint64_t> down_limit;  // bytes/s
  std::optional<std::uint64_t> up_limit;
  bool seeder = false;
  // Client-specific settings (e.g. the simulator's SELF/PEERS/SEED).
  std::map<std::string, std::string> extra;
};

struct AdapterSpec {
  std::string name;
  std::string executable;  // resolved from the node's client paths
  logs::Dialect vlog_dialect = logs::Dialect::UnifiedFile;
  // Deterministic argv; executed without a shell.
  std::vector<std::string> (*build_command_line)(const AdapterSpec& spec,
                                                 const LaunchSpec& launch) =
      nullptr;
};

class Registry {
 public:
  // Built-in adapters: "simulated" (the reference client every test runs
  // against), plus command-line templates for hrktorrent and tribler.
  static Registry with_builtins(const std::map<std::string, std::string>&
                                    client_paths = {});

  void register_adapter(AdapterSpec spec);
  const AdapterSpec& resolve(const std::string& name) const;
  bool has(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, AdapterSpec> adapters_;
};

std::vector<std::string> build_command_line(const AdapterSpec& spec,
                                            const LaunchSpec& launch);

}  // namespace swarmforge::adapters
