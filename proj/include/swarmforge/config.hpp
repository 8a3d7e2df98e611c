#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmforge::config {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NodeSpec {
  std::string node_id;
  std::string host;
  std::uint16_t agent_port = 5000;  // shared default when omitted
  std::uint16_t ssh_port = 22;
  std::string username;
  std::string agent_path;
  std::map<std::string, std::string> client_paths;  // client name -> exe path

  bool operator==(const NodeSpec&) const = default;
};

enum class Role { Seeder, Leecher };

struct PlacementSpec {
  std::string node_id;
  std::string client;
  Role role = Role::Leecher;
  // Bytes per second; nullopt means unlimited.
  std::optional<std::uint64_t> down_limit;
  std::optional<std::uint64_t> up_limit;
  std::string download_dir;
  std::string slog_path;
  std::string vlog_path;
  std::uint64_t start_offset = 0;  // seconds
  std::optional<std::uint64_t> stop_offset;

  bool operator==(const PlacementSpec&) const = default;
};

struct SwarmSpec {
  std::string swarm_id;
  std::string torrent_path;
  std::vector<PlacementSpec> placements;

  bool operator==(const SwarmSpec&) const = default;
};

std::vector<NodeSpec> load_nodes(const std::string& document);
SwarmSpec load_swarm(const std::string& document,
                     const std::vector<NodeSpec>& inventory);

std::string render_nodes(const std::vector<NodeSpec>& nodes);
std::string render_swarm(const SwarmSpec& swarm);

// "unlimited", plain bytes/s, or a K-suffixed KB/s value (1 K = 1024).
std::optional<std::uint64_t> parse_limit(const std::string& text);
std::string render_limit(const std::optional<std::uint64_t>& limit);

const NodeSpec* find_node(const std::vector<NodeSpec>& inventory,
                          const std::string& node_id);

}  // namespace swarmforge::config
