#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "swarmforge/records.hpp"

namespace swarmforge::torrent {

class TorrentError : public std::runtime_error {
 public:
  explicit TorrentError(const std::string& what) : std::runtime_error(what) {}
};

// Desk-scale stand-in for a torrent metafile: describes the content every
// simulated peer transfers, including the swarm seed so independently
// spawned peers compute the same deterministic swarm.
struct TorrentInfo {
  std::string name = "test.bin";
  std::uint64_t size = 0;
  std::uint32_t piece_size = 0;
  std::uint32_t block_size = 0;
  std::uint64_t seed = 0;
  Timestamp base_time = 1267437600;

  bool operator==(const TorrentInfo&) const = default;
};

TorrentInfo parse_torrent(const std::string& text);
TorrentInfo load_torrent(const std::string& path);
std::string render_torrent(const TorrentInfo& info);
void save_torrent(const TorrentInfo& info, const std::string& path);

}  // namespace swarmforge::torrent
