#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmforge/log_parsers.hpp"
#include "swarmforge/records.hpp"

namespace swarmforge::sim {

class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::uint64_t kUnlimited = ~0ull;

struct SimPeer {
  std::string peer_id;
  std::string addr;  // synthetic ip:port
  bool seeder = false;
  std::uint64_t down_cap = kUnlimited;  // bytes/s
  std::uint64_t up_cap = kUnlimited;
  std::int64_t start_tick = 0;
  std::optional<std::int64_t> stop_tick;
};

struct SimConfig {
  std::uint64_t seed = 0;
  std::vector<SimPeer> peers;
  std::uint64_t file_size = 0;
  std::uint32_t piece_size = 0;
  std::uint32_t block_size = 0;
  std::uint32_t tick_seconds = 1;
  std::uint32_t unchoke_slots = 4;
  std::uint32_t optimistic_slots = 1;
  std::uint32_t rechoke_period = 10;
  // Fraction of blocks still missing below which duplicate (endgame)
  // requests are issued.
  double endgame_fraction = 0.05;
  std::uint32_t max_request_window = 64;
  std::int64_t tick_bound = 100000;
  Timestamp base_time = 1267437600;  // 2010-03-01T10:00:00Z
  std::string file_name = "test.bin";
};

struct PeerResult {
  SimPeer peer;
  std::vector<StatusRecord> status;
  std::vector<VerboseRecord> events;
  std::int64_t completion_tick = -1;  // -1: never completed (or seeder)
};

struct SimResult {
  std::vector<PeerResult> peers;
  std::int64_t ticks_run = 0;
  std::size_t total_events = 0;  // sum over per-peer event streams
};

// Deterministic discrete-time swarm model. Pure function of the config:
// identical output for identical inputs, across runs and platforms.
SimResult simulate(const SimConfig& config);

// Writes one peer's status log and verbose log(s). PerPeerFiles writes
// `<vlog_stem>.<remote>.log` per remote peer; UnifiedFile writes a single
// file at vlog_stem with a peer column.
void emit_peer_logs(const PeerResult& result, logs::Dialect dialect,
                    const std::string& slog_path, const std::string& vlog_stem);

// Deterministic payload bytes for the transferred file.
void write_payload_file(const std::string& path, std::uint64_t file_size,
                        std::uint64_t seed);

std::string default_peer_addr(std::size_t index);

// Compact single-line roster encoding so an orchestrator can hand every
// spawned simulator process the same swarm membership. One entry per
// peer, ','-separated; fields '/'-separated:
//   <peer_id>/<addr>/<s|l>/<down|inf>/<up|inf>/<start>/<stop|->
std::string render_roster(const std::vector<SimPeer>& peers);
std::vector<SimPeer> parse_roster(const std::string& text);

}  // namespace swarmforge::sim
