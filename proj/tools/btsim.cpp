// Simulated BitTorrent client. Deterministically models the whole swarm
// described by the torrent stand-in plus a peer roster, then writes the
// status log, verbose log(s) and downloaded payload for one peer of that
// swarm. Independently spawned instances sharing the same inputs produce
// mutually consistent logs.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmforge/sim.hpp"
#include "swarmforge/torrent.hpp"

namespace fs = std::filesystem;
using namespace swarmforge;

int main(int argc, char** argv) {
  CLI::App app{"deterministic swarm-simulating BitTorrent client"};

  std::string torrent_path, role = "leecher", down_dir, slog_path, vlog_path;
  std::string dialect_name = "unified", self_addr, roster_text;
  std::uint64_t down_cap = 0, up_cap = 0;
  bool has_down = false, has_up = false;
  std::uint32_t unchoke_slots = 4, optimistic_slots = 1, rechoke_period = 10;
  std::uint32_t max_window = 64, tick_seconds = 1;
  std::int64_t tick_bound = 100000;
  double endgame_fraction = 0.05;

  app.add_option("--torrent", torrent_path, "torrent descriptor file")
      ->required();
  app.add_option("--role", role, "seeder|leecher")
      ->check(CLI::IsMember({"seeder", "leecher"}));
  app.add_option("--down", down_cap, "download cap, bytes/s");
  app.add_option("--up", up_cap, "upload cap, bytes/s");
  app.add_option("--down-dir", down_dir, "download directory")->required();
  app.add_option("--slog", slog_path, "status log path")->required();
  app.add_option("--vlog", vlog_path, "verbose log path (or stem)")->required();
  app.add_option("--dialect", dialect_name, "unified|per-peer")
      ->check(CLI::IsMember({"unified", "per-peer"}));
  app.add_option("--self", self_addr, "this peer's ip:port in the roster");
  app.add_option("--peers", roster_text, "full swarm roster");
  app.add_option("--unchoke-slots", unchoke_slots, "tit-for-tat unchoke slots");
  app.add_option("--optimistic-slots", optimistic_slots, "optimistic slots");
  app.add_option("--rechoke-period", rechoke_period, "rechoke period, ticks");
  app.add_option("--max-window", max_window, "max in-flight requests per link");
  app.add_option("--tick-bound", tick_bound, "simulation tick bound");
  app.add_option("--endgame-fraction", endgame_fraction,
                 "endgame entry threshold");
  app.add_option("--tick-seconds", tick_seconds, "seconds per tick");

  CLI11_PARSE(app, argc, argv);
  has_down = app.count("--down") > 0;
  has_up = app.count("--up") > 0;

  try {
    const torrent::TorrentInfo info = torrent::load_torrent(torrent_path);

    sim::SimConfig config;
    config.seed = info.seed;
    config.file_size = info.size;
    config.piece_size = info.piece_size;
    config.block_size = info.block_size;
    config.base_time = info.base_time;
    config.file_name = info.name;
    config.unchoke_slots = unchoke_slots;
    config.optimistic_slots = optimistic_slots;
    config.rechoke_period = rechoke_period;
    config.max_request_window = max_window;
    config.tick_bound = tick_bound;
    config.endgame_fraction = endgame_fraction;
    config.tick_seconds = tick_seconds;

    if (!roster_text.empty()) {
      config.peers = sim::parse_roster(roster_text);
      if (self_addr.empty()) {
        std::fprintf(stderr, "--self is required with --peers\n");
        return 1;
      }
    } else {
      // Standalone mode: this peer plus, for a leecher, one implicit seeder.
      if (self_addr.empty()) self_addr = sim::default_peer_addr(1);
      if (role == "leecher") {
        config.peers.push_back(sim::SimPeer{
            "seed", sim::default_peer_addr(0), true, sim::kUnlimited,
            sim::kUnlimited, 0, std::nullopt});
      }
      config.peers.push_back(sim::SimPeer{"self", self_addr,
                                          role == "seeder", sim::kUnlimited,
                                          sim::kUnlimited, 0, std::nullopt});
    }

    sim::SimPeer* self = nullptr;
    for (auto& peer : config.peers) {
      if (peer.addr == self_addr) self = &peer;
    }
    if (!self) {
      std::fprintf(stderr, "self address %s not in roster\n",
                   self_addr.c_str());
      return 1;
    }
    // Explicit caps override the roster entry for this instance.
    if (has_down) self->down_cap = down_cap == 0 ? sim::kUnlimited : down_cap;
    if (has_up) self->up_cap = up_cap == 0 ? sim::kUnlimited : up_cap;

    const sim::SimResult result = sim::simulate(config);
    const sim::PeerResult* mine = nullptr;
    for (const auto& peer : result.peers) {
      if (peer.peer.addr == self_addr) mine = &peer;
    }
    if (!mine) {
      std::fprintf(stderr, "internal: self missing from simulation output\n");
      return 1;
    }

    fs::create_directories(down_dir);
    const logs::Dialect dialect = dialect_name == "unified"
                                      ? logs::Dialect::UnifiedFile
                                      : logs::Dialect::PerPeerFiles;
    sim::emit_peer_logs(*mine, dialect, slog_path, vlog_path);
    if (mine->peer.seeder || mine->completion_tick >= 0) {
      sim::write_payload_file((fs::path(down_dir) / info.name).string(),
                              info.size, info.seed);
    }
    std::printf("peer=%s ticks=%lld events=%zu completion_tick=%lld\n",
                self_addr.c_str(),
                static_cast<long long>(result.ticks_run),
                mine->events.size(),
                static_cast<long long>(mine->completion_tick));
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "btsim: %s\n", e.what());
    return 1;
  }
}
