#include "swarmforge/sim.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

namespace swarmforge::sim {

namespace {

struct Geometry {
  std::uint64_t file_size;
  std::uint32_t piece_size;
  std::uint32_t block_size;
  std::uint32_t num_pieces;
  std::vector<std::uint32_t> block_base;  // first global block id per piece
  std::uint32_t total_blocks;

  explicit Geometry(const SimConfig& cfg)
      : file_size(cfg.file_size),
        piece_size(cfg.piece_size),
        block_size(cfg.block_size) {
    num_pieces = static_cast<std::uint32_t>(
        (file_size + piece_size - 1) / piece_size);
    block_base.resize(num_pieces + 1);
    std::uint32_t acc = 0;
    for (std::uint32_t p = 0; p < num_pieces; ++p) {
      block_base[p] = acc;
      acc += blocks_in_piece(p);
    }
    block_base[num_pieces] = acc;
    total_blocks = acc;
  }

  std::uint32_t piece_len(std::uint32_t p) const {
    const std::uint64_t off = static_cast<std::uint64_t>(p) * piece_size;
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(piece_size, file_size - off));
  }
  std::uint32_t blocks_in_piece(std::uint32_t p) const {
    return (piece_len(p) + block_size - 1) / block_size;
  }
  std::uint32_t piece_of(std::uint32_t block) const {
    const auto it = std::upper_bound(block_base.begin(), block_base.end(), block);
    return static_cast<std::uint32_t>(it - block_base.begin()) - 1;
  }
  std::uint32_t block_offset(std::uint32_t block) const {
    return (block - block_base[piece_of(block)]) * block_size;
  }
  std::uint32_t block_len(std::uint32_t block) const {
    const std::uint32_t p = piece_of(block);
    const std::uint32_t off = block_offset(block);
    return std::min<std::uint32_t>(block_size, piece_len(p) - off);
  }
};

std::string bitfield_hex(const std::vector<bool>& have) {
  static const char* digits = "0123456789abcdef";
  const std::size_t nbytes = (have.size() + 7) / 8;
  std::string out(nbytes * 2, '0');
  for (std::size_t p = 0; p < have.size(); ++p) {
    if (!have[p]) continue;
    const std::size_t byte = p / 8;
    const unsigned bit = 7 - (p % 8);
    const unsigned nibble_index = byte * 2 + (bit >= 4 ? 0 : 1);
    unsigned v = out[nibble_index] >= 'a' ? out[nibble_index] - 'a' + 10
                                          : out[nibble_index] - '0';
    v |= 1u << (bit % 4);
    out[nibble_index] = digits[v];
  }
  return out;
}

struct Engine {
  const SimConfig& cfg;
  Geometry geo;
  std::size_t n;
  std::mt19937_64 rng;
  std::int64_t tick = 0;

  std::vector<PeerResult> results;
  std::vector<bool> active, stopped;
  std::vector<std::vector<bool>> have;        // [i][piece]
  std::vector<std::uint32_t> have_count;
  std::vector<std::vector<bool>> blk_recv;    // [i][block]
  std::vector<std::uint32_t> blk_recv_count;
  std::vector<std::uint64_t> recv_bytes;
  std::vector<std::vector<bool>> connected;   // symmetric
  std::vector<std::vector<bool>> choking;     // choking[i][j]: i chokes j
  std::vector<std::vector<bool>> interested;  // interested[i][j]: i wants from j
  std::vector<std::vector<std::uint32_t>> window;           // download i<-j
  std::vector<std::vector<std::deque<std::uint32_t>>> pending;  // reqs i->j
  std::vector<std::vector<std::uint16_t>> pending_count;    // [i][block]
  std::vector<std::vector<std::uint64_t>> recv_win, sent_win;
  std::vector<std::uint64_t> tick_down, tick_up, cum_down, cum_up;
  std::vector<std::vector<bool>> served_link;  // [i][j]: i received from j
  std::vector<std::size_t> rr;                 // round-robin start per uploader

  explicit Engine(const SimConfig& config)
      : cfg(config), geo(config), n(config.peers.size()), rng(config.seed) {
    results.resize(n);
    active.assign(n, false);
    stopped.assign(n, false);
    have_count.assign(n, 0);
    blk_recv_count.assign(n, 0);
    recv_bytes.assign(n, 0);
    have.assign(n, std::vector<bool>(geo.num_pieces, false));
    blk_recv.assign(n, std::vector<bool>(geo.total_blocks, false));
    connected.assign(n, std::vector<bool>(n, false));
    choking.assign(n, std::vector<bool>(n, true));
    interested.assign(n, std::vector<bool>(n, false));
    window.assign(n, std::vector<std::uint32_t>(n, 1));
    pending.assign(n, std::vector<std::deque<std::uint32_t>>(n));
    pending_count.assign(n, std::vector<std::uint16_t>(geo.total_blocks, 0));
    recv_win.assign(n, std::vector<std::uint64_t>(n, 0));
    sent_win.assign(n, std::vector<std::uint64_t>(n, 0));
    tick_down.assign(n, 0);
    tick_up.assign(n, 0);
    cum_down.assign(n, 0);
    cum_up.assign(n, 0);
    served_link.assign(n, std::vector<bool>(n, false));
    rr.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      results[i].peer = cfg.peers[i];
      if (cfg.peers[i].seeder) {
        std::fill(have[i].begin(), have[i].end(), true);
        std::fill(blk_recv[i].begin(), blk_recv[i].end(), true);
        have_count[i] = geo.num_pieces;
        blk_recv_count[i] = geo.total_blocks;
      }
    }
  }

  bool complete(std::size_t i) const { return have_count[i] == geo.num_pieces; }

  Timestamp now() const {
    return cfg.base_time + tick * static_cast<std::int64_t>(cfg.tick_seconds);
  }

  void emit(std::size_t from, std::size_t to, MessageKind kind,
            std::optional<std::uint32_t> index = std::nullopt,
            std::optional<std::uint32_t> begin = std::nullopt,
            std::optional<std::uint32_t> length = std::nullopt,
            std::optional<std::string> bits = std::nullopt) {
    VerboseRecord rec;
    rec.timestamp = now();
    rec.kind = kind;
    rec.piece_index = index;
    rec.block_offset = begin;
    rec.block_length = length;
    rec.bitfield_hex = bits;
    rec.direction = Direction::Sent;
    rec.remote_peer = cfg.peers[to].addr;
    results[from].events.push_back(rec);
    rec.direction = Direction::Received;
    rec.remote_peer = cfg.peers[from].addr;
    results[to].events.push_back(rec);
  }

  void drop_pending(std::size_t i, std::size_t j) {
    for (std::uint32_t b : pending[i][j]) --pending_count[i][b];
    pending[i][j].clear();
  }

  void activate_and_connect() {
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i] && !stopped[i] && cfg.peers[i].start_tick == tick) {
        active[i] = true;
      }
      if (active[i] && cfg.peers[i].stop_tick &&
          *cfg.peers[i].stop_tick == tick) {
        active[i] = false;
        stopped[i] = true;
        for (std::size_t j = 0; j < n; ++j) {
          if (!connected[i][j]) continue;
          connected[i][j] = connected[j][i] = false;
          choking[i][j] = choking[j][i] = true;
          interested[i][j] = interested[j][i] = false;
          drop_pending(i, j);
          drop_pending(j, i);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[i] && active[j] && !connected[i][j]) {
          connected[i][j] = connected[j][i] = true;
          emit(i, j, MessageKind::Bitfield, std::nullopt, std::nullopt,
               std::nullopt, bitfield_hex(have[i]));
          emit(j, i, MessageKind::Bitfield, std::nullopt, std::nullopt,
               std::nullopt, bitfield_hex(have[j]));
        }
      }
    }
  }

  void update_interest() {
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || !connected[i][j]) continue;
        bool want = false;
        if (!complete(i)) {
          for (std::uint32_t p = 0; p < geo.num_pieces; ++p) {
            if (have[j][p] && !have[i][p]) {
              want = true;
              break;
            }
          }
        }
        if (want != interested[i][j]) {
          interested[i][j] = want;
          emit(i, j, want ? MessageKind::Interested : MessageKind::NotInterested);
        }
      }
    }
  }

  void rechoke() {
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      std::vector<std::size_t> candidates;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && connected[i][j] && interested[j][i]) candidates.push_back(j);
      }
      // Tit-for-tat: rank by bytes received from the candidate during the
      // last rechoke window, then by bytes we sent it, then by index.
      std::stable_sort(candidates.begin(), candidates.end(),
                       [&](std::size_t a, std::size_t b) {
                         if (recv_win[i][a] != recv_win[i][b]) {
                           return recv_win[i][a] > recv_win[i][b];
                         }
                         if (sent_win[i][a] != sent_win[i][b]) {
                           return sent_win[i][a] > sent_win[i][b];
                         }
                         return a < b;
                       });
      std::set<std::size_t> unchoked;
      for (std::size_t k = 0; k < candidates.size() && k < cfg.unchoke_slots; ++k) {
        unchoked.insert(candidates[k]);
      }
      std::vector<std::size_t> rest;
      for (std::size_t j : candidates) {
        if (!unchoked.contains(j)) rest.push_back(j);
      }
      for (std::uint32_t k = 0; k < cfg.optimistic_slots && !rest.empty(); ++k) {
        const std::size_t pick =
            std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng);
        unchoked.insert(rest[pick]);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !connected[i][j]) continue;
        const bool want_choke = !unchoked.contains(j);
        if (choking[i][j] != want_choke) {
          choking[i][j] = want_choke;
          emit(i, j, want_choke ? MessageKind::Choke : MessageKind::Unchoke);
          if (want_choke) drop_pending(j, i);  // j's in-flight requests die
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(recv_win[i].begin(), recv_win[i].end(), 0);
      std::fill(sent_win[i].begin(), sent_win[i].end(), 0);
    }
  }

  void issue_requests() {
    std::vector<std::uint32_t> avail(geo.num_pieces, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::uint32_t p = 0; p < geo.num_pieces; ++p) {
        if (have[i][p]) ++avail[p];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i] || complete(i)) continue;
      const bool endgame =
          static_cast<double>(geo.total_blocks - blk_recv_count[i]) <
          cfg.endgame_fraction * geo.total_blocks;
      std::vector<std::uint32_t> order;
      for (std::uint32_t p = 0; p < geo.num_pieces; ++p) {
        if (!have[i][p]) order.push_back(p);
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](std::uint32_t a, std::uint32_t b) {
                         if (avail[a] != avail[b]) return avail[a] < avail[b];
                         return a < b;
                       });
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !connected[i][j] || choking[j][i] || !interested[i][j]) {
          continue;
        }
        std::size_t capacity =
            pending[i][j].size() >= window[i][j]
                ? 0
                : window[i][j] - pending[i][j].size();
        for (std::uint32_t p : order) {
          if (capacity == 0) break;
          if (!have[j][p]) continue;
          for (std::uint32_t b = geo.block_base[p];
               b < geo.block_base[p + 1] && capacity > 0; ++b) {
            if (blk_recv[i][b]) continue;
            if (!endgame && pending_count[i][b] > 0) continue;
            if (endgame &&
                std::find(pending[i][j].begin(), pending[i][j].end(), b) !=
                    pending[i][j].end()) {
              continue;
            }
            pending[i][j].push_back(b);
            ++pending_count[i][b];
            emit(i, j, MessageKind::Request, p, geo.block_offset(b),
                 geo.block_len(b));
            --capacity;
          }
        }
      }
    }
  }

  void transfer_block(std::size_t i, std::size_t j, std::uint32_t b) {
    const std::uint32_t p = geo.piece_of(b);
    const std::uint32_t blen = geo.block_len(b);
    emit(j, i, MessageKind::Piece, p, geo.block_offset(b), blen);
    blk_recv[i][b] = true;
    ++blk_recv_count[i];
    recv_bytes[i] += blen;
    tick_down[i] += blen;
    tick_up[j] += blen;
    cum_down[i] += blen;
    cum_up[j] += blen;
    recv_win[i][j] += blen;
    sent_win[j][i] += blen;
    served_link[i][j] = true;
    // Endgame duplicates on other links are cancelled at receipt.
    if (pending_count[i][b] > 0) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j || pending[i][k].empty()) continue;
        auto& dq = pending[i][k];
        const auto it = std::find(dq.begin(), dq.end(), b);
        if (it != dq.end()) {
          dq.erase(it);
          --pending_count[i][b];
          emit(i, k, MessageKind::Cancel, p, geo.block_offset(b), blen);
        }
      }
    }
    bool piece_done = true;
    for (std::uint32_t bb = geo.block_base[p]; bb < geo.block_base[p + 1]; ++bb) {
      if (!blk_recv[i][bb]) {
        piece_done = false;
        break;
      }
    }
    if (piece_done) {
      have[i][p] = true;
      ++have_count[i];
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i && connected[i][k]) emit(i, k, MessageKind::Have, p);
      }
      if (complete(i) && results[i].completion_tick < 0 &&
          !cfg.peers[i].seeder) {
        results[i].completion_tick = tick;
      }
    }
  }

  void run_transfers() {
    std::vector<std::uint64_t> up_budget(n), down_budget(n);
    for (std::size_t i = 0; i < n; ++i) {
      up_budget[i] = cfg.peers[i].up_cap == kUnlimited
                         ? kUnlimited
                         : cfg.peers[i].up_cap * cfg.tick_seconds;
      down_budget[i] = cfg.peers[i].down_cap == kUnlimited
                           ? kUnlimited
                           : cfg.peers[i].down_cap * cfg.tick_seconds;
    }
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (!active[j]) continue;
        for (std::size_t step = 0; step < n; ++step) {
          const std::size_t i = (rr[j] + step) % n;
          if (i == j || !connected[j][i] || choking[j][i] ||
              pending[i][j].empty()) {
            continue;
          }
          const std::uint32_t b = pending[i][j].front();
          const std::uint32_t blen = geo.block_len(b);
          if (up_budget[j] < blen || down_budget[i] < blen) continue;
          pending[i][j].pop_front();
          --pending_count[i][b];
          up_budget[j] -= blen;
          down_budget[i] -= blen;
          transfer_block(i, j, b);
          rr[j] = (i + 1) % n;
          progress = true;
        }
      }
    }
  }

  void grow_windows() {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (served_link[i][j]) {
          window[i][j] = std::min(window[i][j] * 2, cfg.max_request_window);
          served_link[i][j] = false;
        }
      }
    }
  }

  void emit_status() {
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      StatusRecord rec;
      rec.timestamp = now();
      rec.down_speed = tick_down[i] / cfg.tick_seconds;
      rec.up_speed = tick_up[i] / cfg.tick_seconds;
      rec.downloaded = cum_down[i];
      rec.uploaded = cum_up[i];
      rec.transfer_size = cfg.file_size;
      rec.file_name = cfg.file_name;
      std::uint32_t npeers = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (connected[i][j]) ++npeers;
      }
      rec.num_peers = npeers;
      if (cfg.peers[i].seeder) {
        rec.percent_hundredths = 10000;
        rec.eta = kEtaInfinite;
      } else {
        rec.percent_hundredths =
            static_cast<std::uint32_t>(recv_bytes[i] * 10000 / cfg.file_size);
        if (complete(i)) {
          rec.eta = 0;
        } else if (rec.down_speed == 0) {
          rec.eta = kEtaInfinite;
        } else {
          const std::uint64_t remaining = cfg.file_size - recv_bytes[i];
          rec.eta = static_cast<std::int64_t>(
              (remaining + rec.down_speed - 1) / rec.down_speed);
        }
      }
      results[i].status.push_back(rec);
      tick_down[i] = 0;
      tick_up[i] = 0;
    }
  }

  bool all_leechers_done() const {
    for (std::size_t i = 0; i < n; ++i) {
      if (cfg.peers[i].seeder) continue;
      if (stopped[i]) continue;
      if (!active[i] && cfg.peers[i].start_tick > tick) return false;
      if (!complete(i)) return false;
    }
    return true;
  }

  SimResult run() {
    SimResult out;
    for (tick = 0;; ++tick) {
      if (tick > cfg.tick_bound) {
        throw SimError("TickBoundExceeded at tick " + std::to_string(tick));
      }
      activate_and_connect();
      update_interest();
      if (tick % cfg.rechoke_period == 0) rechoke();
      issue_requests();
      run_transfers();
      grow_windows();
      emit_status();
      if (all_leechers_done()) break;
    }
    out.ticks_run = tick + 1;
    out.peers = std::move(results);
    for (const auto& pr : out.peers) out.total_events += pr.events.size();
    return out;
  }
};

void validate(const SimConfig& cfg) {
  if (cfg.file_size == 0) throw SimError("file_size must be positive");
  if (cfg.piece_size == 0 || cfg.block_size == 0 ||
      cfg.piece_size % cfg.block_size != 0) {
    throw SimError("piece_size must be a positive multiple of block_size");
  }
  if (cfg.unchoke_slots < 1) throw SimError("unchoke_slots must be >= 1");
  if (cfg.tick_seconds < 1) throw SimError("tick must be >= 1 s");
  if (cfg.peers.empty()) throw SimError("no peers");
  bool seeder = false;
  std::set<std::string> ids;
  for (const auto& p : cfg.peers) {
    if (p.seeder) seeder = true;
    if (p.down_cap == 0 || p.up_cap == 0) {
      throw SimError("caps must be positive (" + p.peer_id + ")");
    }
    if (!ids.insert(p.peer_id).second) {
      throw SimError("duplicate peer_id " + p.peer_id);
    }
    if (p.stop_tick && *p.stop_tick <= p.start_tick) {
      throw SimError("stop_tick must exceed start_tick (" + p.peer_id + ")");
    }
  }
  if (!seeder) throw SimError("Unsatisfiable: swarm has no seeder");
}

}  // namespace

SimResult simulate(const SimConfig& config) {
  validate(config);
  Engine engine(config);
  return engine.run();
}

void emit_peer_logs(const PeerResult& result, logs::Dialect dialect,
                    const std::string& slog_path, const std::string& vlog_stem) {
  {
    std::ofstream slog(slog_path, std::ios::trunc);
    if (!slog) throw SimError("cannot write " + slog_path);
    for (const auto& rec : result.status) {
      slog << logs::render_status_line(rec) << '\n';
    }
  }
  if (dialect == logs::Dialect::UnifiedFile) {
    std::ofstream vlog(vlog_stem, std::ios::trunc);
    if (!vlog) throw SimError("cannot write " + vlog_stem);
    for (const auto& rec : result.events) {
      vlog << logs::render_verbose_line(rec, dialect) << '\n';
    }
  } else {
    // One file per remote peer, event order preserved within each file.
    std::vector<std::string> remotes;
    for (const auto& rec : result.events) {
      if (std::find(remotes.begin(), remotes.end(), rec.remote_peer) ==
          remotes.end()) {
        remotes.push_back(rec.remote_peer);
      }
    }
    for (const auto& remote : remotes) {
      std::ofstream vlog(logs::per_peer_vlog_path(vlog_stem, remote),
                         std::ios::trunc);
      if (!vlog) throw SimError("cannot write per-peer vlog for " + remote);
      for (const auto& rec : result.events) {
        if (rec.remote_peer == remote) {
          vlog << logs::render_verbose_line(rec, dialect) << '\n';
        }
      }
    }
  }
}

void write_payload_file(const std::string& path, std::uint64_t file_size,
                        std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SimError("cannot write " + path);
  std::mt19937_64 rng(seed);
  std::uint64_t written = 0;
  while (written < file_size) {
    const std::uint64_t word = rng();
    const std::size_t take =
        static_cast<std::size_t>(std::min<std::uint64_t>(8, file_size - written));
    out.write(reinterpret_cast<const char*>(&word), static_cast<std::streamsize>(take));
    written += take;
  }
}

std::string default_peer_addr(std::size_t index) {
  return "10.0." + std::to_string(index / 250) + "." +
         std::to_string(index % 250 + 1) + ":6881";
}

namespace {

std::string cap_field(std::uint64_t cap) {
  return cap == kUnlimited ? "inf" : std::to_string(cap);
}

std::uint64_t parse_cap_field(const std::string& text) {
  if (text == "inf") return kUnlimited;
  std::uint64_t value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw SimError("bad roster cap: " + text);
    value = value * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string render_roster(const std::vector<SimPeer>& peers) {
  std::string out;
  for (const auto& peer : peers) {
    if (!out.empty()) out.push_back(',');
    out += peer.peer_id + "/" + peer.addr + "/" + (peer.seeder ? "s" : "l") +
           "/" + cap_field(peer.down_cap) + "/" + cap_field(peer.up_cap) +
           "/" + std::to_string(peer.start_tick) + "/" +
           (peer.stop_tick ? std::to_string(*peer.stop_tick) : "-");
  }
  return out;
}

std::vector<SimPeer> parse_roster(const std::string& text) {
  std::vector<SimPeer> peers;
  if (text.empty()) return peers;
  for (const auto& entry : split(text, ',')) {
    const auto fields = split(entry, '/');
    if (fields.size() != 7) throw SimError("bad roster entry: " + entry);
    SimPeer peer;
    peer.peer_id = fields[0];
    peer.addr = fields[1];
    if (fields[2] != "s" && fields[2] != "l") {
      throw SimError("bad roster role: " + entry);
    }
    peer.seeder = fields[2] == "s";
    peer.down_cap = parse_cap_field(fields[3]);
    peer.up_cap = parse_cap_field(fields[4]);
    peer.start_tick = std::stoll(fields[5]);
    if (fields[6] != "-") peer.stop_tick = std::stoll(fields[6]);
    peers.push_back(std::move(peer));
  }
  return peers;
}

}  // namespace swarmforge::sim
