#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "swarmforge/sim.hpp"
#include "swarmforge/store.hpp"

using namespace swarmforge;
using namespace swarmforge::store;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("store-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

ExperimentMeta sample_experiment() {
  ExperimentMeta meta;
  meta.swarm_id = "s1";
  meta.num_peers = 3;
  meta.num_seeders = 1;
  meta.start_time = 1267437600;
  meta.file_name = "test.bin";
  meta.file_size = 50331648;
  return meta;
}

PeerMeta sample_peer(std::int64_t experiment_id, const std::string& addr) {
  PeerMeta meta;
  meta.experiment_id = experiment_id;
  meta.client_name = "simulated";
  meta.addr = addr;
  meta.down_limit = 524288;
  meta.up_limit = 262144;
  meta.cpu_description = "test-cpu";
  meta.ram_bytes = 1ull << 30;
  meta.os_version = "linux";
  meta.net_info = "lo";
  return meta;
}

std::vector<VerboseRecord> random_events(std::mt19937_64& rng, std::size_t n,
                                         Timestamp base) {
  std::vector<VerboseRecord> out;
  std::uniform_int_distribution<int> kind_pick(0, kMessageKindCount - 1);
  std::uniform_int_distribution<std::uint32_t> idx(0, 767);
  Timestamp t = base;
  for (std::size_t i = 0; i < n; ++i) {
    t += rng() % 2;
    VerboseRecord rec;
    rec.timestamp = t;
    rec.direction = (rng() % 2) ? Direction::Sent : Direction::Received;
    rec.remote_peer = "10.0.0." + std::to_string(1 + rng() % 5) + ":6881";
    rec.kind = static_cast<MessageKind>(kind_pick(rng));
    switch (rec.kind) {
      case MessageKind::Request:
      case MessageKind::Piece:
      case MessageKind::Cancel:
        rec.piece_index = idx(rng);
        rec.block_offset = 16384 * (rng() % 4);
        rec.block_length = 16384;
        break;
      case MessageKind::Have:
        rec.piece_index = idx(rng);
        break;
      case MessageKind::Bitfield:
        rec.bitfield_hex = "ffef00";
        break;
      default:
        break;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<StatusRecord> random_status(std::mt19937_64& rng, std::size_t n,
                                        Timestamp base) {
  std::vector<StatusRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    StatusRecord rec;
    rec.timestamp = base + static_cast<Timestamp>(i);
    rec.down_speed = rng() % 600000;
    rec.up_speed = rng() % 300000;
    rec.downloaded = i * 1000;
    rec.uploaded = i * 400;
    rec.eta = (i % 7 == 0) ? kEtaInfinite : static_cast<std::int64_t>(rng() % 500);
    rec.num_peers = 1 + rng() % 60;
    rec.percent_hundredths = static_cast<std::uint32_t>(rng() % 10001);
    rec.transfer_size = 50331648;
    rec.downloaded = std::min<std::uint64_t>(rec.downloaded, rec.transfer_size);
    rec.file_name = "test.bin";
    out.push_back(rec);
  }
  return out;
}

}  // namespace

TEST_CASE("experiment and peer metadata round-trip") {
  TempDir tmp;
  Store store(tmp.file("s.db"));
  const auto eid = store.add_experiment(sample_experiment());
  CHECK(eid >= 1);
  const auto got = store.get_experiment(eid);
  CHECK(got.experiment_id == eid);
  CHECK(got.swarm_id == "s1");
  CHECK(got.file_size == 50331648);
  CHECK(got.start_time == 1267437600);

  const auto p1 = store.add_peer(sample_peer(eid, "10.0.0.1:6881"));
  const auto p2 = store.add_peer(sample_peer(eid, "10.0.0.2:6881"));
  CHECK(p1 != p2);
  const auto peer = store.get_peer(p1);
  CHECK(peer.addr == "10.0.0.1:6881");
  CHECK(peer.down_limit == 524288);
  CHECK(peer.cpu_description == "test-cpu");
  CHECK(store.list_peers(eid).size() == 2);
  CHECK(store.find_peer_by_addr(eid, "10.0.0.2:6881") == p2);
  CHECK(!store.find_peer_by_addr(eid, "10.9.9.9:6881"));

  CHECK_THROWS_AS(store.get_experiment(999), StoreError);
  CHECK_THROWS_AS(store.get_peer(999), StoreError);
  CHECK_THROWS_AS(store.add_peer(sample_peer(999, "x:1")), StoreError);
}

TEST_CASE("reopening a store preserves content; corrupt file is refused") {
  TempDir tmp;
  const std::string path = tmp.file("s.db");
  std::int64_t eid, pid;
  {
    Store store(path);
    eid = store.add_experiment(sample_experiment());
    pid = store.add_peer(sample_peer(eid, "10.0.0.1:6881"));
    std::mt19937_64 rng(1);
    store.insert_status_batch(pid, random_status(rng, 50, 1267437600));
  }
  {
    Store store(path);
    CHECK(store.get_experiment(eid).swarm_id == "s1");
    CHECK(store.query_status(pid, 0, 1u << 31).size() == 50);
  }

  const std::string junk = tmp.file("junk.db");
  std::ofstream(junk) << "this is not a database at all, not even close";
  try {
    Store store(junk);
    // Some failures only surface at first query.
    store.get_experiment(1);
    FAIL("corrupt store accepted");
  } catch (const StoreError& e) {
    CHECK(e.fault() == StoreFault::CorruptStore);
  }
}

TEST_CASE("window queries match an in-memory oracle") {
  TempDir tmp;
  Store store(tmp.file("s.db"));
  const auto eid = store.add_experiment(sample_experiment());
  const auto pid = store.add_peer(sample_peer(eid, "10.0.0.1:6881"));
  std::mt19937_64 rng(7);
  const Timestamp base = 1267437600;
  const auto events = random_events(rng, 2000, base);
  const auto status = random_status(rng, 300, base);
  CHECK(store.insert_verbose_batch(pid, events) == events.size());
  CHECK(store.insert_status_batch(pid, status) == status.size());

  for (int trial = 0; trial < 30; ++trial) {
    const Timestamp t0 = base + rng() % 1200;
    const Timestamp t1 = t0 + rng() % 400;
    std::set<MessageKind> kinds;
    const int nkinds = static_cast<int>(rng() % 3);
    for (int k = 0; k < nkinds; ++k) {
      kinds.insert(static_cast<MessageKind>(rng() % kMessageKindCount));
    }
    std::vector<VerboseRecord> expected;
    for (const auto& e : events) {
      if (e.timestamp >= t0 && e.timestamp < t1 &&
          (kinds.empty() || kinds.count(e.kind))) {
        expected.push_back(e);
      }
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](const VerboseRecord& a, const VerboseRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
    const auto got = store.query_messages(pid, t0, t1, kinds);
    CHECK(got == expected);
    CHECK(store.count_messages(pid, t0, t1, kinds) == expected.size());

    std::vector<StatusRecord> sexp;
    for (const auto& s : status) {
      if (s.timestamp >= t0 && s.timestamp < t1) sexp.push_back(s);
    }
    CHECK(store.query_status(pid, t0, t1) == sexp);
  }

  CHECK_THROWS_AS(store.query_messages(pid, 100, 50), StoreError);
  CHECK_THROWS_AS(store.query_messages(999, 0, 10), StoreError);
}

TEST_CASE("batches are atomic: a bad record rolls the whole batch back") {
  TempDir tmp;
  Store store(tmp.file("s.db"));
  const auto eid = store.add_experiment(sample_experiment());
  const auto pid = store.add_peer(sample_peer(eid, "10.0.0.1:6881"));
  std::mt19937_64 rng(3);
  auto events = random_events(rng, 100, 1267437600);
  VerboseRecord bad;  // request without coordinates: shape-invalid
  bad.timestamp = 1267437700;
  bad.direction = Direction::Sent;
  bad.remote_peer = "10.0.0.2:6881";
  bad.kind = MessageKind::Request;
  events.insert(events.begin() + 50, bad);
  CHECK_THROWS_AS(store.insert_verbose_batch(pid, events), StoreError);
  CHECK(store.count_messages(pid, 0, 1ull << 32) == 0);
}

TEST_CASE("delete_peer removes the peer and every one of its rows") {
  TempDir tmp;
  Store store(tmp.file("s.db"));
  const auto eid = store.add_experiment(sample_experiment());
  const auto p1 = store.add_peer(sample_peer(eid, "10.0.0.1:6881"));
  const auto p2 = store.add_peer(sample_peer(eid, "10.0.0.2:6881"));
  std::mt19937_64 rng(5);
  store.insert_verbose_batch(p1, random_events(rng, 200, 1267437600));
  store.insert_verbose_batch(p2, random_events(rng, 200, 1267437600));
  store.insert_status_batch(p1, random_status(rng, 20, 1267437600));

  store.delete_peer(p1);
  CHECK(store.list_peers(eid).size() == 1);
  CHECK_THROWS_AS(store.get_peer(p1), StoreError);
  CHECK(store.count_messages(p2, 0, 1ull << 32) == 200);
  CHECK_THROWS_AS(store.delete_peer(p1), StoreError);
}

TEST_CASE("canonical dump is deterministic and insertion-order independent") {
  TempDir tmp;
  std::mt19937_64 rng(11);
  const auto events = random_events(rng, 500, 1267437600);
  const auto status = random_status(rng, 50, 1267437600);

  auto build = [&](const std::string& path, bool split_batches) {
    Store store(path);
    const auto eid = store.add_experiment(sample_experiment());
    const auto pid = store.add_peer(sample_peer(eid, "10.0.0.1:6881"));
    if (split_batches) {
      store.insert_status_batch(pid, status);
      std::vector<VerboseRecord> first(events.begin(), events.begin() + 200);
      std::vector<VerboseRecord> rest(events.begin() + 200, events.end());
      store.insert_verbose_batch(pid, first);
      store.insert_verbose_batch(pid, rest);
    } else {
      store.insert_verbose_batch(pid, events);
      store.insert_status_batch(pid, status);
    }
    std::ostringstream out;
    store.dump_canonical(out);
    return out.str();
  };

  const std::string a = build(tmp.file("a.db"), false);
  const std::string b = build(tmp.file("b.db"), true);
  CHECK(!a.empty());
  CHECK(a == b);
}

TEST_CASE("stored rows read back exactly, in timestamp order") {
  TempDir tmp;
  Store store(tmp.file("s.db"));
  const auto eid = store.add_experiment(sample_experiment());
  const auto pid = store.add_peer(sample_peer(eid, "10.0.0.1:6881"));
  // Use a realistic stream from the simulator rather than synthetic noise.
  sim::SimConfig cfg;
  cfg.seed = 2;
  cfg.file_size = 1 << 20;
  cfg.piece_size = 1 << 16;
  cfg.block_size = 1 << 14;
  cfg.peers = {
      {"seed", "10.0.0.1:6881", true, sim::kUnlimited, sim::kUnlimited, 0, {}},
      {"leech", "10.0.0.2:6881", false, 131072, 65536, 0, {}}};
  const auto result = sim::simulate(cfg);
  const auto& leech = result.peers[1];
  store.insert_verbose_batch(pid, leech.events);
  store.insert_status_batch(pid, leech.status);
  CHECK(store.query_messages(pid, 0, 1ull << 32) == leech.events);
  CHECK(store.query_status(pid, 0, 1ull << 32) == leech.status);
}

TEST_CASE("compact_ratio guards against a zero denominator") {
  TempDir tmp;
  Store store(tmp.file("s.db"));
  CHECK_THROWS_AS(compact_ratio(0, store), StoreError);
  CHECK(compact_ratio(1ull << 40, store) > 0.0);
}
