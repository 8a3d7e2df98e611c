#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "swarmforge/log_parsers.hpp"

using namespace swarmforge;
using namespace swarmforge::logs;

namespace fs = std::filesystem;

namespace {

StatusRecord random_status(std::mt19937_64& rng) {
  StatusRecord rec;
  rec.timestamp = 1267437600 + static_cast<Timestamp>(rng() % 86400);
  rec.down_speed = rng() % 1000000;
  rec.up_speed = rng() % 1000000;
  rec.transfer_size = 1 + rng() % (1ull << 32);
  rec.downloaded = rng() % (rec.transfer_size + 1);
  rec.uploaded = rng() % (1ull << 32);
  rec.eta = rng() % 5 == 0 ? kEtaInfinite : static_cast<std::int64_t>(rng() % 100000);
  rec.num_peers = static_cast<std::uint32_t>(rng() % 200);
  rec.percent_hundredths = static_cast<std::uint32_t>(rng() % 10001);
  rec.file_name = rng() % 2 ? "test.bin" : "file with spaces.dat";
  return rec;
}

VerboseRecord random_verbose(std::mt19937_64& rng) {
  VerboseRecord rec;
  rec.timestamp = 1267437600 + static_cast<Timestamp>(rng() % 86400);
  rec.direction = rng() % 2 ? Direction::Sent : Direction::Received;
  rec.kind = static_cast<MessageKind>(rng() % kMessageKindCount);
  rec.remote_peer = "10.0." + std::to_string(rng() % 4) + "." +
                    std::to_string(1 + rng() % 250) + ":6881";
  switch (rec.kind) {
    case MessageKind::Request:
    case MessageKind::Piece:
    case MessageKind::Cancel:
      rec.piece_index = static_cast<std::uint32_t>(rng() % 4096);
      rec.block_offset = static_cast<std::uint32_t>((rng() % 4) * 16384);
      rec.block_length = 16384;
      break;
    case MessageKind::Have:
      rec.piece_index = static_cast<std::uint32_t>(rng() % 4096);
      break;
    case MessageKind::Bitfield: {
      std::string hex;
      const std::size_t n = 2 + 2 * (rng() % 8);
      for (std::size_t i = 0; i < n; ++i) hex.push_back("0123456789abcdef"[rng() % 16]);
      rec.bitfield_hex = hex;
      break;
    }
    default:
      break;
  }
  return rec;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("logparse-" + std::to_string(::getpid()) + "-" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("status line example parses field-for-field") {
  const std::string line =
      "2010-03-01T10:00:12Z ds=524288 us=262144 d=6291456 u=1048576 eta=58 "
      "peers=49 pct=12.50 size=50331648 name=test.bin";
  const StatusRecord rec = parse_status_line(line);
  CHECK(rec.down_speed == 524288);
  CHECK(rec.up_speed == 262144);
  CHECK(rec.downloaded == 6291456);
  CHECK(rec.uploaded == 1048576);
  CHECK(rec.eta == 58);
  CHECK(rec.num_peers == 49);
  CHECK(rec.percent_hundredths == 1250);
  CHECK(rec.transfer_size == 50331648);
  CHECK(rec.file_name == "test.bin");
  CHECK(render_status_line(rec) == line);
}

TEST_CASE("seeder status carries eta=inf") {
  const StatusRecord rec = parse_status_line(
      "2010-03-01T10:00:12Z ds=0 us=524288 d=0 u=10485760 eta=inf peers=12 "
      "pct=0.00 size=50331648 name=test.bin");
  CHECK(rec.eta == kEtaInfinite);
  CHECK(render_status_line(rec).find("eta=inf") != std::string::npos);
}

TEST_CASE("status round-trip property") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 1000; ++i) {
    const StatusRecord rec = random_status(rng);
    CHECK(parse_status_line(render_status_line(rec)) == rec);
  }
}

TEST_CASE("malformed status lines report a column") {
  const auto column_of = [](const std::string& line) {
    try {
      parse_status_line(line);
    } catch (const MalformedLine& e) {
      return e.column();
    }
    FAIL("expected MalformedLine");
    return std::size_t{0};
  };
  // Missing peers= field.
  CHECK(column_of("2010-03-01T10:00:12Z ds=1 us=2 d=3 u=4 eta=5 pct=1.00 "
                  "size=10 name=x") > 0);
  CHECK(column_of("garbage") == 0);
  CHECK_THROWS_AS(
      parse_status_line("2010-03-01T10:00:12Z ds=x us=2 d=3 u=4 eta=5 "
                        "peers=6 pct=1.00 size=10 name=x"),
      MalformedLine);
  // downloaded > size violates the record invariant.
  CHECK_THROWS_AS(
      parse_status_line("2010-03-01T10:00:12Z ds=1 us=2 d=11 u=4 eta=5 "
                        "peers=6 pct=1.00 size=10 name=x"),
      MalformedLine);
  // percent above 100.
  CHECK_THROWS_AS(
      parse_status_line("2010-03-01T10:00:12Z ds=1 us=2 d=3 u=4 eta=5 "
                        "peers=6 pct=101.00 size=10 name=x"),
      MalformedLine);
}

TEST_CASE("verbose line examples in both dialects") {
  const VerboseRecord piece = parse_verbose_line(
      "2010-03-01T10:00:03Z RCV piece peer=10.0.1.7:6881 index=4 begin=16384 "
      "length=16384",
      Dialect::UnifiedFile);
  CHECK(piece.kind == MessageKind::Piece);
  CHECK(piece.direction == Direction::Received);
  CHECK(piece.remote_peer == "10.0.1.7:6881");
  CHECK(piece.piece_index == 4);
  CHECK(piece.block_offset == 16384);
  CHECK(piece.block_length == 16384);

  // cancel shares the request payload shape.
  const VerboseRecord cancel = parse_verbose_line(
      "2010-03-01T10:00:05Z SND cancel peer=10.0.1.7:6881 index=9 begin=0 "
      "length=16384",
      Dialect::UnifiedFile);
  CHECK(cancel.kind == MessageKind::Cancel);
  CHECK(cancel.piece_index == 9);

  // Per-peer files omit the peer column; the remote comes from outside.
  const VerboseRecord have = parse_verbose_line(
      "2010-03-01T10:00:03Z SND have index=2", Dialect::PerPeerFiles,
      "10.0.1.9:6881");
  CHECK(have.kind == MessageKind::Have);
  CHECK(have.remote_peer == "10.0.1.9:6881");
  CHECK(have.piece_index == 2);
}

TEST_CASE("verbose round-trip property in both dialects") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 1000; ++i) {
    const VerboseRecord rec = random_verbose(rng);
    CHECK(parse_verbose_line(render_verbose_line(rec, Dialect::UnifiedFile),
                             Dialect::UnifiedFile) == rec);
    CHECK(parse_verbose_line(render_verbose_line(rec, Dialect::PerPeerFiles),
                             Dialect::PerPeerFiles, rec.remote_peer) == rec);
  }
}

TEST_CASE("stream parsing skips unknown kinds but rejects bad payloads") {
  std::istringstream in(
      "2010-03-01T10:00:00Z SND interested peer=10.0.0.1:6881\n"
      "2010-03-01T10:00:01Z RCV keepalive peer=10.0.0.1:6881\n"
      "debug: connection pool resized\n"
      "\n"
      "2010-03-01T10:00:02Z RCV piece peer=10.0.0.1:6881 index=0 begin=0 "
      "length=16384\n");
  std::vector<VerboseRecord> records;
  const auto stats = parse_verbose_stream(
      in, Dialect::UnifiedFile,
      [&](const VerboseRecord& r) { records.push_back(r); });
  CHECK(stats.records == 2);
  CHECK(stats.skipped_unknown == 2);
  REQUIRE(records.size() == 2);
  CHECK(records[0].kind == MessageKind::Interested);
  CHECK(records[1].kind == MessageKind::Piece);

  std::istringstream bad(
      "2010-03-01T10:00:02Z RCV piece peer=10.0.0.1:6881 index=0\n");
  CHECK_THROWS_AS(parse_verbose_stream(bad, Dialect::UnifiedFile,
                                       [](const VerboseRecord&) {}),
                  MalformedLine);
}

TEST_CASE("dialect detection") {
  CHECK_THROWS_AS(detect_dialect({}), AmbiguousDialect);
  CHECK(detect_dialect({"vlog.log"}) == Dialect::UnifiedFile);
  CHECK(detect_dialect({"vlog.10.0.1.7:6881.log", "vlog.10.0.1.8:6881.log"}) ==
        Dialect::PerPeerFiles);
  // Mixed naming cannot be the per-peer layout.
  CHECK(detect_dialect({"vlog.10.0.1.7:6881.log", "other.log"}) ==
        Dialect::UnifiedFile);
}

TEST_CASE("remote peer extraction from per-peer file names") {
  CHECK(remote_peer_from_filename("/tmp/x/vlog.10.0.1.7:6881.log") ==
        "10.0.1.7:6881");
  CHECK(remote_peer_from_filename("vlog.log") == "");
  CHECK(per_peer_vlog_path("/tmp/x/vlog", "10.0.1.7:6881") ==
        "/tmp/x/vlog.10.0.1.7:6881.log");
}

TEST_CASE("file parsing round-trips through disk") {
  TempDir tmp;
  std::mt19937_64 rng(31);
  std::vector<VerboseRecord> records;
  for (int i = 0; i < 200; ++i) records.push_back(random_verbose(rng));
  const std::string path = (tmp.path / "vlog.log").string();
  {
    std::ofstream out(path);
    for (const auto& rec : records) {
      out << render_verbose_line(rec, Dialect::UnifiedFile) << '\n';
    }
  }
  CHECK(parse_verbose_file(path, Dialect::UnifiedFile) == records);

  const std::string missing = (tmp.path / "nope.log").string();
  CHECK_THROWS_AS(parse_verbose_file(missing, Dialect::UnifiedFile),
                  MalformedLine);
}
