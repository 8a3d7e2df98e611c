#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "swarmforge/agent.hpp"
#include "swarmforge/net.hpp"
#include "swarmforge/torrent.hpp"
#include "swarmforge/wire.hpp"

using namespace swarmforge;
using namespace swarmforge::agent;
using wire::CommandEnvelope;
using wire::CommandKind;
using wire::ErrorCode;
using wire::RespStatus;

namespace fs = std::filesystem;

namespace {

std::string btsim_path() {
  const char* dir = std::getenv("SWARMFORGE_BIN_DIR");
  REQUIRE_MESSAGE(dir != nullptr, "SWARMFORGE_BIN_DIR must point at the "
                                  "build output directory");
  return (fs::path(dir) / "btsim").string();
}

std::vector<std::string> sleeper_argv(const adapters::AdapterSpec&,
                                      const adapters::LaunchSpec&) {
  return {"/bin/sleep", "30"};
}

std::vector<std::string> spewer_argv(const adapters::AdapterSpec&,
                                     const adapters::LaunchSpec&) {
  // Writes well over the 64 KiB output tail, then exits cleanly.
  return {"/bin/sh", "-c", "yes spew | head -c 200000"};
}

struct Fixture {
  fs::path tmp;
  std::string torrent;
  Agent agent;

  static AgentOptions make_options(const fs::path& tmp) {
    AgentOptions options;
    options.state_dir = (tmp / "state").string();
    options.registry =
        adapters::Registry::with_builtins({{"simulated", btsim_path()}});
    options.registry.register_adapter(adapters::AdapterSpec{
        "sleeper", "/bin/sleep", logs::Dialect::UnifiedFile, sleeper_argv});
    options.registry.register_adapter(adapters::AdapterSpec{
        "spewer", "/bin/sh", logs::Dialect::UnifiedFile, spewer_argv});
    // The simulator again, but emitting one verbose file per remote peer.
    adapters::AdapterSpec per_peer = options.registry.resolve("simulated");
    per_peer.name = "simulated-pp";
    per_peer.vlog_dialect = logs::Dialect::PerPeerFiles;
    options.registry.register_adapter(std::move(per_peer));
    return options;
  }

  Fixture()
      : tmp(fs::temp_directory_path() /
            ("agent-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(reinterpret_cast<std::uintptr_t>(this)))),
        torrent([this] {
          fs::create_directories(tmp);
          torrent::TorrentInfo info;
          info.name = "test.bin";
          info.size = 262144;
          info.piece_size = 32768;
          info.block_size = 16384;
          info.seed = 5;
          const std::string path = (tmp / "t.torrent").string();
          torrent::save_torrent(info, path);
          return path;
        }()),
        agent(make_options(tmp)) {}

  ~Fixture() {
    agent.stop();
    std::error_code ec;
    fs::remove_all(tmp, ec);
  }

  std::string file(const std::string& name) const {
    return (tmp / name).string();
  }

  CommandEnvelope start_cmd(const std::string& tag,
                            const std::string& client = "simulated",
                            wire::KvList extra = {}) {
    wire::KvList args = {{"TORRENT", torrent},
                         {"DOWN_DIR", file("d" + tag)},
                         {"SLOG", file("s" + tag + ".log")},
                         {"VLOG", file("v" + tag + ".log")},
                         {"CLIENT", client},
                         {"ROLE", "leecher"}};
    for (auto& kv : extra) args.push_back(std::move(kv));
    return CommandEnvelope{CommandKind::StartClient, std::move(args)};
  }

  std::int64_t start(const std::string& tag,
                     const std::string& client = "simulated",
                     wire::KvList extra = {}) {
    const auto resp = agent.handle(start_cmd(tag, client, std::move(extra)));
    REQUIRE(resp.status == RespStatus::Ok);
    return std::stoll(*wire::find_arg(resp.body, "id"));
  }

  std::string poll_state(std::int64_t id) {
    const auto resp =
        agent.handle(CommandEnvelope{CommandKind::GetClients, {}});
    REQUIRE(resp.status == RespStatus::Ok);
    const auto state =
        wire::find_arg(resp.body, "state_" + std::to_string(id));
    REQUIRE(state.has_value());
    return *state;
  }

  std::string wait_done(std::int64_t id, int timeout_ms = 10000) {
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(timeout_ms);
    while (std::chrono::steady_clock::now() < deadline) {
      const std::string state = poll_state(id);
      if (state != "RUNNING") return state;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    FAIL("session did not finish in time");
    return "RUNNING";
  }
};

CommandEnvelope with_id(CommandKind kind, std::int64_t id) {
  return CommandEnvelope{kind, {{"ID", std::to_string(id)}}};
}

}  // namespace

TEST_CASE("session lifecycle over the in-process handler") {
  Fixture fx;
  const auto id1 = fx.start("1");
  const auto id2 = fx.start("2");
  CHECK(id1 == 1);  // ids are assigned monotonically from 1
  CHECK(id2 == 2);

  CHECK(fx.wait_done(id1) == "EXITED");
  CHECK(fx.wait_done(id2) == "EXITED");

  // The simulated leecher completed: payload file and logs exist.
  CHECK(fs::file_size(fx.file("d1/test.bin")) == 262144);
  CHECK(fs::is_regular_file(fx.file("s1.log")));
  CHECK(fs::is_regular_file(fx.file("v1.log")));

  // GET-STATUS reflects the last status line (complete: eta 0).
  const auto status = fx.agent.handle(with_id(CommandKind::GetStatus, id1));
  REQUIRE(status.status == RespStatus::Ok);
  CHECK(wire::find_arg(status.body, "eta") == "0");
  CHECK(wire::find_arg(status.body, "downloaded") == "262144");
  CHECK(wire::find_arg(status.body, "down_speed").has_value());
  CHECK(wire::find_arg(status.body, "num_peers").has_value());

  // GET-OUTPUT returns the small capture untruncated.
  const auto output = fx.agent.handle(with_id(CommandKind::GetOutput, id1));
  REQUIRE(output.status == RespStatus::Ok);
  CHECK(wire::find_arg(output.body, "truncated") == "0");
  CHECK(wire::find_arg(output.body, "output")->find("peer=") !=
        std::string::npos);
}

TEST_CASE("stop is forceful for a live process and idempotent afterwards") {
  Fixture fx;
  const auto id = fx.start("1", "sleeper");
  CHECK(fx.poll_state(id) == "RUNNING");
  const auto stopped = fx.agent.handle(with_id(CommandKind::StopClient, id));
  REQUIRE(stopped.status == RespStatus::Ok);
  CHECK(wire::find_arg(stopped.body, "state") == "STOPPED");
  const auto again = fx.agent.handle(with_id(CommandKind::StopClient, id));
  REQUIRE(again.status == RespStatus::Ok);
  CHECK(wire::find_arg(again.body, "state") == "STOPPED");

  // Stopping a session that already exited on its own reports its state.
  const auto id2 = fx.start("2");
  fx.wait_done(id2);
  const auto after = fx.agent.handle(with_id(CommandKind::StopClient, id2));
  REQUIRE(after.status == RespStatus::Ok);
  CHECK(wire::find_arg(after.body, "state") == "EXITED");
}

TEST_CASE("error taxonomy") {
  Fixture fx;
  for (const auto kind : {CommandKind::StopClient, CommandKind::GetStatus,
                          CommandKind::GetOutput}) {
    const auto resp = fx.agent.handle(with_id(kind, 999));
    CHECK(resp.status == RespStatus::Err);
    CHECK(resp.error_code == ErrorCode::NoSuchId);
  }

  const auto unknown = fx.agent.handle(fx.start_cmd("x", "no-such-client"));
  CHECK(unknown.error_code == ErrorCode::BadArgs);

  // A session whose client never writes a status log.
  const auto id = fx.start("1", "sleeper");
  const auto status = fx.agent.handle(with_id(CommandKind::GetStatus, id));
  CHECK(status.error_code == ErrorCode::IoError);

  // CLEANUP needs at least one key; all-zero flags are rejected too.
  CHECK_THROWS_AS(fx.agent.handle(CommandEnvelope{CommandKind::Cleanup, {}}),
                  wire::WireError);
  const auto zeros = fx.agent.handle(
      CommandEnvelope{CommandKind::Cleanup, {{"ALL", "0"}, {"DOWN", "0"}}});
  CHECK(zeros.error_code == ErrorCode::BadArgs);
}

TEST_CASE("output tail is capped at 64 KiB with a truncation marker") {
  Fixture fx;
  const auto id = fx.start("1", "spewer");
  fx.wait_done(id);
  const auto resp = fx.agent.handle(with_id(CommandKind::GetOutput, id));
  REQUIRE(resp.status == RespStatus::Ok);
  CHECK(wire::find_arg(resp.body, "truncated") == "1");
  const auto tail = wire::find_arg(resp.body, "output");
  CHECK(tail->size() == kOutputTailBytes);
  // Newlines travel as the record separator so the value stays one line.
  CHECK(tail->find('\n') == std::string::npos);
  CHECK(tail->find('\x1e') != std::string::npos);
}

TEST_CASE("archive packs session logs; cleanup removes only declared files") {
  Fixture fx;
  const auto id1 = fx.start("1");
  const auto id2 = fx.start("2", "simulated-pp");
  fx.wait_done(id1);
  fx.wait_done(id2);

  // Canary files the agent never learned about must survive everything.
  const std::string canary = fx.file("keep.txt");
  std::ofstream(canary) << "precious";

  const auto archived = fx.agent.handle(CommandEnvelope{
      CommandKind::Archive,
      {{"FILES", fx.file("s1.log") + "," + fx.file("v1.log")}}});
  REQUIRE(archived.status == RespStatus::Ok);
  const std::string archive_path = *wire::find_arg(archived.body, "archive");
  CHECK(fs::is_regular_file(archive_path));
  CHECK(!fs::exists(fx.file("s1.log")));
  CHECK(!fs::exists(fx.file("v1.log")));

  // Archiving a missing file fails without side effects.
  const auto missing = fx.agent.handle(CommandEnvelope{
      CommandKind::Archive, {{"FILES", fx.file("ghost.log")}}});
  CHECK(missing.error_code == ErrorCode::IoError);

  // The per-peer session produced remote-suffixed vlog files.
  bool per_peer_seen = false;
  for (const auto& entry : fs::directory_iterator(fx.tmp)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("v2.") && name.ends_with(".log")) {
      per_peer_seen = true;
    }
  }
  CHECK(per_peer_seen);

  const auto slogs = fx.agent.handle(
      CommandEnvelope{CommandKind::Cleanup, {{"SLOGS", "1"}}});
  REQUIRE(slogs.status == RespStatus::Ok);
  CHECK(!fs::exists(fx.file("s2.log")));
  CHECK(fs::exists(fx.file("d2/test.bin")));  // payload untouched

  const auto vlogs = fx.agent.handle(
      CommandEnvelope{CommandKind::Cleanup, {{"VLOGS", "1"}}});
  REQUIRE(vlogs.status == RespStatus::Ok);
  for (const auto& entry : fs::directory_iterator(fx.tmp)) {
    const std::string name = entry.path().filename().string();
    CHECK(!(name.starts_with("v2.") && name.ends_with(".log")));
  }
  CHECK(fs::exists(fx.file("d1/test.bin")));

  const auto rest = fx.agent.handle(CommandEnvelope{
      CommandKind::Cleanup, {{"DOWN", "1"}, {"ARCHIVE", "1"}}});
  REQUIRE(rest.status == RespStatus::Ok);
  CHECK(!fs::exists(fx.file("d1/test.bin")));
  CHECK(!fs::exists(fx.file("d2/test.bin")));
  CHECK(!fs::exists(archive_path));

  CHECK(fs::is_regular_file(canary));
}

TEST_CASE("the daemon serves the protocol over TCP") {
  Fixture fx;
  REQUIRE(fx.agent.port() != 0);
  net::Socket sock = net::Socket::connect("127.0.0.1", fx.agent.port());

  auto resp = net::roundtrip(sock, CommandEnvelope{CommandKind::GetClients, {}});
  CHECK(resp.status == RespStatus::Ok);
  CHECK(wire::find_arg(resp.body, "clients") == "");

  resp = net::roundtrip(sock, fx.start_cmd("1"));
  REQUIRE(resp.status == RespStatus::Ok);
  const std::string id = *wire::find_arg(resp.body, "id");
  CHECK(id == "1");

  // Multiple commands on the same connection.
  resp = net::roundtrip(sock, CommandEnvelope{CommandKind::GetClients, {}});
  CHECK(wire::find_arg(resp.body, "clients") == "1");

  // A malformed command draws ERR UNKNOWN_CMD, then the agent hangs up.
  sock.send_all(wire::frame_payload("BOGUS-CMD"));
  const auto raw = sock.recv_frame_payload();
  REQUIRE(raw.has_value());
  const auto err = wire::decode_response_payload(*raw);
  CHECK(err.status == RespStatus::Err);
  CHECK(err.error_code == ErrorCode::UnknownCmd);
  CHECK(!sock.recv_frame_payload().has_value());  // connection closed

  // Garbage bytes on a fresh connection must not take the agent down.
  {
    net::Socket bad = net::Socket::connect("127.0.0.1", fx.agent.port());
    bad.send_all({0xff, 0xff, 0xff});
  }
  net::Socket again = net::Socket::connect("127.0.0.1", fx.agent.port());
  resp = net::roundtrip(again, CommandEnvelope{CommandKind::GetClients, {}});
  CHECK(resp.status == RespStatus::Ok);
}
