#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swarmforge/adapters.hpp"

using namespace swarmforge;
using namespace swarmforge::adapters;

namespace {

LaunchSpec sample_launch() {
  LaunchSpec launch;
  launch.torrent_path = "/exp/t.torrent";
  launch.download_dir = "/exp/d1";
  launch.slog_path = "/exp/s1.log";
  launch.vlog_path = "/exp/v1.log";
  launch.down_limit = 524288;
  launch.up_limit = 262144;
  return launch;
}

}  // namespace

TEST_CASE("registry resolves built-ins with their dialects") {
  const Registry registry = Registry::with_builtins({{"simulated", "/opt/btsim"}});
  CHECK(registry.has("simulated"));
  CHECK(registry.resolve("simulated").executable == "/opt/btsim");
  CHECK(registry.resolve("simulated").vlog_dialect ==
        logs::Dialect::UnifiedFile);
  CHECK(registry.resolve("hrktorrent").vlog_dialect ==
        logs::Dialect::PerPeerFiles);
  CHECK(registry.resolve("tribler").vlog_dialect == logs::Dialect::UnifiedFile);
  CHECK_THROWS_AS(registry.resolve("nonexistent"), AdapterError);
}

TEST_CASE("duplicate registration is rejected") {
  Registry registry = Registry::with_builtins();
  CHECK_THROWS_AS(
      registry.register_adapter(AdapterSpec{"simulated", "x",
                                            logs::Dialect::UnifiedFile,
                                            nullptr}),
      AdapterError);
}

TEST_CASE("simulated adapter golden argv") {
  const Registry registry = Registry::with_builtins({{"simulated", "/opt/btsim"}});
  LaunchSpec launch = sample_launch();
  launch.extra = {{"peers", "p0/10.0.0.1:6881/s/inf/inf/0/-"},
                  {"self", "10.0.0.1:6881"}};
  const auto& spec = registry.resolve("simulated");
  const std::vector<std::string> expected = {
      "/opt/btsim",  "--torrent", "/exp/t.torrent", "--role",    "leecher",
      "--down",      "524288",    "--up",           "262144",    "--down-dir",
      "/exp/d1",     "--slog",    "/exp/s1.log",    "--vlog",    "/exp/v1.log",
      "--dialect",   "unified",   "--peers",        "p0/10.0.0.1:6881/s/inf/inf/0/-",
      "--self",      "10.0.0.1:6881"};
  CHECK(build_command_line(spec, launch) == expected);
  // Determinism: identical placement, identical argv.
  CHECK(build_command_line(spec, launch) == build_command_line(spec, launch));
}

TEST_CASE("unlimited caps omit the limit flags") {
  const Registry registry = Registry::with_builtins();
  LaunchSpec launch = sample_launch();
  launch.down_limit.reset();
  launch.up_limit.reset();
  launch.seeder = true;
  const auto argv =
      build_command_line(registry.resolve("simulated"), launch);
  for (const auto& arg : argv) {
    CHECK(arg != "--down");
    CHECK(arg != "--up");
  }
  CHECK(argv[4] == "seeder");
}

TEST_CASE("hrktorrent wrapper argv ends with the torrent path") {
  const Registry registry = Registry::with_builtins();
  const auto argv =
      build_command_line(registry.resolve("hrktorrent"), sample_launch());
  REQUIRE(!argv.empty());
  CHECK(argv.back() == "/exp/t.torrent");
  CHECK(argv.front() == "hrktorrent");
}

TEST_CASE("missing paths and shell metacharacters are rejected") {
  const Registry registry = Registry::with_builtins();
  LaunchSpec launch = sample_launch();
  launch.torrent_path.clear();
  CHECK_THROWS_AS(build_command_line(registry.resolve("simulated"), launch),
                  AdapterError);
  launch = sample_launch();
  launch.download_dir = "/exp/d1; rm -rf /";
  CHECK_THROWS_AS(build_command_line(registry.resolve("simulated"), launch),
                  AdapterError);
}
