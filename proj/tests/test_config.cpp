#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "swarmforge/config.hpp"

using namespace swarmforge::config;

namespace {

const char* kNodesXml = R"(<nodes>
  <node id="n1" host="10.1.0.1" agent-port="5001" ssh-port="22" user="tester"
        agent-path="/opt/agent">
    <client name="simulated" path="/opt/btsim"/>
    <client name="hrktorrent" path="/usr/bin/hrktorrent"/>
  </node>
  <node id="n2" host="10.1.0.2">
    <client name="simulated" path="/opt/btsim"/>
  </node>
</nodes>
)";

std::string swarm_xml(const std::string& peers) {
  return "<swarm id=\"s1\" torrent=\"/exp/t.torrent\">\n" + peers +
         "</swarm>\n";
}

const char* kSeederPeer =
    "<peer node=\"n1\" client=\"simulated\" role=\"seeder\" ddir=\"/exp/d0\" "
    "slog=\"/exp/s0.log\" vlog=\"/exp/v0.log\"/>\n";

}  // namespace

TEST_CASE("node inventory parses attributes and defaults") {
  const auto nodes = load_nodes(kNodesXml);
  REQUIRE(nodes.size() == 2);
  CHECK(nodes[0].node_id == "n1");
  CHECK(nodes[0].host == "10.1.0.1");
  CHECK(nodes[0].agent_port == 5001);
  CHECK(nodes[0].ssh_port == 22);
  CHECK(nodes[0].username == "tester");
  CHECK(nodes[0].agent_path == "/opt/agent");
  CHECK(nodes[0].client_paths.at("simulated") == "/opt/btsim");
  // The shared listening port defaults to 5000 when the file omits it.
  CHECK(nodes[1].agent_port == 5000);
  CHECK(find_node(nodes, "n2") == &nodes[1]);
  CHECK(find_node(nodes, "ghost") == nullptr);
}

TEST_CASE("node inventory validation errors") {
  CHECK_THROWS_WITH_AS(
      load_nodes("<nodes><node id=\"a\" host=\"h\"><client name=\"c\" "
                 "path=\"p\"/></node><node id=\"a\" host=\"h\"><client "
                 "name=\"c\" path=\"p\"/></node></nodes>"),
      "DuplicateNodeId: a", ConfigError);
  CHECK_THROWS_AS(
      load_nodes("<nodes><node id=\"a\" host=\"h\" agent-port=\"0\">"
                 "<client name=\"c\" path=\"p\"/></node></nodes>"),
      ConfigError);
  CHECK_THROWS_AS(
      load_nodes("<nodes><node id=\"a\" host=\"h\" agent-port=\"70000\">"
                 "<client name=\"c\" path=\"p\"/></node></nodes>"),
      ConfigError);
  // A node without clients cannot host any placement.
  CHECK_THROWS_AS(load_nodes("<nodes><node id=\"a\" host=\"h\"/></nodes>"),
                  ConfigError);
  CHECK_THROWS_AS(load_nodes("not xml at all <"), ConfigError);
}

TEST_CASE("swarm parses a two-class 100-peer shape") {
  const auto nodes = load_nodes(kNodesXml);
  std::string peers{kSeederPeer};
  for (int i = 0; i < 50; ++i) {
    peers += "<peer node=\"n1\" client=\"simulated\" role=\"leecher\" "
             "down=\"524288\" up=\"262144\" ddir=\"/exp/df" +
             std::to_string(i) + "\" slog=\"/exp/sf" + std::to_string(i) +
             ".log\" vlog=\"/exp/vf" + std::to_string(i) + ".log\"/>\n";
  }
  for (int i = 0; i < 50; ++i) {
    peers += "<peer node=\"n2\" client=\"simulated\" role=\"leecher\" "
             "down=\"64K\" up=\"32K\" ddir=\"/exp/ds" +
             std::to_string(i) + "\" slog=\"/exp/ss" + std::to_string(i) +
             ".log\" vlog=\"/exp/vs" + std::to_string(i) + ".log\"/>\n";
  }
  const auto swarm = load_swarm(swarm_xml(peers), nodes);
  CHECK(swarm.swarm_id == "s1");
  CHECK(swarm.torrent_path == "/exp/t.torrent");
  REQUIRE(swarm.placements.size() == 101);
  CHECK(swarm.placements[1].down_limit == 524288);
  CHECK(swarm.placements[1].up_limit == 262144);
  // K-suffixed limits mean KB/s with 1 K = 1024.
  CHECK(swarm.placements[51].down_limit == 65536);
  CHECK(swarm.placements[51].up_limit == 32768);
  CHECK(!swarm.placements[0].down_limit);  // unlimited seeder
}

TEST_CASE("swarm validation errors") {
  const auto nodes = load_nodes(kNodesXml);
  CHECK_THROWS_WITH_AS(
      load_swarm(swarm_xml("<peer node=\"ghost\" client=\"simulated\" "
                           "role=\"seeder\" ddir=\"d\" slog=\"s\" "
                           "vlog=\"v\"/>\n"),
                 nodes),
      "UnknownNodeId: ghost", ConfigError);
  CHECK_THROWS_AS(
      load_swarm(swarm_xml("<peer node=\"n1\" client=\"simulated\" "
                           "role=\"leecher\" ddir=\"d\" slog=\"s\" "
                           "vlog=\"v\"/>\n"),
                 nodes),
      ConfigError);  // NoSeeder
  CHECK_THROWS_AS(
      load_swarm(swarm_xml("<peer node=\"n2\" client=\"hrktorrent\" "
                           "role=\"seeder\" ddir=\"d\" slog=\"s\" "
                           "vlog=\"v\"/>\n"),
                 nodes),
      ConfigError);  // client not present on that node
  CHECK_THROWS_AS(
      load_swarm(swarm_xml("<peer node=\"n1\" client=\"simulated\" "
                           "role=\"seeder\" down=\"0\" ddir=\"d\" slog=\"s\" "
                           "vlog=\"v\"/>\n"),
                 nodes),
      ConfigError);  // BadLimit
  CHECK_THROWS_AS(
      load_swarm(swarm_xml("<peer node=\"n1\" client=\"simulated\" "
                           "role=\"seeder\" start=\"10\" stop=\"5\" "
                           "ddir=\"d\" slog=\"s\" vlog=\"v\"/>\n"),
                 nodes),
      ConfigError);  // stop before start
}

TEST_CASE("limits parse and render") {
  CHECK(parse_limit("unlimited") == std::nullopt);
  CHECK(parse_limit("524288") == 524288);
  CHECK(parse_limit("512K") == 524288);
  CHECK(parse_limit("64k") == 65536);
  CHECK_THROWS_AS(parse_limit("0"), ConfigError);
  CHECK_THROWS_AS(parse_limit("12x"), ConfigError);
  CHECK(render_limit(std::nullopt) == "unlimited");
  CHECK(render_limit(65536) == "65536");
}

TEST_CASE("load/render idempotence") {
  const auto nodes = load_nodes(kNodesXml);
  CHECK(load_nodes(render_nodes(nodes)) == nodes);

  const auto swarm = load_swarm(
      swarm_xml(std::string(kSeederPeer) +
                "<peer node=\"n2\" client=\"simulated\" role=\"leecher\" "
                "down=\"64K\" up=\"32K\" ddir=\"/exp/d1\" "
                "slog=\"/exp/s1.log\" vlog=\"/exp/v1.log\" start=\"5\" "
                "stop=\"90\"/>\n"),
      nodes);
  CHECK(load_swarm(render_swarm(swarm), nodes) == swarm);
}
