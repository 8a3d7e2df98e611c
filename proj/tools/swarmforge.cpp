// Operator CLI: log ingestion, analysis/export, store dump and the
// multi-node commander front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmforge/analysis.hpp"
#include "swarmforge/commander.hpp"
#include "swarmforge/config.hpp"
#include "swarmforge/log_parsers.hpp"
#include "swarmforge/store.hpp"
#include "swarmforge/wire.hpp"

using namespace swarmforge;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    if (end > start) out.push_back(text.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// "t0:t1" in epoch seconds; blank half means open end.
std::pair<Timestamp, Timestamp> parse_window(const std::string& text) {
  Timestamp t0 = 0, t1 = std::numeric_limits<Timestamp>::max();
  if (text.empty()) return {t0, t1};
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::runtime_error("window must be t0:t1");
  }
  const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
  if (!a.empty()) t0 = std::stoll(a);
  if (!b.empty()) t1 = std::stoll(b);
  return {t0, t1};
}

int run_parse(const std::string& db_path, const std::string& slog,
              const std::vector<std::string>& vlogs,
              const std::string& dialect_name, const std::string& addr,
              const std::string& client, const std::string& swarm_id) {
  store::Store db(db_path);
  store::ExperimentMeta experiment;
  experiment.swarm_id = swarm_id;
  std::vector<StatusRecord> status;
  if (!slog.empty()) status = logs::parse_status_file(slog);
  if (!status.empty()) {
    experiment.start_time = status.front().timestamp;
    experiment.file_name = status.front().file_name;
    experiment.file_size = status.front().transfer_size;
  }
  experiment.num_peers = 1;
  const std::int64_t experiment_id = db.add_experiment(experiment);

  store::PeerMeta peer;
  peer.experiment_id = experiment_id;
  peer.client_name = client;
  peer.addr = addr;
  const std::int64_t peer_id = db.add_peer(peer);

  if (!status.empty()) db.insert_status_batch(peer_id, status);

  logs::Dialect dialect;
  if (dialect_name == "unified") {
    dialect = logs::Dialect::UnifiedFile;
  } else if (dialect_name == "per-peer") {
    dialect = logs::Dialect::PerPeerFiles;
  } else {
    dialect = logs::detect_dialect(vlogs);
  }
  std::size_t events = 0, skipped = 0;
  for (const auto& path : vlogs) {
    logs::VerboseParseStats stats;
    const auto records = logs::parse_verbose_file(path, dialect, &stats);
    db.insert_verbose_batch(peer_id, records);
    events += records.size();
    skipped += stats.skipped_unknown;
  }
  std::printf("experiment=%lld peer=%lld status_rows=%zu events=%zu skipped=%zu\n",
              static_cast<long long>(experiment_id),
              static_cast<long long>(peer_id), status.size(), events, skipped);
  return 0;
}

int run_analyze_peer(const std::string& db_path, std::int64_t peer_id,
                     const std::string& window, const std::string& out_prefix,
                     std::uint64_t cap) {
  const auto [t0, t1] = parse_window(window);
  store::Store db(db_path);
  const auto speed = analysis::speed_series(
      db, peer_id, analysis::SeriesDirection::Down, t0, t1);
  const auto accel = analysis::acceleration_series(speed);
  const auto stats = analysis::message_stats(db, peer_id, t0, t1);
  analysis::export_series_csv(speed, out_prefix + "_speed.csv");
  analysis::export_accel_csv(accel, out_prefix + "_accel.csv");
  analysis::export_stats_csv(stats, out_prefix + "_stats.csv");
  analysis::export_series_svg(speed, out_prefix + "_speed.svg");
  analysis::export_stats_svg(stats, out_prefix + "_stats.svg");
  std::printf("points=%zu messages=%llu\n", speed.points.size(),
              static_cast<unsigned long long>(stats.total()));
  if (cap > 0) {
    const auto ramp_end = analysis::detect_bootstrap(accel, cap);
    if (ramp_end) {
      std::printf("bootstrap_ramp_end=%lld\n",
                  static_cast<long long>(*ramp_end));
    } else {
      std::printf("bootstrap_ramp_end=none\n");
    }
  }
  return 0;
}

int run_analyze_compare(const std::string& db_path,
                        const std::string& peers_csv,
                        const std::string& window,
                        const std::string& out_prefix) {
  const auto peers = split_csv(peers_csv);
  if (peers.size() != 2) {
    std::fprintf(stderr, "--peers takes exactly two ids\n");
    return 2;
  }
  const auto [t0, t1] = parse_window(window);
  store::Store db(db_path);
  const auto result =
      analysis::compare(db, std::stoll(peers[0]), std::stoll(peers[1]), t0, t1);
  analysis::export_series_csv(result.speed_a, out_prefix + "_a_speed.csv");
  analysis::export_series_csv(result.speed_b, out_prefix + "_b_speed.csv");
  analysis::export_stats_csv(result.stats_a, out_prefix + "_a_stats.csv");
  analysis::export_stats_csv(result.stats_b, out_prefix + "_b_stats.csv");
  std::printf("common_window=%lld:%lld\n",
              static_cast<long long>(result.common_t0),
              static_cast<long long>(result.common_t1));
  return 0;
}

std::vector<config::NodeSpec> filtered_nodes(
    const std::vector<config::NodeSpec>& nodes, const std::string& filter) {
  if (filter.empty()) return nodes;
  std::set<std::string> keep;
  for (const auto& id : split_csv(filter)) keep.insert(id);
  std::vector<config::NodeSpec> out;
  for (const auto& node : nodes) {
    if (keep.count(node.node_id)) out.push_back(node);
  }
  return out;
}

int emit_results(const std::vector<commander::NodeResult>& results) {
  std::fputs(commander::format_results(results).c_str(), stdout);
  return commander::all_ok(results) ? 0 : 1;
}

int run_commander(const std::string& nodes_file, const std::string& swarm_file,
                  const std::string& command, const std::string& nodes_filter,
                  const std::string& ids_csv, const std::string& files_csv,
                  const std::vector<std::string>& flags,
                  const std::string& agent_binary, const std::string& store_path,
                  const std::string& summary_path, const std::string& work_dir,
                  std::optional<double> timeout) {
  const auto inventory = config::load_nodes(slurp(nodes_file));
  const auto nodes = filtered_nodes(inventory, nodes_filter);
  if (nodes.empty()) {
    std::fprintf(stderr, "no nodes selected\n");
    return 2;
  }

  if (command == "bootstrap") {
    commander::LocalExecBootstrap transport(agent_binary, work_dir);
    const auto results = commander::cmd_bootstrap(nodes, transport);
    const int rc = emit_results(results);
    // Daemons keep running after the commander exits.
    std::_Exit(rc);
  }
  if (command == "run") {
    const auto swarm = config::load_swarm(slurp(swarm_file), inventory);
    commander::ScenarioOptions options;
    options.store_path = store_path;
    options.summary_path = summary_path;
    options.work_dir = work_dir;
    options.agent_binary = agent_binary;
    options.timeout_seconds = timeout;
    const auto summary = commander::run_scenario(nodes, swarm, options);
    std::printf("%s\n", commander::summary_to_json(summary).c_str());
    return 0;
  }

  wire::CommandEnvelope cmd;
  if (command == "getclients") {
    cmd.kind = wire::CommandKind::GetClients;
  } else if (command == "archive") {
    cmd.kind = wire::CommandKind::Archive;
    cmd.args = {{"FILES", files_csv}};
  } else if (command == "cleanup") {
    cmd.kind = wire::CommandKind::Cleanup;
    for (const auto& flag : flags) {
      std::string key = flag;
      for (char& c : key) c = static_cast<char>(std::toupper(c));
      cmd.args.emplace_back(key, "1");
    }
  } else if (command == "stop" || command == "status" ||
             command == "getoutput") {
    const auto ids = split_csv(ids_csv);
    if (ids.empty()) {
      std::fprintf(stderr, "%s requires --ids\n", command.c_str());
      return 2;
    }
    std::vector<commander::NodeResult> all;
    bool ok = true;
    for (const auto& id : ids) {
      wire::CommandEnvelope per{
          command == "stop"     ? wire::CommandKind::StopClient
          : command == "status" ? wire::CommandKind::GetStatus
                                : wire::CommandKind::GetOutput,
          {{"ID", id}}};
      auto results = commander::fan_out(nodes, per);
      ok = ok && commander::all_ok(results);
      for (auto& r : results) {
        r.response.body.emplace_back("id", id);
        all.push_back(std::move(r));
      }
    }
    std::fputs(commander::format_results(all).c_str(), stdout);
    return ok ? 0 : 1;
  } else {
    std::fprintf(stderr, "unknown commander command: %s\n", command.c_str());
    return 2;
  }
  return emit_results(commander::fan_out(nodes, cmd));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarm experiment toolkit"};
  app.require_subcommand(1);

  // parse
  auto* parse = app.add_subcommand("parse", "ingest log files into a store");
  std::string p_db, p_slog, p_dialect = "auto", p_addr = "0.0.0.0:0";
  std::string p_client = "simulated", p_swarm = "adhoc";
  std::vector<std::string> p_vlogs;
  parse->add_option("--db", p_db, "store file")->required();
  parse->add_option("--slog", p_slog, "status log");
  parse->add_option("--vlog", p_vlogs, "verbose log file(s)");
  parse->add_option("--dialect", p_dialect, "auto|unified|per-peer")
      ->check(CLI::IsMember({"auto", "unified", "per-peer"}));
  parse->add_option("--addr", p_addr, "peer address to record");
  parse->add_option("--client", p_client, "client name to record");
  parse->add_option("--swarm-id", p_swarm, "experiment label");

  // analyze peer | analyze compare
  auto* analyze = app.add_subcommand("analyze", "derive metrics from a store");
  analyze->require_subcommand(1);
  auto* apeer = analyze->add_subcommand("peer", "one peer's series and stats");
  std::string a_db, a_window, a_out = "analysis";
  std::int64_t a_peer = 0;
  std::uint64_t a_cap = 0;
  apeer->add_option("--db", a_db, "store file")->required();
  apeer->add_option("--peer", a_peer, "peer id")->required();
  apeer->add_option("--window", a_window, "t0:t1 epoch seconds");
  apeer->add_option("--out", a_out, "output path prefix");
  apeer->add_option("--cap", a_cap, "down cap for bootstrap detection");
  auto* acomp = analyze->add_subcommand("compare", "two peers side by side");
  std::string c_db, c_peers, c_window, c_out = "compare";
  acomp->add_option("--db", c_db, "store file")->required();
  acomp->add_option("--peers", c_peers, "two peer ids, comma-separated")
      ->required();
  acomp->add_option("--window", c_window, "t0:t1 epoch seconds");
  acomp->add_option("--out", c_out, "output path prefix");

  // commander
  auto* cmdr = app.add_subcommand("commander", "drive agents on many nodes");
  std::string m_nodes, m_swarm, m_command, m_filter, m_ids, m_files;
  std::string m_agent = "swarmforge-agent", m_store = "experiment.db";
  std::string m_summary, m_work = "commander-work";
  std::vector<std::string> m_flags;
  std::optional<double> m_timeout;
  double m_timeout_raw = 0;
  cmdr->add_option("--nodes", m_nodes, "nodes XML file")->required();
  cmdr->add_option("--swarm", m_swarm, "swarm XML file");
  cmdr->add_option("command", m_command,
                   "bootstrap|stop|status|getclients|getoutput|archive|"
                   "cleanup|run")
      ->required();
  cmdr->add_option("--nodes-filter", m_filter, "comma-separated node ids");
  cmdr->add_option("--ids", m_ids, "comma-separated session ids");
  cmdr->add_option("--files", m_files, "comma-separated files (archive)");
  cmdr->add_option("--flag", m_flags,
                   "cleanup class: all|down|vlogs|slogs|archive (repeatable)");
  cmdr->add_option("--agent-binary", m_agent, "agent executable path");
  cmdr->add_option("--store", m_store, "scenario store output");
  cmdr->add_option("--summary", m_summary, "scenario summary JSON output");
  cmdr->add_option("--work-dir", m_work, "scratch directory");
  auto* t_opt = cmdr->add_option("--timeout", m_timeout_raw,
                                 "scenario timeout seconds");

  // dump
  auto* dump = app.add_subcommand("dump", "canonical text export of a store");
  std::string d_db;
  dump->add_option("--db", d_db, "store file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) {
      return run_parse(p_db, p_slog, p_vlogs, p_dialect, p_addr, p_client,
                       p_swarm);
    }
    if (analyze->parsed()) {
      if (apeer->parsed()) {
        return run_analyze_peer(a_db, a_peer, a_window, a_out, a_cap);
      }
      return run_analyze_compare(c_db, c_peers, c_window, c_out);
    }
    if (cmdr->parsed()) {
      if (t_opt->count() > 0) m_timeout = m_timeout_raw;
      return run_commander(m_nodes, m_swarm, m_command, m_filter, m_ids,
                           m_files, m_flags, m_agent, m_store, m_summary,
                           m_work, m_timeout);
    }
    if (dump->parsed()) {
      store::Store db(d_db);
      db.dump_canonical(std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "swarmforge: %s\n", e.what());
    return 1;
  }
  return 2;
}
