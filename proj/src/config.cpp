#include "swarmforge/config.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <charconv>
#include <set>
#include <sstream>

namespace swarmforge::config {

namespace pt = boost::property_tree;

namespace {

pt::ptree parse_xml(const std::string& document) {
  std::istringstream in(document);
  pt::ptree tree;
  try {
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ConfigError("ParseError line " + std::to_string(e.line()) + ": " +
                      e.message());
  }
  return tree;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("bad integer for " + what + ": '" + text + "'");
  }
  return value;
}

std::uint16_t parse_port(const std::string& text, const std::string& what) {
  const std::uint64_t v = parse_u64(text, what);
  if (v < 1 || v > 65535) {
    throw ConfigError("InvalidPort: " + what + "=" + text);
  }
  return static_cast<std::uint16_t>(v);
}

std::string attr(const pt::ptree& node, const std::string& name,
                 const std::string& context) {
  auto v = node.get_optional<std::string>("<xmlattr>." + name);
  if (!v) throw ConfigError("missing attribute '" + name + "' on " + context);
  return *v;
}

std::optional<std::string> opt_attr(const pt::ptree& node,
                                    const std::string& name) {
  auto v = node.get_optional<std::string>("<xmlattr>." + name);
  if (!v) return std::nullopt;
  return *v;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::optional<std::uint64_t> parse_limit(const std::string& text) {
  if (text == "unlimited" || text.empty()) return std::nullopt;
  std::uint64_t scale = 1;
  std::string digits = text;
  if (digits.back() == 'K' || digits.back() == 'k') {
    scale = 1024;
    digits.pop_back();
  }
  const std::uint64_t v = parse_u64(digits, "limit") * scale;
  if (v == 0) throw ConfigError("BadLimit: limit must be positive");
  return v;
}

std::string render_limit(const std::optional<std::uint64_t>& limit) {
  return limit ? std::to_string(*limit) : "unlimited";
}

const NodeSpec* find_node(const std::vector<NodeSpec>& inventory,
                          const std::string& node_id) {
  for (const auto& n : inventory) {
    if (n.node_id == node_id) return &n;
  }
  return nullptr;
}

std::vector<NodeSpec> load_nodes(const std::string& document) {
  const pt::ptree tree = parse_xml(document);
  const auto root = tree.get_child_optional("nodes");
  if (!root) throw ConfigError("ParseError: missing <nodes> root");

  std::vector<NodeSpec> out;
  std::set<std::string> ids;
  for (const auto& [tag, child] : *root) {
    if (tag != "node") continue;
    NodeSpec node;
    node.node_id = attr(child, "id", "<node>");
    if (!ids.insert(node.node_id).second) {
      throw ConfigError("DuplicateNodeId: " + node.node_id);
    }
    node.host = attr(child, "host", "<node " + node.node_id + ">");
    if (auto p = opt_attr(child, "agent-port")) {
      node.agent_port = parse_port(*p, "agent-port");
    }
    if (auto p = opt_attr(child, "ssh-port")) {
      node.ssh_port = parse_port(*p, "ssh-port");
    }
    node.username = opt_attr(child, "user").value_or("");
    node.agent_path = opt_attr(child, "agent-path").value_or("");
    for (const auto& [ctag, cchild] : child) {
      if (ctag != "client") continue;
      const std::string name = attr(cchild, "name", "<client>");
      const std::string path = attr(cchild, "path", "<client " + name + ">");
      if (!node.client_paths.emplace(name, path).second) {
        throw ConfigError("duplicate client '" + name + "' on node " +
                          node.node_id);
      }
    }
    if (node.client_paths.empty()) {
      throw ConfigError("node " + node.node_id + " declares no clients");
    }
    out.push_back(std::move(node));
  }
  return out;
}

SwarmSpec load_swarm(const std::string& document,
                     const std::vector<NodeSpec>& inventory) {
  const pt::ptree tree = parse_xml(document);
  const auto root = tree.get_child_optional("swarm");
  if (!root) throw ConfigError("ParseError: missing <swarm> root");

  SwarmSpec swarm;
  swarm.swarm_id = opt_attr(*root, "id").value_or("swarm");
  swarm.torrent_path = attr(*root, "torrent", "<swarm>");

  bool has_seeder = false;
  for (const auto& [tag, child] : *root) {
    if (tag != "peer") continue;
    PlacementSpec p;
    p.node_id = attr(child, "node", "<peer>");
    const NodeSpec* node = find_node(inventory, p.node_id);
    if (!node) throw ConfigError("UnknownNodeId: " + p.node_id);
    p.client = attr(child, "client", "<peer on " + p.node_id + ">");
    if (!node->client_paths.contains(p.client)) {
      throw ConfigError("node " + p.node_id + " has no client '" + p.client +
                        "'");
    }
    const std::string role = attr(child, "role", "<peer>");
    if (role == "seeder") {
      p.role = Role::Seeder;
      has_seeder = true;
    } else if (role == "leecher") {
      p.role = Role::Leecher;
    } else {
      throw ConfigError("bad role '" + role + "'");
    }
    if (auto v = opt_attr(child, "down")) p.down_limit = parse_limit(*v);
    if (auto v = opt_attr(child, "up")) p.up_limit = parse_limit(*v);
    p.download_dir = attr(child, "ddir", "<peer>");
    p.slog_path = attr(child, "slog", "<peer>");
    p.vlog_path = attr(child, "vlog", "<peer>");
    if (auto v = opt_attr(child, "start")) {
      p.start_offset = parse_u64(*v, "start");
    }
    if (auto v = opt_attr(child, "stop")) {
      p.stop_offset = parse_u64(*v, "stop");
      if (*p.stop_offset <= p.start_offset) {
        throw ConfigError("stop must exceed start for peer on " + p.node_id);
      }
    }
    swarm.placements.push_back(std::move(p));
  }
  if (!has_seeder) throw ConfigError("NoSeeder: swarm needs >=1 seeder");
  return swarm;
}

std::string render_nodes(const std::vector<NodeSpec>& nodes) {
  std::ostringstream out;
  out << "<nodes>\n";
  for (const auto& n : nodes) {
    out << "  <node id=\"" << xml_escape(n.node_id) << "\" host=\""
        << xml_escape(n.host) << "\" agent-port=\"" << n.agent_port
        << "\" ssh-port=\"" << n.ssh_port << "\" user=\""
        << xml_escape(n.username) << "\" agent-path=\""
        << xml_escape(n.agent_path) << "\">\n";
    for (const auto& [name, path] : n.client_paths) {
      out << "    <client name=\"" << xml_escape(name) << "\" path=\""
          << xml_escape(path) << "\"/>\n";
    }
    out << "  </node>\n";
  }
  out << "</nodes>\n";
  return out.str();
}

std::string render_swarm(const SwarmSpec& swarm) {
  std::ostringstream out;
  out << "<swarm id=\"" << xml_escape(swarm.swarm_id) << "\" torrent=\""
      << xml_escape(swarm.torrent_path) << "\">\n";
  for (const auto& p : swarm.placements) {
    out << "  <peer node=\"" << xml_escape(p.node_id) << "\" client=\""
        << xml_escape(p.client) << "\" role=\""
        << (p.role == Role::Seeder ? "seeder" : "leecher") << "\" down=\""
        << render_limit(p.down_limit) << "\" up=\"" << render_limit(p.up_limit)
        << "\" ddir=\"" << xml_escape(p.download_dir) << "\" slog=\""
        << xml_escape(p.slog_path) << "\" vlog=\"" << xml_escape(p.vlog_path)
        << "\" start=\"" << p.start_offset << "\"";
    if (p.stop_offset) out << " stop=\"" << *p.stop_offset << "\"";
    out << "/>\n";
  }
  out << "</swarm>\n";
  return out.str();
}

}  // namespace swarmforge::config
