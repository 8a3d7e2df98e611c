#include "swarmforge/log_parsers.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

namespace swarmforge::logs {

namespace {

// Splits on single spaces; the trailing field may contain spaces and is
// handled by the callers.
struct Cursor {
  const std::string& line;
  std::size_t pos = 0;

  bool done() const { return pos >= line.size(); }

  std::string next_token() {
    if (done()) throw MalformedLine(pos, "unexpected end of line");
    std::size_t end = line.find(' ', pos);
    if (end == std::string::npos) end = line.size();
    std::string tok = line.substr(pos, end - pos);
    pos = end == line.size() ? end : end + 1;
    return tok;
  }

  std::string rest() {
    std::string out = line.substr(pos);
    pos = line.size();
    return out;
  }
};

std::uint64_t parse_uint(const std::string& text, std::size_t column) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw MalformedLine(column, "bad unsigned integer '" + text + "'");
  }
  return value;
}

// `key=value` field with a fixed expected key.
std::string keyed(Cursor& cur, const std::string& key) {
  const std::size_t col = cur.pos;
  const std::string tok = cur.next_token();
  if (tok.rfind(key + "=", 0) != 0) {
    throw MalformedLine(col, "expected '" + key + "=', got '" + tok + "'");
  }
  return tok.substr(key.size() + 1);
}

std::uint64_t keyed_uint(Cursor& cur, const std::string& key) {
  const std::size_t col = cur.pos;
  return parse_uint(keyed(cur, key), col);
}

}  // namespace

StatusRecord parse_status_line(const std::string& line) {
  Cursor cur{line};
  StatusRecord rec;
  {
    const std::size_t col = cur.pos;
    const std::string ts = cur.next_token();
    const auto parsed = parse_timestamp(ts);
    if (!parsed) throw MalformedLine(col, "bad timestamp '" + ts + "'");
    rec.timestamp = *parsed;
  }
  rec.down_speed = keyed_uint(cur, "ds");
  rec.up_speed = keyed_uint(cur, "us");
  rec.downloaded = keyed_uint(cur, "d");
  rec.uploaded = keyed_uint(cur, "u");
  {
    const std::size_t col = cur.pos;
    const std::string eta = keyed(cur, "eta");
    rec.eta = eta == "inf" ? kEtaInfinite
                           : static_cast<std::int64_t>(parse_uint(eta, col));
  }
  rec.num_peers = static_cast<std::uint32_t>(keyed_uint(cur, "peers"));
  {
    const std::size_t col = cur.pos;
    const std::string pct = keyed(cur, "pct");
    unsigned whole = 0, frac = 0;
    if (std::sscanf(pct.c_str(), "%u.%2u", &whole, &frac) != 2 ||
        pct.find('.') == std::string::npos ||
        pct.size() - pct.find('.') != 3) {
      throw MalformedLine(col, "bad percent '" + pct + "'");
    }
    rec.percent_hundredths = whole * 100 + frac;
    if (rec.percent_hundredths > 10000) {
      throw MalformedLine(col, "percent above 100: '" + pct + "'");
    }
  }
  rec.transfer_size = keyed_uint(cur, "size");
  {
    const std::size_t col = cur.pos;
    const std::string tok = cur.rest();
    if (tok.rfind("name=", 0) != 0) {
      throw MalformedLine(col, "expected 'name=' field");
    }
    rec.file_name = tok.substr(5);
  }
  if (rec.downloaded > rec.transfer_size) {
    throw MalformedLine(0, "downloaded exceeds transfer size");
  }
  return rec;
}

std::string render_status_line(const StatusRecord& rec) {
  char pct[16];
  std::snprintf(pct, sizeof(pct), "%u.%02u", rec.percent_hundredths / 100,
                rec.percent_hundredths % 100);
  std::ostringstream out;
  out << format_timestamp(rec.timestamp) << " ds=" << rec.down_speed
      << " us=" << rec.up_speed << " d=" << rec.downloaded
      << " u=" << rec.uploaded << " eta="
      << (rec.eta == kEtaInfinite ? std::string("inf") : std::to_string(rec.eta))
      << " peers=" << rec.num_peers << " pct=" << pct
      << " size=" << rec.transfer_size << " name=" << rec.file_name;
  return out.str();
}

VerboseRecord parse_verbose_line(const std::string& line, Dialect dialect,
                                 const std::string& remote_peer) {
  Cursor cur{line};
  VerboseRecord rec;
  {
    const std::size_t col = cur.pos;
    const std::string ts = cur.next_token();
    const auto parsed = parse_timestamp(ts);
    if (!parsed) throw MalformedLine(col, "bad timestamp '" + ts + "'");
    rec.timestamp = *parsed;
  }
  {
    const std::size_t col = cur.pos;
    const std::string dir = cur.next_token();
    if (dir == "SND") {
      rec.direction = Direction::Sent;
    } else if (dir == "RCV") {
      rec.direction = Direction::Received;
    } else {
      throw MalformedLine(col, "bad direction '" + dir + "'");
    }
  }
  {
    const std::size_t col = cur.pos;
    const std::string kind = cur.next_token();
    const auto parsed = message_kind_from_name(kind);
    if (!parsed) throw MalformedLine(col, "unknown kind '" + kind + "'");
    rec.kind = *parsed;
  }
  if (dialect == Dialect::UnifiedFile) {
    rec.remote_peer = keyed(cur, "peer");
  } else {
    rec.remote_peer = remote_peer;
  }
  switch (rec.kind) {
    case MessageKind::Request:
    case MessageKind::Piece:
    case MessageKind::Cancel:
      rec.piece_index = static_cast<std::uint32_t>(keyed_uint(cur, "index"));
      rec.block_offset = static_cast<std::uint32_t>(keyed_uint(cur, "begin"));
      rec.block_length = static_cast<std::uint32_t>(keyed_uint(cur, "length"));
      break;
    case MessageKind::Have:
      rec.piece_index = static_cast<std::uint32_t>(keyed_uint(cur, "index"));
      break;
    case MessageKind::Bitfield:
      rec.bitfield_hex = keyed(cur, "bitfield");
      break;
    default:
      break;
  }
  if (!cur.done()) {
    throw MalformedLine(cur.pos, "trailing content '" + cur.rest() + "'");
  }
  return rec;
}

std::string render_verbose_line(const VerboseRecord& rec, Dialect dialect) {
  std::ostringstream out;
  out << format_timestamp(rec.timestamp) << ' '
      << (rec.direction == Direction::Sent ? "SND" : "RCV") << ' '
      << message_kind_name(rec.kind);
  if (dialect == Dialect::UnifiedFile) {
    out << " peer=" << rec.remote_peer;
  }
  switch (rec.kind) {
    case MessageKind::Request:
    case MessageKind::Piece:
    case MessageKind::Cancel:
      out << " index=" << *rec.piece_index << " begin=" << *rec.block_offset
          << " length=" << *rec.block_length;
      break;
    case MessageKind::Have:
      out << " index=" << *rec.piece_index;
      break;
    case MessageKind::Bitfield:
      out << " bitfield=" << *rec.bitfield_hex;
      break;
    default:
      break;
  }
  return out.str();
}

VerboseParseStats parse_verbose_stream(
    std::istream& input, Dialect dialect,
    const std::function<void(const VerboseRecord&)>& sink,
    const std::string& remote_peer) {
  VerboseParseStats stats;
  std::string line;
  while (std::getline(input, line)) {
    if (line.empty()) continue;
    // Pre-classify: interleaved debug output and unrecognized kinds are
    // skipped; a recognized kind with a bad payload is fatal.
    Cursor probe{line};
    try {
      const auto ts = parse_timestamp(probe.next_token());
      const std::string dir = ts ? probe.next_token() : "";
      const std::string kind = probe.done() ? "" : probe.next_token();
      if (!ts || (dir != "SND" && dir != "RCV") ||
          !message_kind_from_name(kind)) {
        ++stats.skipped_unknown;
        continue;
      }
    } catch (const MalformedLine&) {
      ++stats.skipped_unknown;
      continue;
    }
    sink(parse_verbose_line(line, dialect, remote_peer));
    ++stats.records;
  }
  return stats;
}

std::vector<VerboseRecord> parse_verbose_file(const std::string& path,
                                              Dialect dialect,
                                              VerboseParseStats* stats) {
  std::ifstream in(path);
  if (!in) throw MalformedLine(0, "cannot open " + path);
  std::vector<VerboseRecord> out;
  const std::string remote =
      dialect == Dialect::PerPeerFiles ? remote_peer_from_filename(path) : "";
  const auto s = parse_verbose_stream(
      in, dialect, [&out](const VerboseRecord& r) { out.push_back(r); },
      remote);
  if (stats) *stats = s;
  return out;
}

std::vector<StatusRecord> parse_status_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedLine(0, "cannot open " + path);
  std::vector<StatusRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(parse_status_line(line));
  }
  return out;
}

std::string remote_peer_from_filename(const std::string& path) {
  static const std::regex kAddr(R"((\d+\.\d+\.\d+\.\d+:\d+))");
  const std::size_t slash = path.find_last_of('/');
  const std::string base =
      slash == std::string::npos ? path : path.substr(slash + 1);
  std::smatch m;
  if (std::regex_search(base, m, kAddr)) return m[1];
  return "";
}

std::string per_peer_vlog_path(const std::string& vlog_stem,
                               const std::string& remote_peer) {
  return vlog_stem + "." + remote_peer + ".log";
}

Dialect detect_dialect(const std::vector<std::string>& paths) {
  if (paths.empty()) {
    throw AmbiguousDialect("no verbose log files given");
  }
  if (paths.size() > 1) {
    bool all_addressed = true;
    for (const auto& p : paths) {
      if (remote_peer_from_filename(p).empty()) {
        all_addressed = false;
        break;
      }
    }
    if (all_addressed) return Dialect::PerPeerFiles;
  }
  return Dialect::UnifiedFile;
}

}  // namespace swarmforge::logs
