#include "swarmforge/torrent.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace swarmforge::torrent {

namespace {
std::uint64_t to_u64(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw TorrentError("bad integer for " + what + ": '" + text + "'");
  }
  return value;
}
}  // namespace

TorrentInfo parse_torrent(const std::string& text) {
  TorrentInfo info;
  std::istringstream in(text);
  std::string line;
  bool have_size = false, have_piece = false, have_block = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw TorrentError("bad torrent line: " + line);
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "name") {
      info.name = value;
    } else if (key == "size") {
      info.size = to_u64(value, "size");
      have_size = true;
    } else if (key == "piece") {
      info.piece_size = static_cast<std::uint32_t>(to_u64(value, "piece"));
      have_piece = true;
    } else if (key == "block") {
      info.block_size = static_cast<std::uint32_t>(to_u64(value, "block"));
      have_block = true;
    } else if (key == "seed") {
      info.seed = to_u64(value, "seed");
    } else if (key == "base") {
      const auto ts = parse_timestamp(value);
      if (!ts) throw TorrentError("bad base timestamp: " + value);
      info.base_time = *ts;
    } else {
      throw TorrentError("unknown torrent key: " + key);
    }
  }
  if (!have_size || !have_piece || !have_block) {
    throw TorrentError("torrent needs size, piece and block");
  }
  return info;
}

TorrentInfo load_torrent(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TorrentError("cannot read torrent " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_torrent(buf.str());
}

std::string render_torrent(const TorrentInfo& info) {
  std::ostringstream out;
  out << "name=" << info.name << "\nsize=" << info.size
      << "\npiece=" << info.piece_size << "\nblock=" << info.block_size
      << "\nseed=" << info.seed << "\nbase=" << format_timestamp(info.base_time)
      << "\n";
  return out.str();
}

void save_torrent(const TorrentInfo& info, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw TorrentError("cannot write torrent " + path);
  out << render_torrent(info);
}

}  // namespace swarmforge::torrent
