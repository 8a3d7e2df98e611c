#include "swarmforge/records.hpp"

#include <array>
#include <cstdio>
#include <ctime>

namespace swarmforge {

std::string format_timestamp(Timestamp t) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

std::optional<Timestamp> parse_timestamp(const std::string& text) {
  std::tm tm{};
  int y, mo, d, h, mi, s;
  char z;
  if (text.size() != 20 ||
      std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h,
                  &mi, &s, &z) != 7 ||
      z != 'Z') {
    return std::nullopt;
  }
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = s;
  const std::time_t tt = timegm(&tm);
  if (tt == static_cast<std::time_t>(-1)) return std::nullopt;
  // timegm silently normalizes out-of-range fields; only accept input
  // that renders back to itself.
  const Timestamp result = static_cast<Timestamp>(tt);
  if (format_timestamp(result) != text) return std::nullopt;
  return result;
}

namespace {
const std::array<std::string, kMessageKindCount> kKindNames = {
    "choke",   "unchoke",  "interested", "not_interested", "have",
    "bitfield", "request", "piece",      "cancel"};
}  // namespace

const std::string& message_kind_name(MessageKind kind) {
  return kKindNames[static_cast<int>(kind)];
}

std::optional<MessageKind> message_kind_from_name(const std::string& name) {
  for (int i = 0; i < kMessageKindCount; ++i) {
    if (kKindNames[static_cast<std::size_t>(i)] == name) {
      return static_cast<MessageKind>(i);
    }
  }
  return std::nullopt;
}

bool verbose_fields_valid(const VerboseRecord& rec) {
  const bool has_coords =
      rec.piece_index && rec.block_offset && rec.block_length;
  const bool no_coords =
      !rec.piece_index && !rec.block_offset && !rec.block_length;
  switch (rec.kind) {
    case MessageKind::Request:
    case MessageKind::Piece:
    case MessageKind::Cancel:
      return has_coords && !rec.bitfield_hex;
    case MessageKind::Have:
      return rec.piece_index && !rec.block_offset && !rec.block_length &&
             !rec.bitfield_hex;
    case MessageKind::Bitfield:
      return no_coords && rec.bitfield_hex.has_value();
    case MessageKind::Choke:
    case MessageKind::Unchoke:
    case MessageKind::Interested:
    case MessageKind::NotInterested:
      return no_coords && !rec.bitfield_hex;
  }
  return false;
}

}  // namespace swarmforge
