#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace swarmforge {

// Timestamps are integer seconds since the Unix epoch (UTC, 1 s source
// resolution throughout the pipeline).
using Timestamp = std::int64_t;

std::string format_timestamp(Timestamp t);           // 2010-03-01T10:00:12Z
std::optional<Timestamp> parse_timestamp(const std::string& text);

inline constexpr std::int64_t kEtaInfinite = -1;

struct StatusRecord {
  Timestamp timestamp = 0;
  std::uint64_t down_speed = 0;  // bytes/s
  std::uint64_t up_speed = 0;
  std::uint64_t downloaded = 0;  // cumulative bytes
  std::uint64_t uploaded = 0;
  std::int64_t eta = kEtaInfinite;  // seconds; kEtaInfinite renders as "inf"
  std::uint32_t num_peers = 0;
  std::uint32_t percent_hundredths = 0;  // 0..10000
  std::uint64_t transfer_size = 0;
  std::string file_name;

  bool operator==(const StatusRecord&) const = default;
};

enum class Direction { Sent, Received };

enum class MessageKind {
  Choke,
  Unchoke,
  Interested,
  NotInterested,
  Have,
  Bitfield,
  Request,
  Piece,
  Cancel,
};

inline constexpr int kMessageKindCount = 9;

const std::string& message_kind_name(MessageKind kind);
std::optional<MessageKind> message_kind_from_name(const std::string& name);

struct VerboseRecord {
  Timestamp timestamp = 0;
  Direction direction = Direction::Sent;
  MessageKind kind = MessageKind::Choke;
  std::string remote_peer;  // ip:port
  std::optional<std::uint32_t> piece_index;
  std::optional<std::uint32_t> block_offset;
  std::optional<std::uint32_t> block_length;
  std::optional<std::string> bitfield_hex;

  bool operator==(const VerboseRecord&) const = default;
};

// Field-shape rules shared by parser, simulator and storage.
bool verbose_fields_valid(const VerboseRecord& rec);

}  // namespace swarmforge
