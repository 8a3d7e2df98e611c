#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace swarmforge::wire {

// Commander <-> agent message set. Framing: 4-byte big-endian payload
// length followed by UTF-8 text; line 1 is the command name (or OK/ERR),
// remaining lines are `KEY=value` pairs in order.

enum class CommandKind {
  StartClient,
  StopClient,
  GetClients,
  GetOutput,
  Archive,
  GetStatus,
  Cleanup,
};

enum class RespStatus { Ok, Err };

enum class ErrorCode {
  UnknownCmd,
  BadArgs,
  NoSuchId,
  ClientFailed,
  IoError,
};

enum class WireFault {
  InvalidEnvelope,
  FrameTooShort,
  FrameTooLong,
  BadUtf8,
  UnknownCommand,
  DuplicateKey,
  MissingRequiredKey,
};

class WireError : public std::runtime_error {
 public:
  WireError(WireFault fault, const std::string& what)
      : std::runtime_error(what), fault_(fault) {}
  WireFault fault() const { return fault_; }

 private:
  WireFault fault_;
};

inline constexpr std::size_t kMaxFrameBytes = 1u << 20;

using KvList = std::vector<std::pair<std::string, std::string>>;

struct CommandEnvelope {
  CommandKind kind = CommandKind::GetClients;
  KvList args;

  bool operator==(const CommandEnvelope&) const = default;
};

struct ResponseEnvelope {
  RespStatus status = RespStatus::Ok;
  std::optional<ErrorCode> error_code;
  KvList body;

  bool operator==(const ResponseEnvelope&) const = default;

  static ResponseEnvelope ok(KvList body = {}) {
    return ResponseEnvelope{RespStatus::Ok, std::nullopt, std::move(body)};
  }
  static ResponseEnvelope err(ErrorCode code, KvList body = {}) {
    return ResponseEnvelope{RespStatus::Err, code, std::move(body)};
  }
};

const std::string& command_name(CommandKind kind);
std::optional<CommandKind> command_from_name(const std::string& name);
const std::string& error_code_name(ErrorCode code);
std::optional<ErrorCode> error_code_from_name(const std::string& name);

// Throws WireError{InvalidEnvelope|DuplicateKey|MissingRequiredKey} when
// the envelope breaks a protocol invariant. Applied by encoders and
// decoders alike.
void validate_command(const CommandEnvelope& cmd);
void validate_response(const ResponseEnvelope& resp);

std::vector<std::uint8_t> encode_command(const CommandEnvelope& cmd);
std::vector<std::uint8_t> encode_response(const ResponseEnvelope& resp);

// Decode one complete frame (length prefix included).
CommandEnvelope decode_command(const std::vector<std::uint8_t>& bytes);
ResponseEnvelope decode_response(const std::vector<std::uint8_t>& bytes);

// Payload-level codecs, used once a frame has been stripped.
CommandEnvelope decode_command_payload(const std::string& payload);
ResponseEnvelope decode_response_payload(const std::string& payload);

std::vector<std::uint8_t> frame_payload(const std::string& payload);

// Extracts the first complete frame from `bytes` starting at `offset`;
// advances `offset` past it. Throws FrameTooShort when bytes end early.
std::string unframe_payload(const std::vector<std::uint8_t>& bytes,
                            std::size_t& offset);

std::optional<std::string> find_arg(const KvList& kv, const std::string& key);

}  // namespace swarmforge::wire
