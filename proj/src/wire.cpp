#include "swarmforge/wire.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

namespace swarmforge::wire {

namespace {

const std::array<std::pair<CommandKind, std::string>, 7> kCommandNames = {{
    {CommandKind::StartClient, "START-CLIENT"},
    {CommandKind::StopClient, "STOP-CLIENT"},
    {CommandKind::GetClients, "GET-CLIENTS"},
    {CommandKind::GetOutput, "GET-OUTPUT"},
    {CommandKind::Archive, "ARCHIVE"},
    {CommandKind::GetStatus, "GET-STATUS"},
    {CommandKind::Cleanup, "CLEANUP"},
}};

const std::array<std::pair<ErrorCode, std::string>, 5> kErrorNames = {{
    {ErrorCode::UnknownCmd, "UNKNOWN_CMD"},
    {ErrorCode::BadArgs, "BAD_ARGS"},
    {ErrorCode::NoSuchId, "NO_SUCH_ID"},
    {ErrorCode::ClientFailed, "CLIENT_FAILED"},
    {ErrorCode::IoError, "IO_ERROR"},
}};

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || c == '_';
  });
}

bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    if (c < 0x80) {
      extra = 0;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      if (c < 0xC2) return false;  // overlong
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      if (c > 0xF4) return false;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += extra + 1;
  }
  return true;
}

void check_no_duplicate_keys(const KvList& kv) {
  std::unordered_set<std::string> seen;
  for (const auto& [key, value] : kv) {
    (void)value;
    if (!seen.insert(key).second) {
      throw WireError(WireFault::DuplicateKey, "duplicate key " + key);
    }
  }
}

void require_key(const KvList& kv, const std::string& key) {
  if (!find_arg(kv, key)) {
    throw WireError(WireFault::MissingRequiredKey, "missing key " + key);
  }
}

std::string render_kv(const KvList& kv) {
  std::string out;
  for (const auto& [key, value] : kv) {
    out += '\n';
    out += key;
    out += '=';
    out += value;
  }
  return out;
}

KvList parse_kv_lines(const std::string& payload, std::size_t pos) {
  KvList kv;
  while (pos < payload.size()) {
    std::size_t end = payload.find('\n', pos);
    if (end == std::string::npos) end = payload.size();
    const std::string line = payload.substr(pos, end - pos);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw WireError(WireFault::InvalidEnvelope, "arg line without '=': " + line);
    }
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    pos = end + 1;
  }
  return kv;
}

}  // namespace

const std::string& command_name(CommandKind kind) {
  for (const auto& [k, name] : kCommandNames) {
    if (k == kind) return name;
  }
  throw WireError(WireFault::InvalidEnvelope, "bad command kind");
}

std::optional<CommandKind> command_from_name(const std::string& name) {
  for (const auto& [k, n] : kCommandNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::string& error_code_name(ErrorCode code) {
  for (const auto& [c, name] : kErrorNames) {
    if (c == code) return name;
  }
  throw WireError(WireFault::InvalidEnvelope, "bad error code");
}

std::optional<ErrorCode> error_code_from_name(const std::string& name) {
  for (const auto& [c, n] : kErrorNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

std::optional<std::string> find_arg(const KvList& kv, const std::string& key) {
  for (const auto& [k, v] : kv) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void validate_command(const CommandEnvelope& cmd) {
  for (const auto& [key, value] : cmd.args) {
    if (!valid_key(key)) {
      throw WireError(WireFault::InvalidEnvelope, "bad key: " + key);
    }
    if (value.find('\n') != std::string::npos) {
      throw WireError(WireFault::InvalidEnvelope, "newline in value of " + key);
    }
  }
  check_no_duplicate_keys(cmd.args);
  switch (cmd.kind) {
    case CommandKind::StartClient:
      for (const char* key : {"TORRENT", "DOWN_DIR", "SLOG", "VLOG", "CLIENT"}) {
        require_key(cmd.args, key);
      }
      break;
    case CommandKind::StopClient:
    case CommandKind::GetStatus:
    case CommandKind::GetOutput:
      require_key(cmd.args, "ID");
      break;
    case CommandKind::Cleanup: {
      bool any = false;
      for (const char* key : {"ALL", "DOWN", "VLOGS", "SLOGS", "ARCHIVE"}) {
        if (auto v = find_arg(cmd.args, key)) {
          if (*v != "0" && *v != "1") {
            throw WireError(WireFault::InvalidEnvelope,
                            std::string("cleanup flag ") + key + " not 0/1");
          }
          any = true;
        }
      }
      if (!any) {
        throw WireError(WireFault::MissingRequiredKey,
                        "CLEANUP needs at least one flag");
      }
      break;
    }
    case CommandKind::GetClients:
    case CommandKind::Archive:
      break;
  }
}

void validate_response(const ResponseEnvelope& resp) {
  if (resp.status == RespStatus::Err && !resp.error_code) {
    throw WireError(WireFault::InvalidEnvelope, "ERR without error code");
  }
  if (resp.status == RespStatus::Ok && resp.error_code) {
    throw WireError(WireFault::InvalidEnvelope, "OK with error code");
  }
  for (const auto& [key, value] : resp.body) {
    if (key.empty() || key.find('\n') != std::string::npos ||
        key.find('=') != std::string::npos) {
      throw WireError(WireFault::InvalidEnvelope, "bad body key: " + key);
    }
    if (value.find('\n') != std::string::npos) {
      throw WireError(WireFault::InvalidEnvelope, "newline in value of " + key);
    }
  }
  check_no_duplicate_keys(resp.body);
}

std::vector<std::uint8_t> frame_payload(const std::string& payload) {
  if (payload.size() > kMaxFrameBytes) {
    throw WireError(WireFault::FrameTooLong, "payload exceeds 1 MiB");
  }
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 4);
  const std::uint32_t len = static_cast<std::uint32_t>(payload.size());
  out.push_back(static_cast<std::uint8_t>(len >> 24));
  out.push_back(static_cast<std::uint8_t>(len >> 16));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::string unframe_payload(const std::vector<std::uint8_t>& bytes,
                            std::size_t& offset) {
  if (bytes.size() < offset + 4) {
    throw WireError(WireFault::FrameTooShort, "missing length prefix");
  }
  const std::uint32_t len = (static_cast<std::uint32_t>(bytes[offset]) << 24) |
                            (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
                            (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
                            static_cast<std::uint32_t>(bytes[offset + 3]);
  if (len > kMaxFrameBytes) {
    throw WireError(WireFault::FrameTooLong, "frame length exceeds 1 MiB");
  }
  if (bytes.size() - offset - 4 < len) {
    throw WireError(WireFault::FrameTooShort, "truncated payload");
  }
  std::string payload(bytes.begin() + static_cast<std::ptrdiff_t>(offset + 4),
                      bytes.begin() + static_cast<std::ptrdiff_t>(offset + 4 + len));
  if (!valid_utf8(payload)) {
    throw WireError(WireFault::BadUtf8, "payload is not UTF-8");
  }
  offset += 4 + len;
  return payload;
}

std::vector<std::uint8_t> encode_command(const CommandEnvelope& cmd) {
  validate_command(cmd);
  return frame_payload(command_name(cmd.kind) + render_kv(cmd.args));
}

CommandEnvelope decode_command_payload(const std::string& payload) {
  std::size_t eol = payload.find('\n');
  const std::string name =
      eol == std::string::npos ? payload : payload.substr(0, eol);
  const auto kind = command_from_name(name);
  if (!kind) {
    throw WireError(WireFault::UnknownCommand, "unknown command: " + name);
  }
  CommandEnvelope cmd;
  cmd.kind = *kind;
  if (eol != std::string::npos) {
    cmd.args = parse_kv_lines(payload, eol + 1);
  }
  validate_command(cmd);
  return cmd;
}

CommandEnvelope decode_command(const std::vector<std::uint8_t>& bytes) {
  std::size_t offset = 0;
  return decode_command_payload(unframe_payload(bytes, offset));
}

std::vector<std::uint8_t> encode_response(const ResponseEnvelope& resp) {
  validate_response(resp);
  std::string head = resp.status == RespStatus::Ok
                         ? "OK"
                         : "ERR " + error_code_name(*resp.error_code);
  return frame_payload(head + render_kv(resp.body));
}

ResponseEnvelope decode_response_payload(const std::string& payload) {
  std::size_t eol = payload.find('\n');
  const std::string head =
      eol == std::string::npos ? payload : payload.substr(0, eol);
  ResponseEnvelope resp;
  if (head == "OK") {
    resp.status = RespStatus::Ok;
  } else if (head.rfind("ERR ", 0) == 0) {
    resp.status = RespStatus::Err;
    const auto code = error_code_from_name(head.substr(4));
    if (!code) {
      throw WireError(WireFault::InvalidEnvelope,
                      "unknown error code in: " + head);
    }
    resp.error_code = code;
  } else {
    throw WireError(WireFault::InvalidEnvelope, "bad response head: " + head);
  }
  if (eol != std::string::npos) {
    resp.body = parse_kv_lines(payload, eol + 1);
  }
  validate_response(resp);
  return resp;
}

ResponseEnvelope decode_response(const std::vector<std::uint8_t>& bytes) {
  std::size_t offset = 0;
  return decode_response_payload(unframe_payload(bytes, offset));
}

}  // namespace swarmforge::wire
