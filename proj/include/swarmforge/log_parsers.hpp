#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmforge/records.hpp"

namespace swarmforge::logs {

class MalformedLine : public std::runtime_error {
 public:
  MalformedLine(std::size_t column, const std::string& reason)
      : std::runtime_error("column " + std::to_string(column) + ": " + reason),
        column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

class AmbiguousDialect : public std::runtime_error {
 public:
  explicit AmbiguousDialect(const std::string& what)
      : std::runtime_error(what) {}
};

enum class Dialect { PerPeerFiles, UnifiedFile };

// Canonical status line, e.g.
//   2010-03-01T10:00:12Z ds=524288 us=262144 d=6291456 u=1048576 eta=58
//   peers=49 pct=12.50 size=50331648 name=test.bin
StatusRecord parse_status_line(const std::string& line);
std::string render_status_line(const StatusRecord& rec);

// Canonical verbose line, e.g.
//   2010-03-01T10:00:03Z RCV piece peer=10.0.1.7:6881 index=4 begin=16384
//   length=16384
// PerPeerFiles streams omit `peer=`; the remote comes from the file name
// and must be supplied via `remote_peer`.
VerboseRecord parse_verbose_line(const std::string& line, Dialect dialect,
                                 const std::string& remote_peer = "");
std::string render_verbose_line(const VerboseRecord& rec, Dialect dialect);

struct VerboseParseStats {
  std::size_t records = 0;
  std::size_t skipped_unknown = 0;
};

// Streaming, single-pass; invokes `sink` per record. Lines whose message
// kind is unrecognized are counted and skipped.
VerboseParseStats parse_verbose_stream(
    std::istream& input, Dialect dialect,
    const std::function<void(const VerboseRecord&)>& sink,
    const std::string& remote_peer = "");

std::vector<VerboseRecord> parse_verbose_file(const std::string& path,
                                              Dialect dialect,
                                              VerboseParseStats* stats = nullptr);

std::vector<StatusRecord> parse_status_file(const std::string& path);

Dialect detect_dialect(const std::vector<std::string>& paths);

// Remote address embedded in a per-peer vlog file name
// (`<stem>.10.0.1.7:6881.log`), empty when the name carries none.
std::string remote_peer_from_filename(const std::string& path);
std::string per_peer_vlog_path(const std::string& vlog_stem,
                               const std::string& remote_peer);

}  // namespace swarmforge::logs
