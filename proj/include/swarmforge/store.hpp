#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmforge/records.hpp"

struct sqlite3;

namespace swarmforge::store {

enum class StoreFault {
  CorruptStore,
  UnknownPeer,
  UnknownExperiment,
  BadWindow,
  BadInput,
  ConstraintViolation,
  IoError,
};

class StoreError : public std::runtime_error {
 public:
  StoreError(StoreFault fault, const std::string& what)
      : std::runtime_error(what), fault_(fault) {}
  StoreFault fault() const { return fault_; }

 private:
  StoreFault fault_;
};

struct ExperimentMeta {
  std::int64_t experiment_id = 0;  // assigned by the store
  std::string swarm_id;
  std::uint32_t num_peers = 0;
  std::uint32_t num_seeders = 0;
  Timestamp start_time = 0;
  std::string file_name;
  std::uint64_t file_size = 0;
};

struct PeerMeta {
  std::int64_t peer_id = 0;  // assigned by the store
  std::int64_t experiment_id = 0;
  std::string client_name;
  std::string addr;
  std::optional<std::uint64_t> down_limit;
  std::optional<std::uint64_t> up_limit;
  std::string cpu_description;
  std::uint64_t ram_bytes = 0;
  std::string os_version;
  std::string net_info;
};

// Single-file embedded store; copying the file yields an equivalent store.
class Store {
 public:
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::string& path() const { return path_; }

  std::int64_t add_experiment(const ExperimentMeta& meta);
  ExperimentMeta get_experiment(std::int64_t experiment_id) const;

  std::int64_t add_peer(const PeerMeta& meta);
  PeerMeta get_peer(std::int64_t peer_id) const;
  std::vector<PeerMeta> list_peers(std::int64_t experiment_id) const;
  std::optional<std::int64_t> find_peer_by_addr(std::int64_t experiment_id,
                                                const std::string& addr) const;
  // Removes the peer and all its messages.
  void delete_peer(std::int64_t peer_id);

  // Atomic: either every record lands or none do.
  std::size_t insert_status_batch(std::int64_t peer_id,
                                  const std::vector<StatusRecord>& records);
  std::size_t insert_verbose_batch(std::int64_t peer_id,
                                   const std::vector<VerboseRecord>& records);

  std::vector<StatusRecord> query_status(std::int64_t peer_id, Timestamp t0,
                                         Timestamp t1) const;
  // Rows with t0 <= ts < t1, timestamp-ordered; empty kind set means all.
  std::vector<VerboseRecord> query_messages(
      std::int64_t peer_id, Timestamp t0, Timestamp t1,
      const std::set<MessageKind>& kinds = {}) const;

  std::size_t count_messages(std::int64_t peer_id, Timestamp t0, Timestamp t1,
                             const std::set<MessageKind>& kinds = {}) const;

  std::uint64_t file_size_bytes() const;

  // Deterministic text export of everything, in primary-key order.
  void dump_canonical(std::ostream& out) const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
  std::string path_;
};

// store_file_bytes / raw_log_bytes; BadInput when raw_log_bytes is zero.
double compact_ratio(std::uint64_t raw_log_bytes, const Store& store);

}  // namespace swarmforge::store
