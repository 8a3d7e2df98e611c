#include "swarmforge/store.hpp"

#include <sqlite3.h>

#include <filesystem>
#include <map>

namespace swarmforge::store {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS experiments (
  experiment_id INTEGER PRIMARY KEY,
  swarm_id TEXT NOT NULL,
  num_peers INTEGER NOT NULL,
  num_seeders INTEGER NOT NULL,
  start_time INTEGER NOT NULL,
  file_name TEXT NOT NULL,
  file_size INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS peers (
  peer_id INTEGER PRIMARY KEY,
  experiment_id INTEGER NOT NULL
    REFERENCES experiments(experiment_id) ON DELETE CASCADE,
  client_name TEXT NOT NULL,
  addr TEXT NOT NULL,
  down_limit INTEGER,
  up_limit INTEGER,
  cpu_description TEXT NOT NULL DEFAULT '',
  ram_bytes INTEGER NOT NULL DEFAULT 0,
  os_version TEXT NOT NULL DEFAULT '',
  net_info TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS remotes (
  remote_id INTEGER PRIMARY KEY,
  addr TEXT NOT NULL UNIQUE
);
CREATE TABLE IF NOT EXISTS counters (
  peer_id INTEGER PRIMARY KEY,
  next_status_seq INTEGER NOT NULL DEFAULT 0,
  next_verbose_seq INTEGER NOT NULL DEFAULT 0
);
-- Clustered on (peer_id, ts, seq): window queries walk the primary key and
-- no secondary index is needed, which keeps the file compact.
CREATE TABLE IF NOT EXISTS status_msgs (
  peer_id INTEGER NOT NULL REFERENCES peers(peer_id) ON DELETE CASCADE,
  ts INTEGER NOT NULL,
  seq INTEGER NOT NULL,
  down_speed INTEGER NOT NULL,
  up_speed INTEGER NOT NULL,
  downloaded INTEGER NOT NULL,
  uploaded INTEGER NOT NULL,
  eta INTEGER NOT NULL,
  num_peers INTEGER NOT NULL,
  pct INTEGER NOT NULL,
  size INTEGER NOT NULL,
  name TEXT NOT NULL,
  PRIMARY KEY (peer_id, ts, seq)
) WITHOUT ROWID;
CREATE TABLE IF NOT EXISTS verbose_msgs (
  peer_id INTEGER NOT NULL REFERENCES peers(peer_id) ON DELETE CASCADE,
  ts INTEGER NOT NULL,
  seq INTEGER NOT NULL,
  direction INTEGER NOT NULL,
  kind INTEGER NOT NULL,
  remote_id INTEGER NOT NULL REFERENCES remotes(remote_id),
  piece INTEGER,
  boff INTEGER,
  blen INTEGER,
  bitfield TEXT,
  PRIMARY KEY (peer_id, ts, seq)
) WITHOUT ROWID;
)sql";

}  // namespace

struct Store::Impl {
  sqlite3* db = nullptr;

  ~Impl() {
    if (db) sqlite3_close(db);
  }

  [[noreturn]] void fail(StoreFault fault, const std::string& context) const {
    throw StoreError(fault, context + ": " + sqlite3_errmsg(db));
  }

  void exec(const std::string& sql, StoreFault fault = StoreFault::IoError) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "sqlite error";
      sqlite3_free(err);
      throw StoreError(fault, msg);
    }
  }

  class Stmt {
   public:
    Stmt(sqlite3* db, const std::string& sql) : db_(db) {
      if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) !=
          SQLITE_OK) {
        throw StoreError(StoreFault::IoError,
                         std::string("prepare failed: ") + sqlite3_errmsg(db));
      }
    }
    ~Stmt() {
      if (stmt_) sqlite3_finalize(stmt_);
    }
    Stmt(const Stmt&) = delete;

    Stmt& bind(int idx, std::int64_t v) {
      sqlite3_bind_int64(stmt_, idx, v);
      return *this;
    }
    Stmt& bind(int idx, const std::string& v) {
      sqlite3_bind_text(stmt_, idx, v.c_str(), -1, SQLITE_TRANSIENT);
      return *this;
    }
    Stmt& bind_null(int idx) {
      sqlite3_bind_null(stmt_, idx);
      return *this;
    }
    bool step() {
      const int rc = sqlite3_step(stmt_);
      if (rc == SQLITE_ROW) return true;
      if (rc == SQLITE_DONE) return false;
      const StoreFault fault = rc == SQLITE_CONSTRAINT
                                   ? StoreFault::ConstraintViolation
                                   : StoreFault::IoError;
      throw StoreError(fault, std::string("step failed: ") + sqlite3_errmsg(db_));
    }
    void reset() {
      sqlite3_reset(stmt_);
      sqlite3_clear_bindings(stmt_);
    }
    std::int64_t col_i64(int idx) { return sqlite3_column_int64(stmt_, idx); }
    bool col_null(int idx) {
      return sqlite3_column_type(stmt_, idx) == SQLITE_NULL;
    }
    std::string col_text(int idx) {
      const unsigned char* t = sqlite3_column_text(stmt_, idx);
      return t ? reinterpret_cast<const char*>(t) : "";
    }

   private:
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
  };

  void require_peer(std::int64_t peer_id) {
    Stmt stmt(db, "SELECT 1 FROM peers WHERE peer_id = ?1");
    stmt.bind(1, peer_id);
    if (!stmt.step()) {
      throw StoreError(StoreFault::UnknownPeer,
                       "no peer " + std::to_string(peer_id));
    }
  }

  std::int64_t intern_remote(const std::string& addr,
                             std::map<std::string, std::int64_t>& cache) {
    const auto it = cache.find(addr);
    if (it != cache.end()) return it->second;
    {
      Stmt ins(db, "INSERT OR IGNORE INTO remotes(addr) VALUES(?1)");
      ins.bind(1, addr);
      ins.step();
    }
    Stmt sel(db, "SELECT remote_id FROM remotes WHERE addr = ?1");
    sel.bind(1, addr);
    sel.step();
    const std::int64_t id = sel.col_i64(0);
    cache.emplace(addr, id);
    return id;
  }

  std::int64_t take_seq(std::int64_t peer_id, bool verbose, std::size_t count) {
    exec("INSERT OR IGNORE INTO counters(peer_id) VALUES(" +
         std::to_string(peer_id) + ")");
    const std::string col = verbose ? "next_verbose_seq" : "next_status_seq";
    Stmt sel(db, "SELECT " + col + " FROM counters WHERE peer_id = ?1");
    sel.bind(1, peer_id);
    sel.step();
    const std::int64_t first = sel.col_i64(0);
    Stmt upd(db, "UPDATE counters SET " + col + " = ?2 WHERE peer_id = ?1");
    upd.bind(1, peer_id).bind(2, first + static_cast<std::int64_t>(count));
    upd.step();
    return first;
  }
};

Store::Store(const std::string& path) : impl_(new Impl), path_(path) {
  if (sqlite3_open_v2(path.c_str(), &impl_->db,
                      SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE,
                      nullptr) != SQLITE_OK) {
    throw StoreError(StoreFault::IoError, "cannot open " + path);
  }
  char* err = nullptr;
  const std::string setup = std::string("PRAGMA foreign_keys=ON;") + kSchema;
  if (sqlite3_exec(impl_->db, setup.c_str(), nullptr, nullptr, &err) !=
      SQLITE_OK) {
    std::string msg = err ? err : "schema setup failed";
    sqlite3_free(err);
    throw StoreError(StoreFault::CorruptStore, path + ": " + msg);
  }
}

Store::~Store() = default;

std::int64_t Store::add_experiment(const ExperimentMeta& meta) {
  Impl::Stmt stmt(impl_->db,
                  "INSERT INTO experiments(swarm_id, num_peers, num_seeders, "
                  "start_time, file_name, file_size) VALUES(?1,?2,?3,?4,?5,?6)");
  stmt.bind(1, meta.swarm_id)
      .bind(2, meta.num_peers)
      .bind(3, meta.num_seeders)
      .bind(4, meta.start_time)
      .bind(5, meta.file_name)
      .bind(6, static_cast<std::int64_t>(meta.file_size));
  stmt.step();
  return sqlite3_last_insert_rowid(impl_->db);
}

ExperimentMeta Store::get_experiment(std::int64_t experiment_id) const {
  Impl::Stmt stmt(impl_->db,
                  "SELECT experiment_id, swarm_id, num_peers, num_seeders, "
                  "start_time, file_name, file_size FROM experiments WHERE "
                  "experiment_id = ?1");
  stmt.bind(1, experiment_id);
  if (!stmt.step()) {
    throw StoreError(StoreFault::UnknownExperiment,
                     "no experiment " + std::to_string(experiment_id));
  }
  ExperimentMeta meta;
  meta.experiment_id = stmt.col_i64(0);
  meta.swarm_id = stmt.col_text(1);
  meta.num_peers = static_cast<std::uint32_t>(stmt.col_i64(2));
  meta.num_seeders = static_cast<std::uint32_t>(stmt.col_i64(3));
  meta.start_time = stmt.col_i64(4);
  meta.file_name = stmt.col_text(5);
  meta.file_size = static_cast<std::uint64_t>(stmt.col_i64(6));
  return meta;
}

std::int64_t Store::add_peer(const PeerMeta& meta) {
  get_experiment(meta.experiment_id);  // referential integrity up front
  Impl::Stmt stmt(
      impl_->db,
      "INSERT INTO peers(experiment_id, client_name, addr, down_limit, "
      "up_limit, cpu_description, ram_bytes, os_version, net_info) "
      "VALUES(?1,?2,?3,?4,?5,?6,?7,?8,?9)");
  stmt.bind(1, meta.experiment_id).bind(2, meta.client_name).bind(3, meta.addr);
  if (meta.down_limit) {
    stmt.bind(4, static_cast<std::int64_t>(*meta.down_limit));
  } else {
    stmt.bind_null(4);
  }
  if (meta.up_limit) {
    stmt.bind(5, static_cast<std::int64_t>(*meta.up_limit));
  } else {
    stmt.bind_null(5);
  }
  stmt.bind(6, meta.cpu_description)
      .bind(7, static_cast<std::int64_t>(meta.ram_bytes))
      .bind(8, meta.os_version)
      .bind(9, meta.net_info);
  stmt.step();
  return sqlite3_last_insert_rowid(impl_->db);
}

namespace {
PeerMeta peer_from_row(Store::Impl::Stmt& stmt) {
  PeerMeta meta;
  meta.peer_id = stmt.col_i64(0);
  meta.experiment_id = stmt.col_i64(1);
  meta.client_name = stmt.col_text(2);
  meta.addr = stmt.col_text(3);
  if (!stmt.col_null(4)) {
    meta.down_limit = static_cast<std::uint64_t>(stmt.col_i64(4));
  }
  if (!stmt.col_null(5)) {
    meta.up_limit = static_cast<std::uint64_t>(stmt.col_i64(5));
  }
  meta.cpu_description = stmt.col_text(6);
  meta.ram_bytes = static_cast<std::uint64_t>(stmt.col_i64(7));
  meta.os_version = stmt.col_text(8);
  meta.net_info = stmt.col_text(9);
  return meta;
}
constexpr const char* kPeerCols =
    "peer_id, experiment_id, client_name, addr, down_limit, up_limit, "
    "cpu_description, ram_bytes, os_version, net_info";
}  // namespace

PeerMeta Store::get_peer(std::int64_t peer_id) const {
  Impl::Stmt stmt(impl_->db, std::string("SELECT ") + kPeerCols +
                                 " FROM peers WHERE peer_id = ?1");
  stmt.bind(1, peer_id);
  if (!stmt.step()) {
    throw StoreError(StoreFault::UnknownPeer,
                     "no peer " + std::to_string(peer_id));
  }
  return peer_from_row(stmt);
}

std::vector<PeerMeta> Store::list_peers(std::int64_t experiment_id) const {
  Impl::Stmt stmt(impl_->db,
                  std::string("SELECT ") + kPeerCols +
                      " FROM peers WHERE experiment_id = ?1 ORDER BY peer_id");
  stmt.bind(1, experiment_id);
  std::vector<PeerMeta> out;
  while (stmt.step()) out.push_back(peer_from_row(stmt));
  return out;
}

std::optional<std::int64_t> Store::find_peer_by_addr(
    std::int64_t experiment_id, const std::string& addr) const {
  Impl::Stmt stmt(impl_->db,
                  "SELECT peer_id FROM peers WHERE experiment_id = ?1 AND "
                  "addr = ?2 ORDER BY peer_id LIMIT 1");
  stmt.bind(1, experiment_id).bind(2, addr);
  if (!stmt.step()) return std::nullopt;
  return stmt.col_i64(0);
}

void Store::delete_peer(std::int64_t peer_id) {
  impl_->require_peer(peer_id);
  Impl::Stmt stmt(impl_->db, "DELETE FROM peers WHERE peer_id = ?1");
  stmt.bind(1, peer_id);
  stmt.step();
  Impl::Stmt cnt(impl_->db, "DELETE FROM counters WHERE peer_id = ?1");
  cnt.bind(1, peer_id);
  cnt.step();
}

std::size_t Store::insert_status_batch(std::int64_t peer_id,
                                       const std::vector<StatusRecord>& records) {
  impl_->require_peer(peer_id);
  impl_->exec("BEGIN");
  try {
    std::int64_t seq = impl_->take_seq(peer_id, false, records.size());
    Impl::Stmt stmt(impl_->db,
                    "INSERT INTO status_msgs(peer_id, ts, seq, down_speed, "
                    "up_speed, downloaded, uploaded, eta, num_peers, pct, "
                    "size, name) VALUES(?1,?2,?3,?4,?5,?6,?7,?8,?9,?10,?11,?12)");
    for (const auto& rec : records) {
      stmt.bind(1, peer_id)
          .bind(2, rec.timestamp)
          .bind(3, seq++)
          .bind(4, static_cast<std::int64_t>(rec.down_speed))
          .bind(5, static_cast<std::int64_t>(rec.up_speed))
          .bind(6, static_cast<std::int64_t>(rec.downloaded))
          .bind(7, static_cast<std::int64_t>(rec.uploaded))
          .bind(8, rec.eta)
          .bind(9, rec.num_peers)
          .bind(10, rec.percent_hundredths)
          .bind(11, static_cast<std::int64_t>(rec.transfer_size))
          .bind(12, rec.file_name);
      stmt.step();
      stmt.reset();
    }
    impl_->exec("COMMIT");
  } catch (...) {
    impl_->exec("ROLLBACK");
    throw;
  }
  return records.size();
}

std::size_t Store::insert_verbose_batch(std::int64_t peer_id,
                                        const std::vector<VerboseRecord>& records) {
  impl_->require_peer(peer_id);
  for (const auto& rec : records) {
    if (!verbose_fields_valid(rec)) {
      throw StoreError(StoreFault::ConstraintViolation,
                       "record fields do not match kind " +
                           message_kind_name(rec.kind));
    }
  }
  std::map<std::string, std::int64_t> remote_cache;
  impl_->exec("BEGIN");
  try {
    std::int64_t seq = impl_->take_seq(peer_id, true, records.size());
    Impl::Stmt stmt(impl_->db,
                    "INSERT INTO verbose_msgs(peer_id, ts, seq, direction, "
                    "kind, remote_id, piece, boff, blen, bitfield) "
                    "VALUES(?1,?2,?3,?4,?5,?6,?7,?8,?9,?10)");
    for (const auto& rec : records) {
      stmt.bind(1, peer_id)
          .bind(2, rec.timestamp)
          .bind(3, seq++)
          .bind(4, rec.direction == Direction::Sent ? 0 : 1)
          .bind(5, static_cast<std::int64_t>(rec.kind))
          .bind(6, impl_->intern_remote(rec.remote_peer, remote_cache));
      if (rec.piece_index) {
        stmt.bind(7, *rec.piece_index);
      } else {
        stmt.bind_null(7);
      }
      if (rec.block_offset) {
        stmt.bind(8, *rec.block_offset);
      } else {
        stmt.bind_null(8);
      }
      if (rec.block_length) {
        stmt.bind(9, *rec.block_length);
      } else {
        stmt.bind_null(9);
      }
      if (rec.bitfield_hex) {
        stmt.bind(10, *rec.bitfield_hex);
      } else {
        stmt.bind_null(10);
      }
      stmt.step();
      stmt.reset();
    }
    impl_->exec("COMMIT");
  } catch (...) {
    impl_->exec("ROLLBACK");
    throw;
  }
  return records.size();
}

namespace {
void check_window(Timestamp t0, Timestamp t1) {
  if (t1 <= t0) {
    throw StoreError(StoreFault::BadWindow, "t1 must exceed t0");
  }
}
}  // namespace

std::vector<StatusRecord> Store::query_status(std::int64_t peer_id,
                                              Timestamp t0, Timestamp t1) const {
  impl_->require_peer(peer_id);
  check_window(t0, t1);
  Impl::Stmt stmt(impl_->db,
                  "SELECT ts, down_speed, up_speed, downloaded, uploaded, eta, "
                  "num_peers, pct, size, name FROM status_msgs WHERE "
                  "peer_id = ?1 AND ts >= ?2 AND ts < ?3 ORDER BY ts, seq");
  stmt.bind(1, peer_id).bind(2, t0).bind(3, t1);
  std::vector<StatusRecord> out;
  while (stmt.step()) {
    StatusRecord rec;
    rec.timestamp = stmt.col_i64(0);
    rec.down_speed = static_cast<std::uint64_t>(stmt.col_i64(1));
    rec.up_speed = static_cast<std::uint64_t>(stmt.col_i64(2));
    rec.downloaded = static_cast<std::uint64_t>(stmt.col_i64(3));
    rec.uploaded = static_cast<std::uint64_t>(stmt.col_i64(4));
    rec.eta = stmt.col_i64(5);
    rec.num_peers = static_cast<std::uint32_t>(stmt.col_i64(6));
    rec.percent_hundredths = static_cast<std::uint32_t>(stmt.col_i64(7));
    rec.transfer_size = static_cast<std::uint64_t>(stmt.col_i64(8));
    rec.file_name = stmt.col_text(9);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<VerboseRecord> Store::query_messages(
    std::int64_t peer_id, Timestamp t0, Timestamp t1,
    const std::set<MessageKind>& kinds) const {
  impl_->require_peer(peer_id);
  check_window(t0, t1);
  Impl::Stmt stmt(impl_->db,
                  "SELECT v.ts, v.direction, v.kind, r.addr, v.piece, v.boff, "
                  "v.blen, v.bitfield FROM verbose_msgs v JOIN remotes r ON "
                  "r.remote_id = v.remote_id WHERE v.peer_id = ?1 AND "
                  "v.ts >= ?2 AND v.ts < ?3 ORDER BY v.ts, v.seq");
  stmt.bind(1, peer_id).bind(2, t0).bind(3, t1);
  std::vector<VerboseRecord> out;
  while (stmt.step()) {
    VerboseRecord rec;
    rec.timestamp = stmt.col_i64(0);
    rec.direction = stmt.col_i64(1) == 0 ? Direction::Sent : Direction::Received;
    rec.kind = static_cast<MessageKind>(stmt.col_i64(2));
    rec.remote_peer = stmt.col_text(3);
    if (!stmt.col_null(4)) {
      rec.piece_index = static_cast<std::uint32_t>(stmt.col_i64(4));
    }
    if (!stmt.col_null(5)) {
      rec.block_offset = static_cast<std::uint32_t>(stmt.col_i64(5));
    }
    if (!stmt.col_null(6)) {
      rec.block_length = static_cast<std::uint32_t>(stmt.col_i64(6));
    }
    if (!stmt.col_null(7)) rec.bitfield_hex = stmt.col_text(7);
    if (kinds.empty() || kinds.contains(rec.kind)) out.push_back(std::move(rec));
  }
  return out;
}

std::size_t Store::count_messages(std::int64_t peer_id, Timestamp t0,
                                  Timestamp t1,
                                  const std::set<MessageKind>& kinds) const {
  impl_->require_peer(peer_id);
  check_window(t0, t1);
  std::string sql =
      "SELECT COUNT(*) FROM verbose_msgs WHERE peer_id = ?1 AND ts >= ?2 AND "
      "ts < ?3";
  if (!kinds.empty()) {
    sql += " AND kind IN (";
    bool first = true;
    for (const auto kind : kinds) {
      if (!first) sql += ',';
      sql += std::to_string(static_cast<int>(kind));
      first = false;
    }
    sql += ")";
  }
  Impl::Stmt stmt(impl_->db, sql);
  stmt.bind(1, peer_id).bind(2, t0).bind(3, t1);
  stmt.step();
  return static_cast<std::size_t>(stmt.col_i64(0));
}

std::uint64_t Store::file_size_bytes() const {
  impl_->exec("PRAGMA wal_checkpoint(TRUNCATE)");
  std::error_code ec;
  const auto size = std::filesystem::file_size(path_, ec);
  if (ec) throw StoreError(StoreFault::IoError, "cannot stat " + path_);
  return size;
}

void Store::dump_canonical(std::ostream& out) const {
  {
    Impl::Stmt stmt(impl_->db,
                    "SELECT experiment_id, swarm_id, num_peers, num_seeders, "
                    "start_time, file_name, file_size FROM experiments ORDER "
                    "BY experiment_id");
    while (stmt.step()) {
      out << "experiment " << stmt.col_i64(0) << ' ' << stmt.col_text(1) << ' '
          << stmt.col_i64(2) << ' ' << stmt.col_i64(3) << ' ' << stmt.col_i64(4)
          << ' ' << stmt.col_text(5) << ' ' << stmt.col_i64(6) << '\n';
    }
  }
  {
    Impl::Stmt stmt(impl_->db, std::string("SELECT ") + kPeerCols +
                                   " FROM peers ORDER BY peer_id");
    while (stmt.step()) {
      PeerMeta meta = peer_from_row(stmt);
      out << "peer " << meta.peer_id << ' ' << meta.experiment_id << ' '
          << meta.client_name << ' ' << meta.addr << ' '
          << (meta.down_limit ? std::to_string(*meta.down_limit) : "unlimited")
          << ' '
          << (meta.up_limit ? std::to_string(*meta.up_limit) : "unlimited")
          << ' ' << meta.cpu_description << '|' << meta.ram_bytes << '|'
          << meta.os_version << '|' << meta.net_info << '\n';
    }
  }
  {
    Impl::Stmt stmt(impl_->db,
                    "SELECT peer_id, ts, seq, down_speed, up_speed, "
                    "downloaded, uploaded, eta, num_peers, pct, size, name "
                    "FROM status_msgs ORDER BY peer_id, ts, seq");
    while (stmt.step()) {
      out << "status " << stmt.col_i64(0) << ' ' << stmt.col_i64(1) << ' '
          << stmt.col_i64(2) << ' ' << stmt.col_i64(3) << ' ' << stmt.col_i64(4)
          << ' ' << stmt.col_i64(5) << ' ' << stmt.col_i64(6) << ' '
          << stmt.col_i64(7) << ' ' << stmt.col_i64(8) << ' ' << stmt.col_i64(9)
          << ' ' << stmt.col_i64(10) << ' ' << stmt.col_text(11) << '\n';
    }
  }
  {
    Impl::Stmt stmt(impl_->db,
                    "SELECT v.peer_id, v.ts, v.seq, v.direction, v.kind, "
                    "r.addr, v.piece, v.boff, v.blen, v.bitfield FROM "
                    "verbose_msgs v JOIN remotes r ON r.remote_id = "
                    "v.remote_id ORDER BY v.peer_id, v.ts, v.seq");
    while (stmt.step()) {
      out << "verbose " << stmt.col_i64(0) << ' ' << stmt.col_i64(1) << ' '
          << stmt.col_i64(2) << ' ' << stmt.col_i64(3) << ' ' << stmt.col_i64(4)
          << ' ' << stmt.col_text(5);
      for (int c = 6; c <= 8; ++c) {
        out << ' ' << (stmt.col_null(c) ? std::string("-")
                                        : std::to_string(stmt.col_i64(c)));
      }
      out << ' ' << (stmt.col_null(9) ? std::string("-") : stmt.col_text(9))
          << '\n';
    }
  }
}

double compact_ratio(std::uint64_t raw_log_bytes, const Store& store) {
  if (raw_log_bytes == 0) {
    throw StoreError(StoreFault::BadInput, "raw log corpus is empty");
  }
  return static_cast<double>(store.file_size_bytes()) /
         static_cast<double>(raw_log_bytes);
}

}  // namespace swarmforge::store
