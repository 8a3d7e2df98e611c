#include "swarmforge/agent.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "swarmforge/archive.hpp"
#include "swarmforge/log_parsers.hpp"

namespace swarmforge::agent {

namespace fs = std::filesystem;

const std::string& session_state_name(SessionState state) {
  static const std::string names[] = {"RUNNING", "STOPPED", "EXITED", "FAILED"};
  return names[static_cast<int>(state)];
}

namespace {

using wire::ErrorCode;
using wire::ResponseEnvelope;

ResponseEnvelope bad_args(const std::string& detail) {
  return ResponseEnvelope::err(ErrorCode::BadArgs, {{"detail", detail}});
}

ResponseEnvelope io_error(const std::string& detail) {
  return ResponseEnvelope::err(ErrorCode::IoError, {{"detail", detail}});
}

std::optional<std::int64_t> parse_id(const wire::KvList& args) {
  const auto raw = wire::find_arg(args, "ID");
  if (!raw || raw->empty()) return std::nullopt;
  std::int64_t value = 0;
  for (char c : *raw) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    value = value * 10 + (c - '0');
    if (value > 1'000'000'000'000) return std::nullopt;
  }
  return value;
}

std::optional<std::uint64_t> parse_u64(const std::string& raw) {
  if (raw.empty()) return std::nullopt;
  std::uint64_t value = 0;
  for (char c : raw) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    value = value * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return value;
}

// Wire keys are [A-Z_]+; adapters take lowercase dashed option names.
std::string extra_option_name(const std::string& key) {
  std::string out;
  for (char c : key) {
    out.push_back(c == '_' ? '-'
                           : static_cast<char>(
                                 std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    if (end > start) out.push_back(text.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int spawn_capture(const std::vector<std::string>& argv,
                  const std::string& output_path) {
  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& arg : argv) cargv.push_back(const_cast<char*>(arg.c_str()));
  cargv.push_back(nullptr);

  const int out_fd =
      ::open(output_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (out_fd < 0) return -1;
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(out_fd);
    return -1;
  }
  if (pid == 0) {
    // A stop can arrive before exec; inherited handlers must not run in
    // the child image.
    ::signal(SIGTERM, SIG_DFL);
    ::signal(SIGINT, SIG_DFL);
    ::dup2(out_fd, STDOUT_FILENO);
    ::dup2(out_fd, STDERR_FILENO);
    ::close(out_fd);
    ::execv(cargv[0], cargv.data());
    ::_exit(127);
  }
  ::close(out_fd);
  return pid;
}

// Reaps one child if it has exited; updates the record in place.
void reap_if_done(SessionRecord& rec) {
  if (rec.state != SessionState::Running) return;
  int status = 0;
  const pid_t got = ::waitpid(rec.pid, &status, WNOHANG);
  if (got != rec.pid) return;
  if (WIFEXITED(status)) {
    rec.exit_code = WEXITSTATUS(status);
    if (rec.stop_requested) {
      rec.state = SessionState::Stopped;
    } else {
      rec.state =
          *rec.exit_code == 0 ? SessionState::Exited : SessionState::Failed;
    }
  } else if (WIFSIGNALED(status)) {
    rec.exit_code = 128 + WTERMSIG(status);
    rec.state =
        rec.stop_requested ? SessionState::Stopped : SessionState::Failed;
  }
}

std::string last_nonempty_line(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "";
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return last;
}

}  // namespace

Agent::Agent(AgentOptions options)
    : options_(std::move(options)),
      listener_(options_.bind_host, options_.port) {
  port_ = listener_.port();
  if (options_.state_dir.empty()) {
    options_.state_dir = fs::temp_directory_path() / "swarmforge-agent";
  }
  fs::create_directories(options_.state_dir);
  accept_thread_ = std::thread([this] { accept_loop(); });
  poll_thread_ = std::thread([this] { poll_loop(); });
}

Agent::~Agent() { stop(); }

void Agent::stop() {
  if (stopping_.exchange(true)) {
    wait();
    return;
  }
  listener_.close();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (poll_thread_.joinable()) poll_thread_.join();
  for (auto& worker : workers_) {
    if (worker.joinable()) worker.join();
  }
  // Leave no orphaned client processes behind.
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto& [id, rec] : sessions_) {
    if (rec.state == SessionState::Running) {
      ::kill(rec.pid, SIGKILL);
      int status = 0;
      ::waitpid(rec.pid, &status, 0);
      rec.stop_requested = true;
      rec.state = SessionState::Stopped;
    }
  }
}

void Agent::wait() {
  while (!stopping_.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  if (poll_thread_.joinable()) poll_thread_.join();
}

void Agent::accept_loop() {
  while (!stopping_.load()) {
    net::Socket sock = listener_.accept();
    if (!sock.valid()) break;  // listener closed
    workers_.emplace_back(
        [this, s = std::move(sock)]() mutable { serve_connection(std::move(s)); });
  }
}

void Agent::poll_loop() {
  while (!stopping_.load()) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      for (auto& [id, rec] : sessions_) reap_if_done(rec);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
}

void Agent::serve_connection(net::Socket sock) {
  while (true) {
    std::optional<std::string> payload;
    try {
      payload = sock.recv_frame_payload();
    } catch (const std::exception&) {
      return;  // oversized or truncated frame: drop the connection
    }
    if (!payload) return;  // clean EOF
    ResponseEnvelope resp;
    bool close_after = false;
    try {
      const wire::CommandEnvelope cmd = wire::decode_command_payload(*payload);
      resp = handle(cmd);
    } catch (const wire::WireError& e) {
      const ErrorCode code = e.fault() == wire::WireFault::UnknownCommand
                                 ? ErrorCode::UnknownCmd
                                 : ErrorCode::BadArgs;
      resp = ResponseEnvelope::err(code, {{"detail", e.what()}});
      close_after = true;
    }
    try {
      sock.send_all(wire::encode_response(resp));
    } catch (const std::exception&) {
      return;
    }
    if (close_after) return;
  }
}

wire::ResponseEnvelope Agent::handle(const wire::CommandEnvelope& cmd) {
  wire::validate_command(cmd);
  try {
    switch (cmd.kind) {
      case wire::CommandKind::StartClient:
        return handle_start_client(cmd.args);
      case wire::CommandKind::StopClient:
        return handle_stop_client(cmd.args);
      case wire::CommandKind::GetClients:
        return handle_get_clients();
      case wire::CommandKind::GetStatus:
        return handle_get_status(cmd.args);
      case wire::CommandKind::GetOutput:
        return handle_get_output(cmd.args);
      case wire::CommandKind::Archive:
        return handle_archive(cmd.args);
      case wire::CommandKind::Cleanup:
        return handle_cleanup(cmd.args);
    }
  } catch (const wire::WireError&) {
    throw;
  } catch (const std::exception& e) {
    return io_error(e.what());
  }
  return ResponseEnvelope::err(ErrorCode::UnknownCmd);
}

SessionRecord* Agent::find_session(std::int64_t id) {
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : &it->second;
}

wire::ResponseEnvelope Agent::handle_start_client(const wire::KvList& args) {
  const std::string client = *wire::find_arg(args, "CLIENT");
  if (!options_.registry.has(client)) {
    return bad_args("unknown client: " + client);
  }
  const adapters::AdapterSpec& adapter = options_.registry.resolve(client);

  adapters::LaunchSpec launch;
  launch.torrent_path = *wire::find_arg(args, "TORRENT");
  launch.download_dir = *wire::find_arg(args, "DOWN_DIR");
  launch.slog_path = *wire::find_arg(args, "SLOG");
  launch.vlog_path = *wire::find_arg(args, "VLOG");
  for (const auto& [key, value] : args) {
    if (key == "TORRENT" || key == "DOWN_DIR" || key == "SLOG" ||
        key == "VLOG" || key == "CLIENT") {
      continue;
    }
    if (key == "DOWN" || key == "UP") {
      const auto limit = parse_u64(value);
      if (!limit) return bad_args("bad " + key + " limit: " + value);
      (key == "DOWN" ? launch.down_limit : launch.up_limit) = *limit;
    } else if (key == "ROLE") {
      if (value != "seeder" && value != "leecher") {
        return bad_args("bad ROLE: " + value);
      }
      launch.seeder = value == "seeder";
    } else {
      launch.extra[extra_option_name(key)] = value;
    }
  }

  if (::access(launch.torrent_path.c_str(), R_OK) != 0) {
    return bad_args("torrent not readable: " + launch.torrent_path);
  }
  std::error_code ec;
  fs::create_directories(launch.download_dir, ec);
  if (ec) return io_error("cannot create " + launch.download_dir);

  std::vector<std::string> argv;
  try {
    argv = adapter.build_command_line(adapter, launch);
  } catch (const adapters::AdapterError& e) {
    return bad_args(e.what());
  }

  std::lock_guard<std::mutex> lock(mutex_);
  SessionRecord rec;
  rec.id = next_id_++;
  rec.client = client;
  rec.torrent_path = launch.torrent_path;
  rec.download_dir = launch.download_dir;
  rec.slog_path = launch.slog_path;
  rec.vlog_path = launch.vlog_path;
  rec.output_path = (fs::path(options_.state_dir) /
                     ("session-" + std::to_string(rec.id) + ".out"))
                        .string();
  rec.pid = spawn_capture(argv, rec.output_path);
  if (rec.pid < 0) {
    return ResponseEnvelope::err(ErrorCode::ClientFailed,
                                 {{"detail", "spawn failed"}});
  }
  const std::int64_t id = rec.id;
  sessions_.emplace(id, std::move(rec));
  return ResponseEnvelope::ok({{"id", std::to_string(id)}});
}

wire::ResponseEnvelope Agent::handle_stop_client(const wire::KvList& args) {
  const auto id = parse_id(args);
  if (!id) return bad_args("bad ID");
  std::unique_lock<std::mutex> lock(mutex_);
  SessionRecord* rec = find_session(*id);
  if (!rec) return ResponseEnvelope::err(ErrorCode::NoSuchId);
  reap_if_done(*rec);
  if (rec->state != SessionState::Running) {
    // Idempotent: stopping an already-finished session succeeds.
    return ResponseEnvelope::ok(
        {{"state", session_state_name(rec->state)}});
  }
  rec->stop_requested = true;
  const int pid = rec->pid;
  ::kill(pid, SIGTERM);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::seconds(kStopGraceSeconds);
  while (rec->state == SessionState::Running) {
    reap_if_done(*rec);
    if (rec->state != SessionState::Running) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      lock.unlock();
      int status = 0;
      ::waitpid(pid, &status, 0);
      lock.lock();
      rec->exit_code = 137;
      rec->state = SessionState::Stopped;
      break;
    }
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    lock.lock();
  }
  return ResponseEnvelope::ok({{"state", session_state_name(rec->state)}});
}

wire::ResponseEnvelope Agent::handle_get_clients() {
  std::lock_guard<std::mutex> lock(mutex_);
  std::string ids;
  wire::KvList body;
  for (auto& [id, rec] : sessions_) {
    reap_if_done(rec);
    if (!ids.empty()) ids.push_back(',');
    ids += std::to_string(id);
  }
  body.emplace_back("clients", ids);
  for (const auto& [id, rec] : sessions_) {
    body.emplace_back("state_" + std::to_string(id),
                      session_state_name(rec.state));
  }
  return ResponseEnvelope::ok(std::move(body));
}

wire::ResponseEnvelope Agent::handle_get_status(const wire::KvList& args) {
  const auto id = parse_id(args);
  if (!id) return bad_args("bad ID");
  std::string slog_path;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const SessionRecord* rec = find_session(*id);
    if (!rec) return ResponseEnvelope::err(ErrorCode::NoSuchId);
    slog_path = rec->slog_path;
  }
  const std::string line = last_nonempty_line(slog_path);
  if (line.empty()) return io_error("no status yet in " + slog_path);
  StatusRecord status;
  try {
    status = logs::parse_status_line(line);
  } catch (const logs::MalformedLine& e) {
    return io_error(std::string("bad status line: ") + e.what());
  }
  return ResponseEnvelope::ok({
      {"down_speed", std::to_string(status.down_speed)},
      {"up_speed", std::to_string(status.up_speed)},
      {"downloaded", std::to_string(status.downloaded)},
      {"uploaded", std::to_string(status.uploaded)},
      {"eta",
       status.eta == kEtaInfinite ? "inf" : std::to_string(status.eta)},
      {"num_peers", std::to_string(status.num_peers)},
  });
}

wire::ResponseEnvelope Agent::handle_get_output(const wire::KvList& args) {
  const auto id = parse_id(args);
  if (!id) return bad_args("bad ID");
  std::string output_path;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const SessionRecord* rec = find_session(*id);
    if (!rec) return ResponseEnvelope::err(ErrorCode::NoSuchId);
    output_path = rec->output_path;
  }
  std::ifstream in(output_path, std::ios::binary | std::ios::ate);
  if (!in) return io_error("cannot read " + output_path);
  const auto size = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t take =
      std::min<std::uint64_t>(size, kOutputTailBytes);
  in.seekg(static_cast<std::streamoff>(size - take));
  std::string tail(take, '\0');
  in.read(tail.data(), static_cast<std::streamsize>(take));
  // Values are single-line on the wire; keep the tail transportable.
  for (char& c : tail) {
    if (c == '\n' || c == '\r') c = '\x1e';
  }
  return ResponseEnvelope::ok({{"truncated", take < size ? "1" : "0"},
                               {"output", tail}});
}

wire::ResponseEnvelope Agent::handle_archive(const wire::KvList& args) {
  const auto files_raw = wire::find_arg(args, "FILES");
  const std::vector<std::string> files = split_csv(files_raw.value_or(""));
  if (files.empty()) return bad_args("FILES must name at least one file");
  std::string out_path;
  if (const auto out = wire::find_arg(args, "OUT"); out && !out->empty()) {
    out_path = *out;
  } else {
    std::lock_guard<std::mutex> lock(mutex_);
    out_path = (fs::path(options_.state_dir) /
                ("archive-" + std::to_string(next_archive_++) + ".tar.gz"))
                   .string();
  }
  try {
    archive::archive_and_delete(files, out_path);
  } catch (const archive::ArchiveError& e) {
    return io_error(e.what());
  }
  std::lock_guard<std::mutex> lock(mutex_);
  archives_.push_back(out_path);
  return ResponseEnvelope::ok({{"archive", out_path}});
}

wire::ResponseEnvelope Agent::handle_cleanup(const wire::KvList& args) {
  const auto flag = [&](const char* key) {
    const auto v = wire::find_arg(args, key);
    return v && *v == "1";
  };
  const bool all = flag("ALL");
  const bool down = all || flag("DOWN");
  const bool vlogs = all || flag("VLOGS");
  const bool slogs = all || flag("SLOGS");
  const bool archives = all || flag("ARCHIVE");
  if (!down && !vlogs && !slogs && !archives) {
    return bad_args("all cleanup flags are 0");
  }

  // Only paths declared by sessions (or archives this agent wrote) are
  // ever touched.
  std::vector<std::string> victims;
  std::vector<fs::path> victim_dirs;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [id, rec] : sessions_) {
      if (slogs) victims.push_back(rec.slog_path);
      if (vlogs) {
        victims.push_back(rec.vlog_path);
        // Per-peer variants share the vlog path as a stem.
        const fs::path stem(rec.vlog_path);
        std::error_code ec;
        for (const auto& entry :
             fs::directory_iterator(stem.parent_path(), ec)) {
          const std::string name = entry.path().filename().string();
          const std::string prefix = stem.stem().string() + ".";
          if (name.starts_with(prefix) && name.ends_with(".log") &&
              !logs::remote_peer_from_filename(name).empty()) {
            victims.push_back(entry.path().string());
          }
        }
      }
      if (down) victim_dirs.emplace_back(rec.download_dir);
    }
    if (archives) {
      victims.insert(victims.end(), archives_.begin(), archives_.end());
      archives_.clear();
    }
  }

  std::uint64_t removed = 0;
  for (const auto& path : victims) {
    std::error_code ec;
    if (fs::remove(path, ec)) ++removed;
    if (ec) return io_error("cannot remove " + path);
  }
  for (const auto& dir : victim_dirs) {
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      if (!entry.is_regular_file()) continue;
      std::error_code rec_ec;
      if (fs::remove(entry.path(), rec_ec)) ++removed;
      if (rec_ec) return io_error("cannot remove " + entry.path().string());
    }
  }
  return ResponseEnvelope::ok({{"removed", std::to_string(removed)}});
}

std::vector<SessionRecord> Agent::sessions_snapshot() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<SessionRecord> out;
  out.reserve(sessions_.size());
  for (const auto& [id, rec] : sessions_) out.push_back(rec);
  return out;
}

}  // namespace swarmforge::agent
