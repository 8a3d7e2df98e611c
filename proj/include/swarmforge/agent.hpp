#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "swarmforge/adapters.hpp"
#include "swarmforge/net.hpp"
#include "swarmforge/wire.hpp"

namespace swarmforge::agent {

enum class SessionState { Running, Stopped, Exited, Failed };

const std::string& session_state_name(SessionState state);

struct SessionRecord {
  std::int64_t id = 0;
  std::string client;
  std::string torrent_path;
  std::string download_dir;
  std::string slog_path;
  std::string vlog_path;
  std::string output_path;  // combined stdout/stderr capture
  SessionState state = SessionState::Running;
  std::optional<int> exit_code;
  int pid = -1;
  bool stop_requested = false;
};

// GET-OUTPUT returns at most this much of the capture tail; full logs
// travel via ARCHIVE, keeping frames under the 1 MiB cap.
inline constexpr std::size_t kOutputTailBytes = 64 * 1024;
inline constexpr int kStopGraceSeconds = 5;

struct AgentOptions {
  std::string bind_host = "127.0.0.1";
  std::uint16_t port = 0;  // 0: ephemeral, see Agent::port()
  std::string state_dir;
  adapters::Registry registry = adapters::Registry::with_builtins();
};

// The per-node daemon: accepts framed commands over TCP, supervises
// client processes through the adapter registry and manages their files.
class Agent {
 public:
  explicit Agent(AgentOptions options);  // binds and starts serving
  ~Agent();
  Agent(const Agent&) = delete;

  std::uint16_t port() const { return port_; }
  void stop();
  void wait();  // blocks until stop() is called

  // Request handler, also callable without a socket (used by tests).
  wire::ResponseEnvelope handle(const wire::CommandEnvelope& cmd);

  std::vector<SessionRecord> sessions_snapshot() const;

 private:
  wire::ResponseEnvelope handle_start_client(const wire::KvList& args);
  wire::ResponseEnvelope handle_stop_client(const wire::KvList& args);
  wire::ResponseEnvelope handle_get_clients();
  wire::ResponseEnvelope handle_get_status(const wire::KvList& args);
  wire::ResponseEnvelope handle_get_output(const wire::KvList& args);
  wire::ResponseEnvelope handle_archive(const wire::KvList& args);
  wire::ResponseEnvelope handle_cleanup(const wire::KvList& args);

  SessionRecord* find_session(std::int64_t id);
  void serve_connection(net::Socket sock);
  void accept_loop();
  void poll_loop();

  AgentOptions options_;
  std::uint16_t port_ = 0;
  net::Listener listener_;
  mutable std::mutex mutex_;  // guards sessions_ and archives_
  std::map<std::int64_t, SessionRecord> sessions_;
  std::vector<std::string> archives_;
  std::int64_t next_id_ = 1;
  std::int64_t next_archive_ = 1;
  std::atomic<bool> stopping_{false};
  std::vector<std::thread> workers_;
  std::thread accept_thread_;
  std::thread poll_thread_;
};

}  // namespace swarmforge::agent
