// Per-node agent daemon: listens for framed commands and supervises
// client processes. Runs until SIGTERM/SIGINT.

#include <signal.h>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmforge/agent.hpp"

using namespace swarmforge;

int main(int argc, char** argv) {
  CLI::App app{"swarmforge agent daemon"};

  agent::AgentOptions options;
  std::vector<std::string> client_args;
  app.add_option("--bind", options.bind_host, "bind address");
  app.add_option("--port", options.port, "listen port (0: ephemeral)");
  app.add_option("--state-dir", options.state_dir,
                 "directory for session output and archives");
  app.add_option("--client", client_args,
                 "client executable mapping, name=path (repeatable)");

  CLI11_PARSE(app, argc, argv);

  std::map<std::string, std::string> client_paths;
  for (const auto& arg : client_args) {
    const std::size_t eq = arg.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "bad --client mapping: %s\n", arg.c_str());
      return 2;
    }
    client_paths[arg.substr(0, eq)] = arg.substr(eq + 1);
  }
  options.registry = adapters::Registry::with_builtins(client_paths);

  // Block the shutdown signals before spawning the service threads so
  // they inherit the mask and sigwait below is the sole receiver.
  sigset_t mask;
  sigemptyset(&mask);
  sigaddset(&mask, SIGTERM);
  sigaddset(&mask, SIGINT);
  pthread_sigmask(SIG_BLOCK, &mask, nullptr);

  try {
    agent::Agent agent(std::move(options));
    std::printf("agent listening on port %u\n", agent.port());
    std::fflush(stdout);
    int sig = 0;
    sigwait(&mask, &sig);
    agent.stop();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "agent: %s\n", e.what());
    return 1;
  }
  return 0;
}
