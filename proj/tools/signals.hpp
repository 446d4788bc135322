#pragma once

#include <csignal>

namespace gateway::tools {

/// Blocks SIGINT and SIGTERM in the calling thread and every thread it
/// later creates, so that wait_for_signal() can receive them.
inline sigset_t block_termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

inline int wait_for_signal(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

}  // namespace gateway::tools
