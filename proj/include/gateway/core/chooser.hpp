#pragma once

#include <map>
#include <string>
#include <vector>

#include "gateway/core/types.hpp"

namespace gateway::core {

enum class ChooserMode { PriorityWithBusySkip, RoundRobin };

std::string_view to_string(ChooserMode m) noexcept;

struct ChooserPolicy {
  std::string store_key;
  std::vector<std::string> candidates;
  ChooserMode mode = ChooserMode::PriorityWithBusySkip;
  bool fallback_on_failure = true;
};

using StateMap = std::map<std::string, ProviderState, std::less<>>;

/// Pure arbitration rule.
///
/// PriorityWithBusySkip scans candidates in order; RoundRobin scans starting
/// after `cursor` (the index of the previous pick, or npos before the first).
/// The first Idle candidate wins. When none is Idle and fallback_on_failure
/// is set, the first Failed candidate in the same scan order is retried.
/// Running candidates are never returned. On success `cursor` is set to the
/// chosen index (RoundRobin only).
///
/// Throws AllCandidatesUnavailable when nothing qualifies and
/// InvalidArgument when `states` misses a candidate.
std::string choose(const ChooserPolicy& policy, const StateMap& states, std::size_t& cursor);

inline std::string choose(const ChooserPolicy& policy, const StateMap& states) {
  std::size_t cursor = static_cast<std::size_t>(-1);
  return choose(policy, states, cursor);
}

/// A policy plus its round-robin cursor.
class Chooser {
 public:
  explicit Chooser(ChooserPolicy policy) : policy_(std::move(policy)) {}

  const ChooserPolicy& policy() const noexcept { return policy_; }
  std::string choose(const StateMap& states) { return core::choose(policy_, states, cursor_); }

 private:
  ChooserPolicy policy_;
  std::size_t cursor_ = static_cast<std::size_t>(-1);
};

}  // namespace gateway::core
