#include "gateway/core/chooser.hpp"

#include "gateway/error.hpp"

namespace gateway::core {

std::string_view to_string(ChooserMode m) noexcept {
  switch (m) {
    case ChooserMode::PriorityWithBusySkip: return "priority";
    case ChooserMode::RoundRobin: return "round-robin";
  }
  return "?";
}

std::string choose(const ChooserPolicy& policy, const StateMap& states, std::size_t& cursor) {
  const auto& cands = policy.candidates;
  const std::size_t n = cands.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "chooser for '" + policy.store_key + "' has no candidates");

  std::vector<ProviderState> snapshot;
  snapshot.reserve(n);
  for (const auto& c : cands) {
    auto it = states.find(c);
    if (it == states.end()) throw Error(Errc::InvalidArgument, "no state for candidate '" + c + "'");
    snapshot.push_back(it->second);
  }

  const bool rotate = policy.mode == ChooserMode::RoundRobin;
  const std::size_t start = (rotate && cursor < n) ? cursor + 1 : 0;

  auto scan = [&](ProviderState wanted) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = (start + i) % n;
      if (snapshot[idx] == wanted) return idx;
    }
    return std::nullopt;
  };

  auto pick = scan(ProviderState::Idle);
  if (!pick && policy.fallback_on_failure) pick = scan(ProviderState::Failed);
  if (!pick) throw Error(Errc::AllCandidatesUnavailable, "no candidate available for '" + policy.store_key + "'");
  if (rotate) cursor = *pick;
  return cands[*pick];
}

}  // namespace gateway::core
