#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace gateway::harness {

struct ScenarioStep {
  std::string description;
  bool pass = false;
  std::string detail;
};

struct ScenarioReport {
  std::string scenario_id;
  std::vector<ScenarioStep> steps;
  std::chrono::milliseconds elapsed{0};

  /// True iff there is at least one step and every step passed.
  bool passed() const;
  std::string to_text() const;
  /// Throws ScenarioFailed naming the first failing step.
  void raise_if_failed() const;
};

const std::vector<std::string>& scenario_ids();

/// Runs a built-in end-to-end scenario against mocks on ephemeral ports.
/// Step failures are reported, not thrown. Unknown ids throw InvalidArgument.
ScenarioReport run_scenario(std::string_view id);

}  // namespace gateway::harness
