#pragma once

#include <map>
#include <string>

#include "contune/problem.hpp"

namespace contune {

enum class TrialStatus { kPending, kRunning, kDone, kFailed };

const char* trial_status_name(TrialStatus status);
TrialStatus trial_status_from(const std::string& name);

/// One configuration evaluation. Status only moves forward:
/// pending -> running -> done | failed.
struct Trial {
  int id = -1;
  Configuration configuration;
  TrialStatus status = TrialStatus::kPending;
  std::map<std::string, double> metrics;
  int repeats = 1;
  double duration_s = 0.0;  // wall-clock seconds spent in launch
  std::string artifact_dir;
  int completion_order = -1;
  std::string diagnostics;
};

}  // namespace contune
