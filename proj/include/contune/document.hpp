#pragma once

#include <optional>
#include <string>
#include <vector>

#include "contune/plantnet_sim.hpp"
#include "contune/problem.hpp"
#include "contune/search.hpp"

namespace contune {

struct CommandExec {
  std::string command;          // {name} placeholders substituted per trial
  double timeout_s = 0.0;       // 0 disables the timeout
  std::string metrics_file = "metrics";
  bool operator==(const CommandExec&) const = default;
};

struct ExecutorSpec {
  enum class Kind { kSimulator, kExternalCommand };
  Kind kind = Kind::kSimulator;
  int parallelism = 1;
  int repeats = 1;
  SimParams sim;
  CommandExec command;
  bool operator==(const ExecutorSpec&) const = default;
};

struct SensitivitySection {
  std::optional<Configuration> base;
  std::vector<std::pair<std::string, std::vector<double>>> deltas;  // document order
  int repeats = 1;
};

/// A fully parsed run document: problem + search + executor (+ extras).
struct RunDocument {
  ProblemSpec problem;
  SearchSettings search;
  ExecutorSpec executor;
  std::optional<Configuration> baseline;
  std::optional<SensitivitySection> sensitivity;
  std::vector<int> workloads;  // client counts for sweep scenarios
};

/// CLI-level overrides folded into the document before anything derives
/// seeds or defaults from it.
struct DocumentOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats;
  std::optional<double> duration;
  std::optional<int> clients;
  std::optional<int> parallelism;
};

RunDocument parse_document(const Json& raw);
RunDocument parse_document(const Json& raw, const DocumentOverrides& overrides);
RunDocument parse_document_file(const std::filesystem::path& path,
                                const DocumentOverrides& overrides);

Json executor_to_json(const ExecutorSpec& spec);
ExecutorSpec parse_executor(const Json& node, const std::string& where);

/// Applies overrides onto the raw document tree (so derived defaults follow).
Json apply_overrides(Json raw, const DocumentOverrides& overrides);

/// The committed scenario registry; currently only "plantnet".
Json scenario_document(const std::string& name);

/// Maps a configuration onto the simulator pools via the variable names
/// http, download, extract and simsearch.
PoolConfig pools_from_configuration(const SearchSpace& space, const Configuration& point);

}  // namespace contune
