#include "contune/document.hpp"

#include "contune/error.hpp"
#include "contune/scenario_data.hpp"

namespace contune {

Json executor_to_json(const ExecutorSpec& spec) {
  Json doc;
  doc["kind"] = spec.kind == ExecutorSpec::Kind::kSimulator ? "simulator" : "external_command";
  doc["parallelism"] = spec.parallelism;
  doc["repeats"] = spec.repeats;
  if (spec.kind == ExecutorSpec::Kind::kSimulator) {
    doc["simulator"] = sim_params_to_json(spec.sim);
  } else {
    doc["command"] = spec.command.command;
    doc["timeout"] = spec.command.timeout_s;
    doc["metrics_file"] = spec.command.metrics_file;
  }
  return doc;
}

ExecutorSpec parse_executor(const Json& node, const std::string& where) {
  expect_keys(node, {"kind", "parallelism", "repeats", "simulator", "command", "timeout",
                     "metrics_file"},
              where);
  ExecutorSpec spec;
  const std::string kind = require_string(node, "kind", where);
  if (kind == "simulator") {
    spec.kind = ExecutorSpec::Kind::kSimulator;
  } else if (kind == "external_command") {
    spec.kind = ExecutorSpec::Kind::kExternalCommand;
  } else {
    throw Error(where + "/kind: expected 'simulator' or 'external_command', got '" + kind + "'");
  }
  spec.parallelism = static_cast<int>(get_integer(node, "parallelism", 1, where));
  if (spec.parallelism < 1) throw Error(where + "/parallelism: must be >= 1");
  spec.repeats = static_cast<int>(get_integer(node, "repeats", 1, where));
  if (spec.repeats < 1) throw Error(where + "/repeats: must be >= 1");
  if (spec.kind == ExecutorSpec::Kind::kSimulator) {
    if (node.contains("command") || node.contains("timeout") || node.contains("metrics_file"))
      throw Error(where + ": command settings are not valid for the simulator executor");
    if (node.contains("simulator"))
      spec.sim = sim_params_from_json(node.at("simulator"), where + "/simulator");
  } else {
    if (node.contains("simulator"))
      throw Error(where + ": simulator settings are not valid for an external command");
    spec.command.command = require_string(node, "command", where);
    spec.command.timeout_s = get_number(node, "timeout", 0.0, where);
    spec.command.metrics_file = get_string(node, "metrics_file", "metrics", where);
  }
  return spec;
}

namespace {

Configuration parse_point(const Json& node, const SearchSpace& space, const std::string& where) {
  if (!node.is_array() || static_cast<int>(node.size()) != space.arity())
    throw Error(where + ": expected an array of " + std::to_string(space.arity()) + " values");
  Configuration point;
  for (const Json& v : node) {
    if (!v.is_number()) throw Error(where + ": expected numbers");
    point.values.push_back(v.get<double>());
  }
  const BoundsReport report = validate_configuration(space, point);
  if (!report.ok())
    throw Error(where + ": value for '" + report.violations.front().variable +
                "' violates its bounds");
  return point;
}

SensitivitySection parse_sensitivity(const Json& node, const SearchSpace& space,
                                     const std::string& where) {
  expect_keys(node, {"base", "deltas", "repeats"}, where);
  SensitivitySection section;
  if (node.contains("base")) section.base = parse_point(node.at("base"), space, where + "/base");
  const Json& deltas = require_field(node, "deltas", where);
  if (!deltas.is_object()) throw Error(where + "/deltas: expected an object");
  for (const auto& item : deltas.items()) {
    if (space.index_of(item.key()) < 0)
      throw Error(where + "/deltas: unknown variable '" + item.key() + "'");
    if (!item.value().is_array())
      throw Error(where + "/deltas/" + item.key() + ": expected an array of offsets");
    std::vector<double> offsets;
    for (const Json& v : item.value()) {
      if (!v.is_number()) throw Error(where + "/deltas/" + item.key() + ": expected numbers");
      offsets.push_back(v.get<double>());
    }
    section.deltas.emplace_back(item.key(), std::move(offsets));
  }
  section.repeats = static_cast<int>(get_integer(node, "repeats", 1, where));
  if (section.repeats < 1) throw Error(where + "/repeats: must be >= 1");
  return section;
}

}  // namespace

RunDocument parse_document(const Json& raw) {
  RunDocument doc;
  doc.problem = parse_problem(raw);
  doc.search = raw.contains("search")
                   ? parse_search_settings(raw.at("search"), doc.problem.space, "document/search")
                   : parse_search_settings(Json::object(), doc.problem.space, "document/search");
  doc.executor = raw.contains("executor")
                     ? parse_executor(raw.at("executor"), "document/executor")
                     : ExecutorSpec{};
  if (raw.contains("baseline"))
    doc.baseline = parse_point(raw.at("baseline"), doc.problem.space, "document/baseline");
  if (raw.contains("sensitivity"))
    doc.sensitivity =
        parse_sensitivity(raw.at("sensitivity"), doc.problem.space, "document/sensitivity");
  if (raw.contains("workloads")) {
    const Json& w = raw.at("workloads");
    if (!w.is_array()) throw Error("document/workloads: expected an array of client counts");
    for (const Json& v : w) {
      if (!v.is_number_integer() || v.get<int>() < 1)
        throw Error("document/workloads: expected positive integers");
      doc.workloads.push_back(v.get<int>());
    }
  }
  return doc;
}

Json apply_overrides(Json raw, const DocumentOverrides& overrides) {
  if (overrides.seed) raw["search"]["seed"] = *overrides.seed;
  if (overrides.repeats) raw["executor"]["repeats"] = *overrides.repeats;
  if (overrides.parallelism) raw["executor"]["parallelism"] = *overrides.parallelism;
  if (overrides.duration) raw["executor"]["simulator"]["duration"] = *overrides.duration;
  if (overrides.clients) raw["executor"]["simulator"]["clients"] = *overrides.clients;
  return raw;
}

RunDocument parse_document(const Json& raw, const DocumentOverrides& overrides) {
  return parse_document(apply_overrides(raw, overrides));
}

RunDocument parse_document_file(const std::filesystem::path& path,
                                const DocumentOverrides& overrides) {
  return parse_document(apply_overrides(load_json_file(path), overrides));
}

Json scenario_document(const std::string& name) {
  if (name == "plantnet") return parse_json_text(kScenarioPlantnetJson, "scenario:plantnet");
  throw Error("unknown scenario '" + name + "' (available: plantnet)");
}

PoolConfig pools_from_configuration(const SearchSpace& space, const Configuration& point) {
  PoolConfig pools;
  struct Slot {
    const char* name;
    int* target;
  };
  const Slot slots[] = {{"http", &pools.http},
                        {"download", &pools.download},
                        {"extract", &pools.extract},
                        {"simsearch", &pools.simsearch}};
  for (const Slot& slot : slots) {
    const int idx = space.index_of(slot.name);
    if (idx < 0)
      throw Error(std::string("simulator executor needs a variable named '") + slot.name + "'");
    *slot.target = static_cast<int>(point.values[static_cast<std::size_t>(idx)]);
  }
  return pools;
}

}  // namespace contune
