#include "contune/problem.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "contune/error.hpp"

namespace contune {

const std::initializer_list<const char*> kDocumentKeys = {
    "variables", "objective", "constraints", "baseline",
    "search",    "executor",  "sensitivity", "workloads"};

const Variable* SearchSpace::find(const std::string& name) const {
  for (const Variable& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

int SearchSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

bool is_whole(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

void validate_space(const SearchSpace& space) {
  if (space.variables.empty()) throw Error("search space: no variables declared");
  std::set<std::string> seen;
  for (const Variable& v : space.variables) {
    if (v.name.empty()) throw Error("search space: variable with empty name");
    if (!seen.insert(v.name).second)
      throw Error("search space: duplicate variable name '" + v.name + "'");
    if (!(v.lower < v.upper))
      throw Error("variable '" + v.name + "': lower bound " + std::to_string(v.lower) +
                  " must be strictly below upper bound " + std::to_string(v.upper));
    if (v.kind == VarKind::kInteger && (!is_whole(v.lower) || !is_whole(v.upper)))
      throw Error("variable '" + v.name + "': integer variable needs whole-number bounds");
  }
}

BoundsReport validate_configuration(const SearchSpace& space, const Configuration& point) {
  if (static_cast<int>(point.values.size()) != space.arity())
    throw Error("configuration arity " + std::to_string(point.values.size()) +
                " does not match search space arity " + std::to_string(space.arity()));
  BoundsReport report;
  for (std::size_t i = 0; i < point.values.size(); ++i) {
    const Variable& var = space.variables[i];
    const double v = point.values[i];
    if (!(v >= var.lower)) {
      report.violations.push_back({var.name, v, var.lower, var.upper, BoundViolation::kBelowLower});
    } else if (!(v <= var.upper)) {
      report.violations.push_back({var.name, v, var.lower, var.upper, BoundViolation::kAboveUpper});
    } else if (var.kind == VarKind::kInteger && !is_whole(v)) {
      report.violations.push_back({var.name, v, var.lower, var.upper, BoundViolation::kNotIntegral});
    }
  }
  return report;
}

double eval_expression(const LinearExpr& expr, const SearchSpace& space,
                       const Configuration& point,
                       const std::map<std::string, double>& metrics) {
  double total = expr.constant;
  for (const auto& [name, coeff] : expr.terms) {
    int idx = space.index_of(name);
    if (idx >= 0) {
      total += coeff * point.values[static_cast<std::size_t>(idx)];
      continue;
    }
    auto it = metrics.find(name);
    if (it == metrics.end()) throw Error("unknown metric '" + name + "' in constraint expression");
    total += coeff * it->second;
  }
  return total;
}

bool expression_is_metric_free(const LinearExpr& expr, const SearchSpace& space) {
  for (const auto& [name, coeff] : expr.terms) {
    (void)coeff;
    if (space.index_of(name) < 0) return false;
  }
  return true;
}

ConstraintReport check_constraints(const ProblemSpec& spec, const Configuration& point,
                                   const std::map<std::string, double>& metrics) {
  ConstraintReport report;
  for (std::size_t i = 0; i < spec.constraints.size(); ++i) {
    const Constraint& c = spec.constraints[i];
    const double value = eval_expression(c.expression, spec.space, point, metrics);
    bool feasible = c.kind == ConstraintKind::kInequality ? value <= 0.0
                                                          : std::fabs(value) <= c.tolerance;
    if (!feasible) report.violations.push_back({i, c.kind, value});
  }
  return report;
}

namespace {

VarKind parse_kind(const std::string& text, const std::string& where) {
  if (text == "integer") return VarKind::kInteger;
  if (text == "real") return VarKind::kReal;
  throw Error(where + ": kind must be 'integer' or 'real', got '" + text + "'");
}

Direction parse_direction(const std::string& text, const std::string& where) {
  if (text == "minimize") return Direction::kMinimize;
  if (text == "maximize") return Direction::kMaximize;
  throw Error(where + ": direction must be 'minimize' or 'maximize', got '" + text + "'");
}

LinearExpr parse_expression(const Json& node, const std::string& where) {
  expect_keys(node, {"terms", "constant"}, where);
  LinearExpr expr;
  const Json& terms = require_field(node, "terms", where);
  if (!terms.is_object()) throw Error(where + "/terms: expected an object of name -> coefficient");
  for (const auto& item : terms.items()) {
    if (!item.value().is_number())
      throw Error(where + "/terms/" + item.key() + ": expected a number");
    expr.terms[item.key()] = item.value().get<double>();
  }
  expr.constant = get_number(node, "constant", 0.0, where);
  return expr;
}

}  // namespace

ProblemSpec parse_problem(const Json& document) {
  expect_keys(document, kDocumentKeys, "document");

  ProblemSpec spec;
  const Json& vars = require_field(document, "variables", "document");
  if (!vars.is_array() || vars.empty())
    throw Error("document/variables: expected a non-empty array");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string where = "document/variables/" + std::to_string(i);
    const Json& node = vars[i];
    expect_keys(node, {"name", "kind", "lower", "upper"}, where);
    Variable v;
    v.name = require_string(node, "name", where);
    v.kind = parse_kind(require_string(node, "kind", where), where);
    v.lower = require_number(node, "lower", where);
    v.upper = require_number(node, "upper", where);
    spec.space.variables.push_back(std::move(v));
  }
  validate_space(spec.space);

  const Json& objective = require_field(document, "objective", "document");
  expect_keys(objective, {"metric", "direction"}, "document/objective");
  spec.objective.metric = require_string(objective, "metric", "document/objective");
  spec.objective.direction =
      parse_direction(require_string(objective, "direction", "document/objective"),
                      "document/objective");

  if (document.contains("constraints")) {
    const Json& cons = document.at("constraints");
    if (!cons.is_array()) throw Error("document/constraints: expected an array");
    for (std::size_t i = 0; i < cons.size(); ++i) {
      const std::string where = "document/constraints/" + std::to_string(i);
      const Json& node = cons[i];
      expect_keys(node, {"kind", "expression", "tolerance"}, where);
      Constraint c;
      const std::string kind = require_string(node, "kind", where);
      if (kind == "inequality") {
        c.kind = ConstraintKind::kInequality;
        if (node.contains("tolerance"))
          throw Error(where + ": tolerance is only valid for equality constraints");
      } else if (kind == "equality") {
        c.kind = ConstraintKind::kEquality;
        c.tolerance = require_number(node, "tolerance", where);
        if (!(c.tolerance > 0.0))
          throw Error(where + ": equality constraint needs a strictly positive tolerance");
      } else {
        throw Error(where + ": kind must be 'inequality' or 'equality', got '" + kind + "'");
      }
      c.expression = parse_expression(require_field(node, "expression", where), where + "/expression");
      spec.constraints.push_back(std::move(c));
    }
  }
  return spec;
}

ProblemSpec parse_problem_file(const std::filesystem::path& path) {
  return parse_problem(load_json_file(path));
}

Json problem_to_json(const ProblemSpec& spec) {
  Json doc;
  Json vars = Json::array();
  for (const Variable& v : spec.space.variables) {
    Json node;
    node["name"] = v.name;
    node["kind"] = v.kind == VarKind::kInteger ? "integer" : "real";
    node["lower"] = v.lower;
    node["upper"] = v.upper;
    vars.push_back(std::move(node));
  }
  doc["variables"] = std::move(vars);
  doc["objective"] = {
      {"metric", spec.objective.metric},
      {"direction", spec.objective.direction == Direction::kMinimize ? "minimize" : "maximize"}};
  Json cons = Json::array();
  for (const Constraint& c : spec.constraints) {
    Json node;
    node["kind"] = c.kind == ConstraintKind::kInequality ? "inequality" : "equality";
    Json expr;
    Json terms = Json::object();
    for (const auto& [name, coeff] : c.expression.terms) terms[name] = coeff;
    expr["terms"] = std::move(terms);
    expr["constant"] = c.expression.constant;
    node["expression"] = std::move(expr);
    if (c.kind == ConstraintKind::kEquality) node["tolerance"] = c.tolerance;
    cons.push_back(std::move(node));
  }
  doc["constraints"] = std::move(cons);
  return doc;
}

std::string format_configuration(const SearchSpace& space, const Configuration& point) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < point.values.size(); ++i) {
    if (i) out << ", ";
    out << space.variables[i].name << "=" << point.values[i];
  }
  out << ")";
  return out.str();
}

}  // namespace contune
