#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contune/jsonio.hpp"

namespace contune {

enum class VarKind { kInteger, kReal };
enum class Direction { kMinimize, kMaximize };
enum class ConstraintKind { kInequality, kEquality };

struct Variable {
  std::string name;
  VarKind kind = VarKind::kReal;
  double lower = 0.0;
  double upper = 0.0;

  double range() const { return upper - lower; }
  bool operator==(const Variable&) const = default;
};

struct SearchSpace {
  std::vector<Variable> variables;

  int arity() const { return static_cast<int>(variables.size()); }
  const Variable* find(const std::string& name) const;
  int index_of(const std::string& name) const;  // -1 when absent
  bool operator==(const SearchSpace&) const = default;
};

/// Checks non-emptiness, unique names, lower < upper and whole-number bounds
/// for integer variables. Throws Error on the first violation.
void validate_space(const SearchSpace& space);

struct ObjectiveSpec {
  std::string metric;
  Direction direction = Direction::kMinimize;
  bool operator==(const ObjectiveSpec&) const = default;
};

/// Affine expression: sum of coefficient * value(name) + constant, where a
/// name resolves to a variable of the point first, then to a metric.
struct LinearExpr {
  std::map<std::string, double> terms;
  double constant = 0.0;
  bool operator==(const LinearExpr&) const = default;
};

struct Constraint {
  ConstraintKind kind = ConstraintKind::kInequality;
  LinearExpr expression;
  double tolerance = 0.0;  // equality only, > 0
  bool operator==(const Constraint&) const = default;
};

struct Configuration {
  std::vector<double> values;
  bool operator==(const Configuration&) const = default;
};

struct ProblemSpec {
  SearchSpace space;
  ObjectiveSpec objective;
  std::vector<Constraint> constraints;
  bool operator==(const ProblemSpec&) const = default;
};

enum class BoundViolation { kBelowLower, kAboveUpper, kNotIntegral };

struct BoundsReport {
  struct Entry {
    std::string variable;
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    BoundViolation reason = BoundViolation::kBelowLower;
  };
  std::vector<Entry> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks every component against its bounds and integrality. Arity mismatch
/// is a structural error (throws); bound violations are reported, all of them.
BoundsReport validate_configuration(const SearchSpace& space, const Configuration& point);

struct ConstraintReport {
  struct Entry {
    std::size_t index = 0;
    ConstraintKind kind = ConstraintKind::kInequality;
    double value = 0.0;  // g(x) or h(x)
  };
  std::vector<Entry> violations;
  bool feasible() const { return violations.empty(); }
};

/// Evaluates all constraints at (point, metrics). A referenced name that is
/// neither a variable nor a present metric throws Error("unknown metric ...").
ConstraintReport check_constraints(const ProblemSpec& spec, const Configuration& point,
                                   const std::map<std::string, double>& metrics);

double eval_expression(const LinearExpr& expr, const SearchSpace& space,
                       const Configuration& point,
                       const std::map<std::string, double>& metrics);

/// Whether the expression can be evaluated from the configuration alone.
bool expression_is_metric_free(const LinearExpr& expr, const SearchSpace& space);

// Document ingestion. parse_problem takes the whole configuration document,
// rejects unknown top-level keys and builds the problem sections; the other
// sections (search, executor, ...) are parsed by their owning modules.
ProblemSpec parse_problem(const Json& document);
ProblemSpec parse_problem_file(const std::filesystem::path& path);

Json problem_to_json(const ProblemSpec& spec);

// Known top-level document keys, shared with the full-document parser.
extern const std::initializer_list<const char*> kDocumentKeys;

std::string format_configuration(const SearchSpace& space, const Configuration& point);

}  // namespace contune
