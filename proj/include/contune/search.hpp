#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contune/problem.hpp"
#include "contune/rng.hpp"
#include "contune/sampling.hpp"
#include "contune/surrogate.hpp"

namespace contune {

enum class Algorithm { kBoExtraTrees, kSimulatedAnnealing, kDifferentialEvolution };

enum class AcquisitionKind { kLowerConfidenceBound, kExpectedImprovement };

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::kLowerConfidenceBound;
  double kappa = 1.96;      // confidence-bound weight
  double xi = 0.01;         // expected-improvement margin
  int candidate_pool = 1000;
  bool operator==(const AcquisitionSpec&) const = default;
};

struct AnnealParams {
  double initial_temperature = 1.0;
  double cooling = 0.95;        // geometric factor applied per step
  double step_fraction = 0.2;   // proposal step as a fraction of the range
  bool operator==(const AnnealParams&) const = default;
};

struct DeParams {
  int population = 16;
  double weight = 0.7;     // differential weight F
  double crossover = 0.9;  // crossover rate CR
  bool operator==(const DeParams&) const = default;
};

struct SearchSettings {
  Algorithm algorithm = Algorithm::kBoExtraTrees;
  int budget = 40;
  int patience = 10;
  double epsilon = 1e-3;  // relative improvement threshold (times |best|)
  std::uint64_t seed = 0;
  SamplerSpec sampler;
  AcquisitionSpec acquisition;
  EnsembleParams surrogate;
  AnnealParams annealing;
  DeParams evolution;
  bool operator==(const SearchSettings&) const = default;
};

/// Pending-point duplicate suppression radius in unit-normalized coordinates.
inline constexpr double kDuplicateRadius = 1e-6;

struct ConvergenceStatus {
  bool done = false;
  enum class Reason { kNone, kBudget, kPatience } reason = Reason::kNone;
};

struct BestPoint {
  Configuration configuration;
  double value = 0.0;  // raw objective value
  int trial = -1;      // tell index that produced it
};

/// Proposal step for annealing: one uniformly chosen variable perturbed by a
/// uniform step within +/- step_fraction * range, clamped and rounded.
Configuration anneal_propose(const SearchSpace& space, const Configuration& current,
                             double step_fraction, Rng& rng);

/// Metropolis acceptance for a minimization step with value change `delta`.
double anneal_accept_probability(double delta, double temperature);

/// One generation of rand/1/bin trial vectors from the given population.
std::vector<Configuration> de_generation(const SearchSpace& space,
                                         std::span<const Configuration> population,
                                         const DeParams& params, Rng& rng);

/// Ask/tell optimizer over one problem. All algorithms share the interface:
/// ask() yields the next configuration (or nothing once the budget is spent
/// or convergence holds), tell() records the measured objective.
class Optimizer {
 public:
  Optimizer(ProblemSpec problem, SearchSettings settings);

  std::optional<Configuration> ask();
  void tell(const Configuration& point, double value);
  /// Failure path: the point is recorded with a penalized objective so the
  /// surrogate stays defined everywhere; best-so-far cannot improve.
  void tell_failure(const Configuration& point);

  ConvergenceStatus converged() const;

  const ProblemSpec& problem() const { return problem_; }
  const SearchSettings& settings() const { return settings_; }
  const Dataset& completed() const { return dataset_; }
  std::size_t pending_count() const { return pending_.size(); }
  std::vector<Configuration> pending_points() const;
  bool has_best() const { return best_.trial >= 0; }
  const BestPoint& best() const { return best_; }
  int initial_evaluations() const { return initial_told_; }
  int guided_evaluations() const { return static_cast<int>(dataset_.size()) - initial_told_; }
  /// Last surrogate refit (BO only); null until the model-guided phase.
  const EnsembleModel* model() const { return model_ ? &*model_ : nullptr; }

  /// Candidate pool used by the model-guided ask with the given ordinal;
  /// exposed so tests can verify the acquisition argmin independently.
  std::vector<Configuration> candidates_for_ask(int ask_ordinal) const;

 private:
  struct PendingEntry {
    Configuration point;
    bool initial = false;
  };
  struct DeTicket {
    Configuration point;
    int member = -1;
    bool initial = false;
  };
  struct Proposal {
    Configuration point;
    bool initial = false;
  };

  std::optional<Proposal> ask_bo();
  std::optional<Proposal> ask_sa();
  std::optional<Proposal> ask_de();
  void ensure_model();
  bool ask_time_feasible(const Configuration& point) const;
  bool near_pending(const Configuration& point) const;
  void record(const Configuration& point, double raw_value, bool failed);
  double penalty_value() const;
  double internal(double raw) const {
    return problem_.objective.direction == Direction::kMaximize ? -raw : raw;
  }
  double external(double internal_value) const {
    return problem_.objective.direction == Direction::kMaximize ? -internal_value
                                                                : internal_value;
  }

  ProblemSpec problem_;
  SearchSettings settings_;
  std::vector<Configuration> initial_design_;
  std::size_t initial_cursor_ = 0;
  int initial_told_ = 0;
  Dataset dataset_;  // internal (minimization) values
  std::vector<PendingEntry> pending_;
  BestPoint best_;
  double best_internal_ = 0.0;
  int no_improvement_ = 0;
  int ask_counter_ = 0;
  int tell_counter_ = 0;
  std::optional<EnsembleModel> model_;

  // Simulated annealing state.
  Rng sa_rng_;
  double temperature_ = 0.0;
  std::optional<Configuration> sa_current_;
  double sa_current_value_ = 0.0;

  // Differential evolution state.
  Rng de_rng_;
  std::vector<Configuration> de_population_;
  std::vector<double> de_values_;
  std::vector<DeTicket> de_pending_;
  std::vector<DeTicket> de_queue_;
  std::size_t de_queue_cursor_ = 0;
};

Json search_settings_to_json(const SearchSettings& settings);
SearchSettings parse_search_settings(const Json& node, const SearchSpace& space,
                                     const std::string& where);

}  // namespace contune
