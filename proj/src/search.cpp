#include "contune/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "contune/error.hpp"

namespace contune {

namespace {

constexpr std::uint64_t kCandidateTag = 0x63616e64ULL;  // acquisition pools
constexpr std::uint64_t kSamplerTag = 0x73616d70ULL;    // derived sampler seed
constexpr std::uint64_t kSurrogateTag = 0x74726565ULL;  // derived forest seed
constexpr std::uint64_t kSaTag = 0x616e6eULL;
constexpr std::uint64_t kDeTag = 0x6465ULL;

double snap_value(const Variable& var, double value) {
  if (var.kind == VarKind::kInteger) value = std::round(value);
  return std::clamp(value, var.lower, var.upper);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
}

}  // namespace

Configuration anneal_propose(const SearchSpace& space, const Configuration& current,
                             double step_fraction, Rng& rng) {
  const int d = space.arity();
  Configuration proposal = current;
  for (int attempt = 0; attempt < 32; ++attempt) {
    proposal = current;
    const std::size_t dim = rng.index(static_cast<std::size_t>(d));
    const Variable& var = space.variables[dim];
    const double step = rng.uniform(-step_fraction * var.range(), step_fraction * var.range());
    proposal.values[dim] = snap_value(var, current.values[dim] + step);
    if (proposal != current) break;  // integer rounding can null a small move
  }
  return proposal;
}

double anneal_accept_probability(double delta, double temperature) {
  if (delta <= 0.0) return 1.0;
  if (temperature <= 0.0) return 0.0;
  return std::exp(-delta / temperature);
}

std::vector<Configuration> de_generation(const SearchSpace& space,
                                         std::span<const Configuration> population,
                                         const DeParams& params, Rng& rng) {
  const std::size_t np = population.size();
  if (np < 4) throw Error("de_generation: population must have at least 4 members");
  const std::size_t d = static_cast<std::size_t>(space.arity());
  std::vector<Configuration> trials;
  trials.reserve(np);
  for (std::size_t i = 0; i < np; ++i) {
    std::size_t a, b, c;
    do a = rng.index(np); while (a == i);
    do b = rng.index(np); while (b == i || b == a);
    do c = rng.index(np); while (c == i || c == a || c == b);
    const std::size_t jrand = rng.index(d);
    Configuration trial = population[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double u = rng.uniform();
      if (u < params.crossover || j == jrand) {
        const Variable& var = space.variables[j];
        const double mutant = population[a].values[j] +
                              params.weight * (population[b].values[j] - population[c].values[j]);
        trial.values[j] = snap_value(var, mutant);
      }
    }
    trials.push_back(std::move(trial));
  }
  return trials;
}

Optimizer::Optimizer(ProblemSpec problem, SearchSettings settings)
    : problem_(std::move(problem)),
      settings_(std::move(settings)),
      sa_rng_(seed_mix(settings_.seed, kSaTag)),
      de_rng_(seed_mix(settings_.seed, kDeTag)) {
  validate_space(problem_.space);
  if (settings_.budget < 1) throw Error("search: budget must be >= 1");
  if (settings_.patience < 1) throw Error("search: patience must be >= 1");
  if (settings_.epsilon < 0.0) throw Error("search: epsilon must be >= 0");
  if (!(settings_.acquisition.kappa > 0.0)) throw Error("search: kappa must be > 0");
  if (settings_.acquisition.xi < 0.0) throw Error("search: xi must be >= 0");
  if (settings_.acquisition.candidate_pool < 1)
    throw Error("search: candidate_pool must be >= 1");
  if (settings_.sampler.n_initial <= 0)
    settings_.sampler.n_initial = default_initial_design_size(problem_.space.arity());
  if (settings_.algorithm == Algorithm::kDifferentialEvolution) {
    if (settings_.evolution.population < 4)
      throw Error("search: differential evolution needs a population of at least 4");
    settings_.sampler.n_initial = settings_.evolution.population;
    de_values_.assign(static_cast<std::size_t>(settings_.evolution.population),
                      std::numeric_limits<double>::quiet_NaN());
    de_population_.resize(static_cast<std::size_t>(settings_.evolution.population));
  }
  temperature_ = settings_.annealing.initial_temperature;
  initial_design_ = sample(problem_.space, settings_.sampler);
}

std::vector<Configuration> Optimizer::pending_points() const {
  std::vector<Configuration> out;
  out.reserve(pending_.size());
  for (const PendingEntry& e : pending_) out.push_back(e.point);
  return out;
}

bool Optimizer::near_pending(const Configuration& point) const {
  for (const PendingEntry& entry : pending_) {
    double dist = 0.0;
    for (std::size_t j = 0; j < point.values.size(); ++j) {
      const Variable& var = problem_.space.variables[j];
      dist = std::max(dist, std::fabs(point.values[j] - entry.point.values[j]) / var.range());
    }
    if (dist < kDuplicateRadius) return true;
  }
  return false;
}

bool Optimizer::ask_time_feasible(const Configuration& point) const {
  static const std::map<std::string, double> kNoMetrics;
  for (const Constraint& c : problem_.constraints) {
    if (!expression_is_metric_free(c.expression, problem_.space)) continue;
    const double v = eval_expression(c.expression, problem_.space, point, kNoMetrics);
    const bool ok = c.kind == ConstraintKind::kInequality ? v <= 0.0 : std::fabs(v) <= c.tolerance;
    if (!ok) return false;
  }
  return true;
}

std::vector<Configuration> Optimizer::candidates_for_ask(int ask_ordinal) const {
  return random_candidates(
      problem_.space, settings_.acquisition.candidate_pool,
      seed_mix(seed_mix(settings_.seed, kCandidateTag, static_cast<std::uint64_t>(ask_ordinal)),
               0));
}

ConvergenceStatus Optimizer::converged() const {
  if (dataset_.size() >= static_cast<std::size_t>(settings_.budget))
    return {true, ConvergenceStatus::Reason::kBudget};
  if (no_improvement_ >= settings_.patience)
    return {true, ConvergenceStatus::Reason::kPatience};
  return {false, ConvergenceStatus::Reason::kNone};
}

std::optional<Configuration> Optimizer::ask() {
  if (converged().done) return std::nullopt;
  if (dataset_.size() + pending_.size() >= static_cast<std::size_t>(settings_.budget))
    return std::nullopt;

  std::optional<Proposal> proposal;
  switch (settings_.algorithm) {
    case Algorithm::kBoExtraTrees:
      proposal = ask_bo();
      break;
    case Algorithm::kSimulatedAnnealing:
      proposal = ask_sa();
      break;
    case Algorithm::kDifferentialEvolution:
      proposal = ask_de();
      break;
  }
  if (!proposal) return std::nullopt;
  ++ask_counter_;
  pending_.push_back({proposal->point, proposal->initial});
  return proposal->point;
}

void Optimizer::ensure_model() {
  if (model_ && model_->data.size() == dataset_.size()) return;
  model_ = fit_with_seed(dataset_, settings_.surrogate,
                         refit_seed(settings_.surrogate.seed, dataset_.size()));
}

std::optional<Optimizer::Proposal> Optimizer::ask_bo() {
  if (dataset_.size() + pending_.size() <
          static_cast<std::size_t>(settings_.sampler.n_initial) &&
      initial_cursor_ < initial_design_.size()) {
    return Proposal{initial_design_[initial_cursor_++], true};
  }

  const int ordinal = ask_counter_;
  if (dataset_.size() < 2) {
    // Too few completed rows to fit a forest; explore randomly.
    for (const Configuration& c : candidates_for_ask(ordinal))
      if (ask_time_feasible(c) && !near_pending(c)) return Proposal{c, false};
    return Proposal{candidates_for_ask(ordinal).front(), false};
  }

  ensure_model();
  const bool use_ei = settings_.acquisition.kind == AcquisitionKind::kExpectedImprovement;
  const double kappa = settings_.acquisition.kappa;
  const double xi = settings_.acquisition.xi;
  const double f_best = best_internal_;

  for (int round = 0; round < 17; ++round) {
    const bool last_round = round == 16;  // give up on duplicate suppression
    std::vector<Configuration> pool =
        round == 0 ? candidates_for_ask(ordinal)
                   : random_candidates(
                         problem_.space, settings_.acquisition.candidate_pool,
                         seed_mix(seed_mix(settings_.seed, kCandidateTag,
                                           static_cast<std::uint64_t>(ordinal)),
                                  static_cast<std::uint64_t>(round)));
    std::vector<Prediction> pred(pool.size());
    predict_batch(*model_, pool, pred);

    int best_idx = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!ask_time_feasible(pool[i])) continue;
      if (!last_round && near_pending(pool[i])) continue;
      double score;
      if (use_ei) {
        const double gap = f_best - pred[i].mean - xi;
        double ei;
        if (pred[i].spread > 0.0) {
          const double z = gap / pred[i].spread;
          ei = gap * normal_cdf(z) + pred[i].spread * normal_pdf(z);
        } else {
          ei = std::max(gap, 0.0);
        }
        score = -ei;
      } else {
        score = pred[i].mean - kappa * pred[i].spread;
      }
      if (score < best_score) {
        best_score = score;
        best_idx = static_cast<int>(i);
      }
    }
    if (best_idx >= 0) return Proposal{pool[static_cast<std::size_t>(best_idx)], false};
  }
  throw Error("ask: no feasible candidate found; constraints exclude the whole pool");
}

std::optional<Optimizer::Proposal> Optimizer::ask_sa() {
  if (!sa_current_) {
    if (initial_cursor_ == 0) {
      ++initial_cursor_;
      return Proposal{initial_design_.front(), true};
    }
    // The seed point is still in flight; branch off it.
    return Proposal{
        anneal_propose(problem_.space, initial_design_.front(),
                       settings_.annealing.step_fraction, sa_rng_),
        false};
  }
  return Proposal{anneal_propose(problem_.space, *sa_current_,
                                 settings_.annealing.step_fraction, sa_rng_),
                  false};
}

std::optional<Optimizer::Proposal> Optimizer::ask_de() {
  if (initial_cursor_ < initial_design_.size()) {
    const int member = static_cast<int>(initial_cursor_);
    Configuration point = initial_design_[initial_cursor_++];
    de_pending_.push_back({point, member, true});
    return Proposal{std::move(point), true};
  }
  if (de_queue_cursor_ >= de_queue_.size()) {
    if (!de_pending_.empty()) return std::nullopt;  // generation boundary
    for (double v : de_values_)
      if (std::isnan(v)) return std::nullopt;
    de_queue_ = {};
    de_queue_cursor_ = 0;
    std::vector<Configuration> trials =
        de_generation(problem_.space, de_population_, settings_.evolution, de_rng_);
    for (std::size_t i = 0; i < trials.size(); ++i)
      de_queue_.push_back({std::move(trials[i]), static_cast<int>(i), false});
  }
  DeTicket ticket = de_queue_[de_queue_cursor_++];
  de_pending_.push_back(ticket);
  return Proposal{ticket.point, false};
}

double Optimizer::penalty_value() const {
  if (dataset_.size() == 0) return 1e9;
  const auto [mn, mx] = std::minmax_element(dataset_.targets.begin(), dataset_.targets.end());
  double range = *mx - *mn;
  if (!(range > 0.0)) range = std::max(1.0, std::fabs(*mx));
  return *mx + 3.0 * range;
}

void Optimizer::record(const Configuration& point, double raw_value, bool failed) {
  auto it = std::find_if(pending_.begin(), pending_.end(),
                         [&](const PendingEntry& e) { return e.point == point; });
  if (it == pending_.end())
    throw Error("tell: configuration was never asked or was already told");
  const bool was_initial = it->initial;
  pending_.erase(it);
  if (was_initial) ++initial_told_;

  const double value = failed ? penalty_value() : internal(raw_value);
  dataset_.add(point, value);

  if (dataset_.size() == 1) {
    best_internal_ = value;
    best_ = {point, external(value), tell_counter_};
    no_improvement_ = 0;
  } else {
    const double improvement = best_internal_ - value;
    const double threshold =
        settings_.epsilon * std::max(std::fabs(best_internal_), 1e-12);
    if (improvement >= threshold) {
      no_improvement_ = 0;
    } else {
      ++no_improvement_;
    }
    if (value < best_internal_) {
      best_internal_ = value;
      best_ = {point, external(value), tell_counter_};
    }
  }
  ++tell_counter_;

  if (settings_.algorithm == Algorithm::kSimulatedAnnealing) {
    if (!sa_current_) {
      sa_current_ = point;
      sa_current_value_ = value;
    } else {
      const double delta = value - sa_current_value_;
      const double p = anneal_accept_probability(delta, temperature_);
      const bool accept = p >= 1.0 || sa_rng_.uniform() < p;
      if (accept) {
        sa_current_ = point;
        sa_current_value_ = value;
      }
      temperature_ *= settings_.annealing.cooling;
    }
  } else if (settings_.algorithm == Algorithm::kDifferentialEvolution) {
    auto ticket = std::find_if(de_pending_.begin(), de_pending_.end(),
                               [&](const DeTicket& t) { return t.point == point; });
    if (ticket != de_pending_.end()) {
      const std::size_t m = static_cast<std::size_t>(ticket->member);
      if (ticket->initial) {
        de_population_[m] = point;
        de_values_[m] = value;
      } else if (value <= de_values_[m]) {
        de_population_[m] = point;
        de_values_[m] = value;
      }
      de_pending_.erase(ticket);
    }
  }
}

void Optimizer::tell(const Configuration& point, double value) {
  if (!std::isfinite(value)) {
    record(point, 0.0, true);
  } else {
    record(point, value, false);
  }
}

void Optimizer::tell_failure(const Configuration& point) { record(point, 0.0, true); }

Json search_settings_to_json(const SearchSettings& s) {
  Json doc;
  switch (s.algorithm) {
    case Algorithm::kBoExtraTrees:
      doc["algorithm"] = "bo_extra_trees";
      break;
    case Algorithm::kSimulatedAnnealing:
      doc["algorithm"] = "simulated_annealing";
      break;
    case Algorithm::kDifferentialEvolution:
      doc["algorithm"] = "differential_evolution";
      break;
  }
  doc["budget"] = s.budget;
  doc["patience"] = s.patience;
  doc["epsilon"] = s.epsilon;
  doc["seed"] = s.seed;
  doc["sampler"] = {
      {"method", s.sampler.method == SampleMethod::kLatinHypercube ? "latin_hypercube" : "halton"},
      {"n_initial", s.sampler.n_initial},
      {"seed", s.sampler.seed}};
  doc["acquisition"] = {{"kind", s.acquisition.kind == AcquisitionKind::kLowerConfidenceBound
                                     ? "lower_confidence_bound"
                                     : "expected_improvement"},
                        {"kappa", s.acquisition.kappa},
                        {"xi", s.acquisition.xi},
                        {"candidate_pool", s.acquisition.candidate_pool}};
  doc["surrogate"] = {{"n_trees", s.surrogate.n_trees},
                      {"min_samples_split", s.surrogate.min_samples_split},
                      {"max_features", s.surrogate.max_features},
                      {"splits_per_feature", s.surrogate.splits_per_feature},
                      {"seed", s.surrogate.seed}};
  doc["annealing"] = {{"initial_temperature", s.annealing.initial_temperature},
                      {"cooling", s.annealing.cooling},
                      {"step_fraction", s.annealing.step_fraction}};
  doc["evolution"] = {{"population", s.evolution.population},
                      {"weight", s.evolution.weight},
                      {"crossover", s.evolution.crossover}};
  return doc;
}

SearchSettings parse_search_settings(const Json& node, const SearchSpace& space,
                                     const std::string& where) {
  expect_keys(node,
              {"algorithm", "budget", "patience", "epsilon", "seed", "sampler", "acquisition",
               "surrogate", "annealing", "evolution"},
              where);
  SearchSettings s;
  const std::string algorithm = get_string(node, "algorithm", "bo_extra_trees", where);
  if (algorithm == "bo_extra_trees") {
    s.algorithm = Algorithm::kBoExtraTrees;
  } else if (algorithm == "simulated_annealing") {
    s.algorithm = Algorithm::kSimulatedAnnealing;
  } else if (algorithm == "differential_evolution") {
    s.algorithm = Algorithm::kDifferentialEvolution;
  } else {
    throw Error(where + "/algorithm: unknown algorithm '" + algorithm + "'");
  }
  s.budget = static_cast<int>(get_integer(node, "budget", s.budget, where));
  s.patience = static_cast<int>(get_integer(node, "patience", s.patience, where));
  s.epsilon = get_number(node, "epsilon", s.epsilon, where);
  s.seed = node.contains("seed") ? node.at("seed").get<std::uint64_t>() : 0;

  s.sampler.n_initial = default_initial_design_size(space.arity());
  s.sampler.seed = seed_mix(s.seed, kSamplerTag);
  if (node.contains("sampler")) {
    const Json& sampler = node.at("sampler");
    const std::string sw = where + "/sampler";
    expect_keys(sampler, {"method", "n_initial", "seed"}, sw);
    const std::string method = get_string(sampler, "method", "latin_hypercube", sw);
    if (method == "latin_hypercube") {
      s.sampler.method = SampleMethod::kLatinHypercube;
    } else if (method == "halton") {
      s.sampler.method = SampleMethod::kHalton;
    } else {
      throw Error(sw + "/method: unknown sampling method '" + method + "'");
    }
    s.sampler.n_initial =
        static_cast<int>(get_integer(sampler, "n_initial", s.sampler.n_initial, sw));
    if (s.sampler.n_initial < 1) throw Error(sw + "/n_initial: must be >= 1");
    if (sampler.contains("seed")) s.sampler.seed = sampler.at("seed").get<std::uint64_t>();
  }

  s.surrogate.max_features = space.arity();
  s.surrogate.seed = seed_mix(s.seed, kSurrogateTag);
  if (node.contains("surrogate")) {
    const Json& sur = node.at("surrogate");
    const std::string sw = where + "/surrogate";
    expect_keys(sur, {"n_trees", "min_samples_split", "max_features", "splits_per_feature", "seed"},
                sw);
    s.surrogate.n_trees = static_cast<int>(get_integer(sur, "n_trees", s.surrogate.n_trees, sw));
    s.surrogate.min_samples_split = static_cast<int>(
        get_integer(sur, "min_samples_split", s.surrogate.min_samples_split, sw));
    s.surrogate.max_features =
        static_cast<int>(get_integer(sur, "max_features", s.surrogate.max_features, sw));
    s.surrogate.splits_per_feature = static_cast<int>(
        get_integer(sur, "splits_per_feature", s.surrogate.splits_per_feature, sw));
    if (sur.contains("seed")) s.surrogate.seed = sur.at("seed").get<std::uint64_t>();
    if (s.surrogate.max_features < 1 || s.surrogate.max_features > space.arity())
      throw Error(sw + "/max_features: must be in [1, " + std::to_string(space.arity()) + "]");
  }

  if (node.contains("acquisition")) {
    const Json& acq = node.at("acquisition");
    const std::string aw = where + "/acquisition";
    expect_keys(acq, {"kind", "kappa", "xi", "candidate_pool"}, aw);
    const std::string kind = get_string(acq, "kind", "lower_confidence_bound", aw);
    if (kind == "lower_confidence_bound") {
      s.acquisition.kind = AcquisitionKind::kLowerConfidenceBound;
    } else if (kind == "expected_improvement") {
      s.acquisition.kind = AcquisitionKind::kExpectedImprovement;
    } else {
      throw Error(aw + "/kind: unknown acquisition '" + kind + "'");
    }
    s.acquisition.kappa = get_number(acq, "kappa", s.acquisition.kappa, aw);
    s.acquisition.xi = get_number(acq, "xi", s.acquisition.xi, aw);
    s.acquisition.candidate_pool =
        static_cast<int>(get_integer(acq, "candidate_pool", s.acquisition.candidate_pool, aw));
  }

  if (node.contains("annealing")) {
    const Json& ann = node.at("annealing");
    const std::string aw = where + "/annealing";
    expect_keys(ann, {"initial_temperature", "cooling", "step_fraction"}, aw);
    s.annealing.initial_temperature =
        get_number(ann, "initial_temperature", s.annealing.initial_temperature, aw);
    s.annealing.cooling = get_number(ann, "cooling", s.annealing.cooling, aw);
    s.annealing.step_fraction = get_number(ann, "step_fraction", s.annealing.step_fraction, aw);
  }

  if (node.contains("evolution")) {
    const Json& evo = node.at("evolution");
    const std::string ew = where + "/evolution";
    expect_keys(evo, {"population", "weight", "crossover"}, ew);
    s.evolution.population =
        static_cast<int>(get_integer(evo, "population", s.evolution.population, ew));
    s.evolution.weight = get_number(evo, "weight", s.evolution.weight, ew);
    s.evolution.crossover = get_number(evo, "crossover", s.evolution.crossover, ew);
  }
  return s;
}

}  // namespace contune
