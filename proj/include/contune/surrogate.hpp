#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "contune/jsonio.hpp"
#include "contune/problem.hpp"

namespace contune {

struct Dataset {
  std::vector<Configuration> points;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  int arity() const { return points.empty() ? 0 : static_cast<int>(points.front().values.size()); }
  void add(Configuration point, double target);
  bool operator==(const Dataset&) const = default;
};

/// Order-independent content hash, for seeding a fit from the data itself.
std::uint64_t dataset_content_seed(const Dataset& data);

struct EnsembleParams {
  int n_trees = 100;
  int min_samples_split = 2;
  int max_features = 0;  // 0 resolves to the dataset arity at fit time
  int splits_per_feature = 1;
  std::uint64_t seed = 0;
  bool operator==(const EnsembleParams&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf mean
  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(std::span<const double> x) const;
  bool operator==(const Tree&) const = default;
};

struct Prediction {
  double mean = 0.0;
  double spread = 0.0;  // sample std across trees, 0 for a single tree
};

struct EnsembleModel {
  EnsembleParams params;        // base parameters (seed is the base seed)
  std::uint64_t effective_seed = 0;  // seed the forest was actually built with
  int arity = 0;
  std::vector<Tree> trees;
  Dataset data;                 // training rows, kept for refits

  Prediction predict(const Configuration& point) const;
  bool operator==(const EnsembleModel&) const = default;
};

/// Builds n_trees extremely randomized trees: at each node a random feature
/// subset and random thresholds are drawn and the split with the smallest
/// weighted child variance wins. No bootstrapping; each tree sees every row.
/// Trees are built in parallel when OpenMP is enabled; per-tree seeds are
/// derived up front so the result is identical to fit_serial.
EnsembleModel fit(const Dataset& data, EnsembleParams params);

/// Sequential reference implementation with identical output.
EnsembleModel fit_serial(const Dataset& data, EnsembleParams params);

/// Seed a rebuild is performed with: derived from (base seed, row count).
std::uint64_t refit_seed(std::uint64_t base_seed, std::size_t n_rows);

/// Builds the forest with an explicit effective seed while keeping
/// params.seed as the recorded base seed.
EnsembleModel fit_with_seed(const Dataset& data, EnsembleParams params,
                            std::uint64_t effective_seed);

/// Full rebuild on the concatenated dataset with a seed derived from
/// (base seed, total row count).
EnsembleModel refit(const EnsembleModel& model, const Dataset& new_rows);

void predict_batch(const EnsembleModel& model, std::span<const Configuration> points,
                   std::span<Prediction> out);

double training_mse(const EnsembleModel& model);

Json model_to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const Json& doc);

}  // namespace contune
