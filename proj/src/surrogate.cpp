#include "contune/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "contune/error.hpp"
#include "contune/rng.hpp"

namespace contune {

void Dataset::add(Configuration point, double target) {
  if (!points.empty() && point.values.size() != points.front().values.size())
    throw Error("dataset: mixed configuration arity");
  points.push_back(std::move(point));
  targets.push_back(target);
}

std::uint64_t dataset_content_seed(const Dataset& data) {
  std::vector<std::uint64_t> row_hashes;
  row_hashes.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (double v : data.points[i].values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h = seed_mix(h, bits);
    }
    std::uint64_t tbits;
    std::memcpy(&tbits, &data.targets[i], sizeof tbits);
    row_hashes.push_back(seed_mix(h, tbits));
  }
  std::sort(row_hashes.begin(), row_hashes.end());
  std::uint64_t seed = 0x452821e638d01377ULL;
  for (std::uint64_t h : row_hashes) seed = seed_mix(seed, h);
  return seed;
}

double Tree::predict(std::span<const double> x) const {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

struct TreeBuilder {
  const Dataset& data;
  const EnsembleParams& params;
  int max_features;
  Rng rng;
  Tree tree;

  double target_sum(std::span<const int> rows) const {
    double s = 0.0;
    for (int r : rows) s += data.targets[static_cast<std::size_t>(r)];
    return s;
  }

  double target_sse(std::span<const int> rows) const {
    double s = 0.0, s2 = 0.0;
    for (int r : rows) {
      double y = data.targets[static_cast<std::size_t>(r)];
      s += y;
      s2 += y * y;
    }
    return s2 - s * s / static_cast<double>(rows.size());
  }

  bool targets_constant(std::span<const int> rows) const {
    double first = data.targets[static_cast<std::size_t>(rows.front())];
    for (int r : rows)
      if (data.targets[static_cast<std::size_t>(r)] != first) return false;
    return true;
  }

  int make_leaf(std::span<const int> rows) {
    TreeNode node;
    node.value = target_sum(rows) / static_cast<double>(rows.size());
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  int build(std::vector<int>& rows) {
    if (static_cast<int>(rows.size()) < params.min_samples_split || targets_constant(rows))
      return make_leaf(rows);

    const int d = data.arity();
    std::vector<int> features(static_cast<std::size_t>(d));
    std::iota(features.begin(), features.end(), 0);
    // Partial Fisher-Yates: the first max_features entries are the draw.
    for (int k = 0; k < max_features; ++k) {
      std::size_t j = static_cast<std::size_t>(k) +
                      rng.index(static_cast<std::size_t>(d - k));
      std::swap(features[static_cast<std::size_t>(k)], features[j]);
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<int> side_buf;  // reused partition scratch

    for (int k = 0; k < max_features; ++k) {
      const int f = features[static_cast<std::size_t>(k)];
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (int r : rows) {
        double v = data.points[static_cast<std::size_t>(r)].values[static_cast<std::size_t>(f)];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      for (int s = 0; s < params.splits_per_feature; ++s) {
        const double u = rng.uniform();
        if (lo >= hi) continue;  // constant feature in this node, draw consumed
        const double threshold = lo + u * (hi - lo);
        if (!(threshold > lo && threshold < hi)) continue;  // degenerate rounding
        double ls = 0.0, ls2 = 0.0, rs = 0.0, rs2 = 0.0;
        int ln = 0, rn = 0;
        for (int r : rows) {
          const double v =
              data.points[static_cast<std::size_t>(r)].values[static_cast<std::size_t>(f)];
          const double y = data.targets[static_cast<std::size_t>(r)];
          if (v < threshold) {
            ls += y;
            ls2 += y * y;
            ++ln;
          } else {
            rs += y;
            rs2 += y * y;
            ++rn;
          }
        }
        const double score = (ls2 - ls * ls / ln) + (rs2 - rs * rs / rn);
        if (score < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = threshold;
        }
      }
    }

    if (best_feature < 0) return make_leaf(rows);  // every candidate degenerate

    std::vector<int> left, right;
    for (int r : rows) {
      const double v = data.points[static_cast<std::size_t>(r)]
                           .values[static_cast<std::size_t>(best_feature)];
      (v < best_threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    TreeNode node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    tree.nodes.push_back(node);
    const int index = static_cast<int>(tree.nodes.size()) - 1;
    tree.nodes[static_cast<std::size_t>(index)].left = build(left);
    tree.nodes[static_cast<std::size_t>(index)].right = build(right);
    return index;
  }
};

Tree build_tree(const Dataset& data, const EnsembleParams& params, int max_features,
                std::uint64_t tree_seed) {
  TreeBuilder builder{data, params, max_features, Rng(tree_seed), {}};
  std::vector<int> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  builder.build(rows);
  return std::move(builder.tree);
}

EnsembleModel fit_impl(const Dataset& data, EnsembleParams params, std::uint64_t effective_seed,
                       bool parallel) {
  if (data.size() < 2) throw Error("fit: need at least 2 rows, got " + std::to_string(data.size()));
  for (double y : data.targets)
    if (!std::isfinite(y)) throw Error("fit: non-finite target value");
  if (params.n_trees < 1) throw Error("fit: n_trees must be >= 1");
  if (params.min_samples_split < 2) throw Error("fit: min_samples_split must be >= 2");
  if (params.splits_per_feature < 1) throw Error("fit: splits_per_feature must be >= 1");

  const int d = data.arity();
  const int max_features = params.max_features > 0 ? params.max_features : d;
  if (max_features > d) throw Error("fit: max_features exceeds dataset arity");

  EnsembleModel model;
  model.params = params;
  model.effective_seed = effective_seed;
  model.arity = d;
  model.data = data;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));

  // Per-tree seeds are fixed up front, so thread scheduling cannot change
  // the result and the parallel build matches the serial one exactly.
  std::vector<std::uint64_t> tree_seeds(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t)
    tree_seeds[static_cast<std::size_t>(t)] =
        seed_mix(effective_seed, 0x7265657321ULL, static_cast<std::uint64_t>(t));

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < params.n_trees; ++t)
      model.trees[static_cast<std::size_t>(t)] =
          build_tree(data, params, max_features, tree_seeds[static_cast<std::size_t>(t)]);
  } else {
    for (int t = 0; t < params.n_trees; ++t)
      model.trees[static_cast<std::size_t>(t)] =
          build_tree(data, params, max_features, tree_seeds[static_cast<std::size_t>(t)]);
  }
  return model;
}

}  // namespace

EnsembleModel fit(const Dataset& data, EnsembleParams params) {
  return fit_impl(data, params, params.seed, true);
}

EnsembleModel fit_serial(const Dataset& data, EnsembleParams params) {
  return fit_impl(data, params, params.seed, false);
}

std::uint64_t refit_seed(std::uint64_t base_seed, std::size_t n_rows) {
  return seed_mix(base_seed, 0x726566697421ULL, n_rows);
}

EnsembleModel fit_with_seed(const Dataset& data, EnsembleParams params,
                            std::uint64_t effective_seed) {
  return fit_impl(data, params, effective_seed, true);
}

EnsembleModel refit(const EnsembleModel& model, const Dataset& new_rows) {
  Dataset combined = model.data;
  for (std::size_t i = 0; i < new_rows.size(); ++i)
    combined.add(new_rows.points[i], new_rows.targets[i]);
  return fit_impl(combined, model.params, refit_seed(model.params.seed, combined.size()), true);
}

Prediction EnsembleModel::predict(const Configuration& point) const {
  if (static_cast<int>(point.values.size()) != arity)
    throw Error("predict: configuration arity " + std::to_string(point.values.size()) +
                " does not match model arity " + std::to_string(arity));
  double sum = 0.0, sum_sq = 0.0;
  for (const Tree& tree : trees) {
    const double p = tree.predict(point.values);
    sum += p;
    sum_sq += p * p;
  }
  const double n = static_cast<double>(trees.size());
  Prediction out;
  out.mean = sum / n;
  if (trees.size() > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    out.spread = std::sqrt(var);
  }
  return out;
}

void predict_batch(const EnsembleModel& model, std::span<const Configuration> points,
                   std::span<Prediction> out) {
  if (points.size() != out.size()) throw Error("predict_batch: output span size mismatch");
  const std::int64_t n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = model.predict(points[static_cast<std::size_t>(i)]);
}

double training_mse(const EnsembleModel& model) {
  double sse = 0.0;
  for (std::size_t i = 0; i < model.data.size(); ++i) {
    const double err = model.predict(model.data.points[i]).mean - model.data.targets[i];
    sse += err * err;
  }
  return sse / static_cast<double>(model.data.size());
}

Json model_to_json(const EnsembleModel& model) {
  Json doc;
  doc["schema_version"] = 1;
  doc["params"] = {{"n_trees", model.params.n_trees},
                   {"min_samples_split", model.params.min_samples_split},
                   {"max_features", model.params.max_features},
                   {"splits_per_feature", model.params.splits_per_feature},
                   {"seed", model.params.seed}};
  doc["effective_seed"] = model.effective_seed;
  doc["arity"] = model.arity;
  Json trees = Json::array();
  for (const Tree& tree : model.trees) {
    Json nodes = Json::array();
    for (const TreeNode& n : tree.nodes) {
      if (n.is_leaf()) {
        nodes.push_back(Json{{"value", n.value}});
      } else {
        nodes.push_back(Json{{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  Json rows = Json::array();
  for (std::size_t i = 0; i < model.data.size(); ++i) {
    Json row;
    row["x"] = model.data.points[i].values;
    row["y"] = model.data.targets[i];
    rows.push_back(std::move(row));
  }
  doc["data"] = std::move(rows);
  return doc;
}

EnsembleModel model_from_json(const Json& doc) {
  expect_keys(doc, {"schema_version", "params", "effective_seed", "arity", "trees", "data"},
              "checkpoint");
  if (require_integer(doc, "schema_version", "checkpoint") != 1)
    throw Error("checkpoint: unsupported schema_version");
  EnsembleModel model;
  const Json& params = require_field(doc, "params", "checkpoint");
  model.params.n_trees = static_cast<int>(require_integer(params, "n_trees", "checkpoint/params"));
  model.params.min_samples_split =
      static_cast<int>(require_integer(params, "min_samples_split", "checkpoint/params"));
  model.params.max_features =
      static_cast<int>(require_integer(params, "max_features", "checkpoint/params"));
  model.params.splits_per_feature =
      static_cast<int>(require_integer(params, "splits_per_feature", "checkpoint/params"));
  model.params.seed = params.at("seed").get<std::uint64_t>();
  model.effective_seed = doc.at("effective_seed").get<std::uint64_t>();
  model.arity = static_cast<int>(require_integer(doc, "arity", "checkpoint"));
  for (const Json& tree_doc : require_field(doc, "trees", "checkpoint")) {
    Tree tree;
    for (const Json& node_doc : tree_doc) {
      TreeNode node;
      if (node_doc.contains("value")) {
        node.value = node_doc.at("value").get<double>();
      } else {
        node.feature = node_doc.at("feature").get<int>();
        node.threshold = node_doc.at("threshold").get<double>();
        node.left = node_doc.at("left").get<int>();
        node.right = node_doc.at("right").get<int>();
      }
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  for (const Json& row : require_field(doc, "data", "checkpoint")) {
    Configuration point;
    point.values = row.at("x").get<std::vector<double>>();
    model.data.add(std::move(point), row.at("y").get<double>());
  }
  return model;
}

}  // namespace contune
