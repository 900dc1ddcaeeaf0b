#include "contune/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "contune/error.hpp"
#include "contune/rng.hpp"

namespace contune {

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                           53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};

double snap(const Variable& var, double value) {
  if (var.kind == VarKind::kInteger) value = std::round(value);  // ties away from zero
  return std::clamp(value, var.lower, var.upper);
}

}  // namespace

int default_initial_design_size(int arity) { return std::max(5, 2 * arity); }

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inverse = 0.0;
  double digit_weight = 1.0 / static_cast<double>(base);
  while (index > 0) {
    inverse += static_cast<double>(index % base) * digit_weight;
    index /= base;
    digit_weight /= static_cast<double>(base);
  }
  return inverse;
}

std::vector<Configuration> sample(const SearchSpace& space, const SamplerSpec& spec) {
  validate_space(space);
  const int n = spec.n_initial > 0 ? spec.n_initial : default_initial_design_size(space.arity());
  const int d = space.arity();
  if (d > static_cast<int>(std::size(kPrimes)))
    throw Error("halton sampling supports at most " + std::to_string(std::size(kPrimes)) +
                " dimensions");

  std::vector<Configuration> points(static_cast<std::size_t>(n));
  for (auto& p : points) p.values.resize(static_cast<std::size_t>(d));

  if (spec.method == SampleMethod::kLatinHypercube) {
    Rng rng(spec.seed);
    std::vector<int> strata(static_cast<std::size_t>(n));
    for (int j = 0; j < d; ++j) {
      const Variable& var = space.variables[static_cast<std::size_t>(j)];
      std::iota(strata.begin(), strata.end(), 0);
      rng.shuffle(strata);
      const double width = var.range() / n;
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const double raw = var.lower + (strata[static_cast<std::size_t>(i)] + u) * width;
        points[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(j)] = snap(var, raw);
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        const Variable& var = space.variables[static_cast<std::size_t>(j)];
        const double u = radical_inverse(static_cast<std::uint64_t>(i) + 1,
                                         static_cast<std::uint64_t>(kPrimes[j]));
        points[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(j)] =
            snap(var, var.lower + u * var.range());
      }
    }
  }
  return points;
}

std::vector<Configuration> random_candidates(const SearchSpace& space, int n,
                                             std::uint64_t seed) {
  validate_space(space);
  if (n < 1) throw Error("random_candidates: n must be >= 1, got " + std::to_string(n));
  Rng rng(seed);
  std::vector<Configuration> points(static_cast<std::size_t>(n));
  for (auto& point : points) {
    point.values.resize(static_cast<std::size_t>(space.arity()));
    for (std::size_t j = 0; j < point.values.size(); ++j) {
      const Variable& var = space.variables[j];
      point.values[j] = var.kind == VarKind::kInteger
                            ? static_cast<double>(rng.uniform_int(
                                  static_cast<std::int64_t>(var.lower),
                                  static_cast<std::int64_t>(var.upper)))
                            : rng.uniform(var.lower, var.upper);
    }
  }
  return points;
}

}  // namespace contune
