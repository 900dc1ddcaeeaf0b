#pragma once

#include <cstdint>
#include <vector>

#include "contune/problem.hpp"

namespace contune {

enum class SampleMethod { kLatinHypercube, kHalton };

struct SamplerSpec {
  SampleMethod method = SampleMethod::kLatinHypercube;
  int n_initial = 0;  // <= 0 resolves to max(5, 2 * arity)
  std::uint64_t seed = 0;
  bool operator==(const SamplerSpec&) const = default;
};

int default_initial_design_size(int arity);

/// Space-filling design of spec.n_initial points. Latin hypercube puts exactly
/// one point in each of the n equal-width strata per dimension (before integer
/// rounding); Halton uses radical-inverse sequences with the first d primes.
/// Integer variables are rounded to nearest, ties away from zero.
std::vector<Configuration> sample(const SearchSpace& space, const SamplerSpec& spec);

/// Independent uniform draws within bounds; integer dimensions are uniform
/// over {lower..upper}. Deterministic for a given seed.
std::vector<Configuration> random_candidates(const SearchSpace& space, int n,
                                             std::uint64_t seed);

/// Radical inverse of index i (1-based) in the given base; in (0, 1).
double radical_inverse(std::uint64_t index, std::uint64_t base);

}  // namespace contune
