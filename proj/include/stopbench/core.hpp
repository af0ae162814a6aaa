#pragma once

// Shared data model: objective vectors, run traces, dominance and
// normalization. Everything here minimizes.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stopbench/error.hpp"

namespace stopbench {

using ObjectiveVector = std::vector<double>;
using Iteration = std::size_t;
using EvalCount = std::uint64_t;

/// How real numbers are written into trace files.
enum class Encoding { text, base64 };

std::string_view to_string(Encoding e);
Encoding parse_encoding(std::string_view s);

struct RunMeta {
  std::size_t m = 2;
  std::size_t mu = 2;
  std::size_t lambda = 1;
  std::size_t t_max = 1;
  std::string problem_id;
  std::string algorithm_id;
  std::uint64_t seed = 0;
  Encoding encoding = Encoding::text;

  /// mu + lambda * (t_max - 1): number of individuals the run evaluated.
  EvalCount fe_max() const;
  void validate() const;

  friend bool operator==(const RunMeta&, const RunMeta&) = default;
};

struct PopulationSnapshot {
  Iteration iteration = 1;
  std::vector<ObjectiveVector> members;
};

/// One optimizer run: every evaluated objective vector once, in evaluation
/// order, plus the 1-based ids of the population at each iteration.
struct RunTrace {
  RunMeta meta;
  std::vector<ObjectiveVector> all_points;
  std::vector<std::vector<std::uint32_t>> memberships;

  /// Throws InputError describing the first violated structural invariant.
  void validate() const;

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

struct NormalizationBounds {
  ObjectiveVector ideal;
  ObjectiveVector nadir;

  void validate() const;
};

bool dominates(std::span<const double> a, std::span<const double> b);
bool weakly_dominates(std::span<const double> a, std::span<const double> b);

/// Members not dominated by any other member. Equal vectors are reported
/// once. The result is in lexicographic order.
std::vector<ObjectiveVector> nondominated_subset(
    std::span<const ObjectiveVector> points);

/// Affine map of ideal to 0 and nadir to 1. Not clipped.
ObjectiveVector normalize(std::span<const double> p,
                          const NormalizationBounds& b);
ObjectiveVector denormalize(std::span<const double> p,
                            const NormalizationBounds& b);
std::vector<ObjectiveVector> normalize_all(
    std::span<const ObjectiveVector> points, const NormalizationBounds& b);

EvalCount fe_of_iteration(const RunMeta& meta, Iteration t);

}  // namespace stopbench
