#pragma once

// DTLZ1-7 and convex DTLZ2 with box [0,1]^n, plus ideal/nadir lookup.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include "stopbench/core.hpp"

namespace stopbench {

enum class ProblemId { dtlz1, dtlz2, dtlz3, dtlz4, dtlz5, dtlz6, dtlz7, cdtlz2 };

std::string_view to_string(ProblemId id);
ProblemId parse_problem_id(std::string_view s);

struct ProblemSpec {
  ProblemId id = ProblemId::dtlz2;
  std::size_t m = 2;
  std::size_t n = 11;

  void validate() const;
};

/// Distance-variable count k used when n is not given explicitly.
std::size_t default_k(ProblemId id);

/// Builds a spec with n = m + k - 1 and the default k.
ProblemSpec make_problem(ProblemId id, std::size_t m);
ProblemSpec make_problem(ProblemId id, std::size_t m, std::size_t n);

ObjectiveVector evaluate(const ProblemSpec& spec, std::span<const double> x);

/// Value each distance variable takes on the Pareto-optimal set.
double optimal_distance_value(ProblemId id);

/// Evaluates the Pareto-optimal point whose first m-1 (position) variables
/// are `position`; the remaining variables take their optimal value.
ObjectiveVector front_point(const ProblemSpec& spec,
                            std::span<const double> position);

/// Ideal/nadir pairs keyed by (problem, m), loaded from a
/// `problem_id,m,ideal...,nadir...` text file.
class BoundsTable {
 public:
  BoundsTable() = default;

  static BoundsTable load(const std::filesystem::path& path);

  /// Table shipped with the library. $STOPBENCH_BOUNDS overrides the path.
  static const BoundsTable& shipped();

  std::optional<NormalizationBounds> find(ProblemId id, std::size_t m) const;
  void insert(ProblemId id, std::size_t m, NormalizationBounds b);
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<ProblemId, std::size_t>, NormalizationBounds> entries_;
};

/// Closed-form bounds for DTLZ1-4; sampled data for everything else.
NormalizationBounds reference_bounds(const ProblemSpec& spec);
NormalizationBounds reference_bounds(const ProblemSpec& spec,
                                     const BoundsTable& table);

}  // namespace stopbench
