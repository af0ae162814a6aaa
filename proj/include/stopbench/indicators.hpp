#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stopbench/core.hpp"

namespace stopbench {

struct HvConfig {
  /// Reference point in the space the points are measured in (normalized
  /// space when `bounds` is set).
  ObjectiveVector reference_point;
  /// When set, points are normalized with these bounds before measuring.
  std::optional<NormalizationBounds> bounds;

  /// Reference point (1.1, ..., 1.1) over [0,1]-normalized objectives.
  static HvConfig normalized(NormalizationBounds b);
  /// Raw-space measurement against an explicit reference point.
  static HvConfig raw(ObjectiveVector reference);
};

/// Per-iteration values, index 0 holding iteration 1.
using IndicatorSeries = std::vector<double>;

/// Exact hypervolume of the region weakly dominated by `points` and bounded
/// by the reference point. Points that do not strictly dominate the
/// reference point contribute nothing.
double hypervolume(std::span<const ObjectiveVector> points, const HvConfig& cfg);

/// Exact hypervolume of already-prepared points against `reference`; the
/// two-objective case uses an O(n log n) sweep.
double hypervolume_exact(std::span<const ObjectiveVector> points,
                         std::span<const double> reference);

/// Reference recursion that never takes the two-objective shortcut; kept
/// for cross-checking the sweep.
double hypervolume_recursive(std::span<const ObjectiveVector> points,
                             std::span<const double> reference);

IndicatorSeries hv_series(const RunTrace& trace, const HvConfig& cfg);

/// Running maximum of hv_series.
IndicatorSeries best_so_far(const IndicatorSeries& per_iteration);
IndicatorSeries best_so_far_hv(const RunTrace& trace, const HvConfig& cfg);

/// max over r in R of min over a in A of max_i (a_i - r_i).
double additive_epsilon(std::span<const ObjectiveVector> a,
                        std::span<const ObjectiveVector> r);

/// All weight vectors with components k/H summing to one.
std::vector<ObjectiveVector> simplex_lattice(std::size_t m, std::size_t divisions);

/// Divisions H whose lattice size C(H+m-1, m-1) is closest to `target`.
std::size_t lattice_divisions_for(std::size_t m, std::size_t target);

/// Mean over weights of min over a in A of the weighted Tchebycheff
/// distance max_i w_i |a_i - z_i|, with utopian point z = origin.
double r2(std::span<const ObjectiveVector> a,
          std::span<const ObjectiveVector> weights);

}  // namespace stopbench
