#pragma once

#include <span>
#include <vector>

#include "stopbench/core.hpp"
#include "stopbench/indicators.hpp"

namespace stopbench {

struct PoseParams {
  double alpha = 2.0;
  double delta = 0.0;
  EvalCount fe_max = 1;

  void validate() const;
  friend bool operator==(const PoseParams&, const PoseParams&) = default;
};

struct PoseResult {
  EvalCount fe_star = 0;
  EvalCount fe_stop = 0;
  double value = 0.0;
  PoseParams params;
};

/// FE of the last iteration whose best-so-far HV gain exceeds `delta`, or
/// mu when the initial population is never improved on.
EvalCount fe_star(const IndicatorSeries& bhv, const RunMeta& meta, double delta);

/// |FE* - FEstop| / FEmax, scaled by alpha when the stop comes early.
double pose(EvalCount fe_star, EvalCount fe_stop, const PoseParams& params);

PoseResult score(EvalCount fe_star, EvalCount fe_stop, const PoseParams& params);

/// ranks[c][p]: rank of criterion c among all criteria on problem p, in
/// ascending order of average POSE. Tied values share the mean of their
/// ranks. Throws InputError on a missing (NaN or absent) cell.
std::vector<std::vector<double>> problem_ranks(
    const std::vector<std::vector<double>>& table);

/// Row-major table: table[c][p] is the average POSE of criterion c on
/// problem p. Returns each criterion's mean rank (1 = best, ties get the
/// mean of the tied ranks).
std::vector<double> average_ranks(const std::vector<std::vector<double>>& table);

/// Throws ConfigError unless every entry carries the same (alpha, delta).
void require_single_setting(std::span<const PoseParams> params);

}  // namespace stopbench
