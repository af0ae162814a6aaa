#include "stopbench/pose.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stopbench {

void PoseParams::validate() const {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be a finite value >= 1");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ConfigError("delta must be a finite value >= 0");
  }
  if (fe_max == 0) throw ConfigError("fe_max must be > 0");
}

EvalCount fe_star(const IndicatorSeries& bhv, const RunMeta& meta, double delta) {
  if (bhv.size() != meta.t_max) {
    throw InputError("best-so-far series has " + std::to_string(bhv.size()) +
                     " values, expected t_max = " + std::to_string(meta.t_max));
  }
  if (!(delta >= 0.0)) throw InputError("delta must be >= 0");
  Iteration last = 1;
  for (std::size_t i = 1; i < bhv.size(); ++i) {
    const double gain = bhv[i] - bhv[i - 1];
    if (gain < 0.0) {
      throw InputError("best-so-far series decreases at iteration " +
                       std::to_string(i + 1));
    }
    if (gain > delta) last = i + 1;
  }
  return fe_of_iteration(meta, last);
}

double pose(EvalCount fe_star, EvalCount fe_stop, const PoseParams& params) {
  params.validate();
  if (fe_star == 0 || fe_star > params.fe_max) {
    throw InputError("FE* outside (0, fe_max]");
  }
  if (fe_stop == 0 || fe_stop > params.fe_max) {
    throw InputError("FEstop outside (0, fe_max]");
  }
  const double fe_max = static_cast<double>(params.fe_max);
  if (fe_stop >= fe_star) {
    return static_cast<double>(fe_stop - fe_star) / fe_max;
  }
  return params.alpha * static_cast<double>(fe_star - fe_stop) / fe_max;
}

PoseResult score(EvalCount fe_star, EvalCount fe_stop, const PoseParams& params) {
  return {fe_star, fe_stop, pose(fe_star, fe_stop, params), params};
}

std::vector<std::vector<double>> problem_ranks(
    const std::vector<std::vector<double>>& table) {
  if (table.empty()) throw InputError("rank table has no criteria");
  const std::size_t problems = table.front().size();
  if (problems == 0) throw InputError("rank table has no problems");
  for (const auto& row : table) {
    if (row.size() != problems) throw InputError("rank table has a missing cell");
    for (double v : row) {
      if (std::isnan(v)) throw InputError("rank table has a missing cell");
    }
  }

  const std::size_t k = table.size();
  std::vector<std::vector<double>> ranks(k, std::vector<double>(problems));
  std::vector<std::size_t> order(k);
  for (std::size_t p = 0; p < problems; ++p) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return table[a][p] < table[b][p];
    });
    for (std::size_t i = 0; i < k;) {
      std::size_t j = i;
      while (j + 1 < k && table[order[j + 1]][p] == table[order[i]][p]) ++j;
      const double mid = static_cast<double>(i + j + 2) / 2.0;
      for (std::size_t r = i; r <= j; ++r) ranks[order[r]][p] = mid;
      i = j + 1;
    }
  }
  return ranks;
}

std::vector<double> average_ranks(const std::vector<std::vector<double>>& table) {
  const auto ranks = problem_ranks(table);
  std::vector<double> out;
  out.reserve(ranks.size());
  for (const auto& row : ranks) {
    out.push_back(std::accumulate(row.begin(), row.end(), 0.0) /
                  static_cast<double>(row.size()));
  }
  return out;
}

void require_single_setting(std::span<const PoseParams> params) {
  for (const auto& p : params) {
    if (p.alpha != params.front().alpha || p.delta != params.front().delta) {
      throw ConfigError(
          "results mix several (alpha, delta) settings; aggregate them "
          "separately");
    }
  }
}

}  // namespace stopbench
