#pragma once

// Elitist NSGA-II style trace generator. Criteria are not consulted here;
// they are applied later by replaying the emitted trace.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "stopbench/core.hpp"
#include "stopbench/problems.hpp"

namespace stopbench {

/// Portable random source: std::mt19937_64 (its output sequence is fixed by
/// the C++ standard) with hand-written conversions, since the standard
/// distributions differ between library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) from the top 53 bits of one engine output.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, n) by rejection on the largest multiple of n.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

struct EvolverConfig {
  std::size_t mu = 100;
  std::size_t lambda = 100;
  EvalCount fe_max = 100000;
  std::uint64_t seed = 1;
  double sbx_eta = 20.0;
  double sbx_prob = 0.9;
  double pm_eta = 20.0;
  /// Per-variable mutation probability; a negative value means 1/n.
  double pm_prob = -1.0;
  std::string algorithm_id = "nsga2";

  void validate() const;
  /// 1 + floor((fe_max - mu) / lambda)
  std::size_t t_max() const;
};

/// Non-dominated sorting: fronts[0] holds the positions of rank-0 points.
/// Each front is sorted by position.
std::vector<std::vector<std::size_t>> nondominated_fronts(
    std::span<const ObjectiveVector> points);

/// Crowding distance of each member of `front` (same order). Boundary
/// points get +inf. `ids` break ordering ties between equal values.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> points,
                                      std::span<const std::size_t> front,
                                      std::span<const std::uint32_t> ids);

/// Picks mu survivors by front rank, then larger crowding distance, then
/// lower evaluation id. Returns the chosen positions in ascending order.
std::vector<std::size_t> environmental_select(
    std::span<const ObjectiveVector> points, std::span<const std::uint32_t> ids,
    std::size_t mu);

/// Same, with evaluation ids taken to be the positions.
std::vector<std::size_t> environmental_select(
    std::span<const ObjectiveVector> points, std::size_t mu);

/// Runs the optimizer to its budget and records every evaluation.
/// Survivors keep their slot in the membership row; freed slots receive the
/// surviving offspring in evaluation order.
RunTrace run(const ProblemSpec& spec, const EvolverConfig& cfg);

}  // namespace stopbench
