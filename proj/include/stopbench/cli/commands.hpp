#pragma once

// Batch stages. All outputs land in cfg.output_dir:
//
//   archives/<problem>__<algorithm>__s<seed>/   compact traces (generate)
//   decisions.csv                                one row per archive x criterion
//   pose.csv, pose_avg.csv                       scores (evaluate)
//   ranks.csv, problem_ranks.csv                 average ranks (report)
//   plot_bhv.csv, plot_markers.csv               plot data (report)
//
// Every table starts with a "# stopbench <version> config_hash=<hash>" line
// followed by one header row.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stopbench/cli/config.hpp"
#include "stopbench/pose.hpp"

namespace stopbench::cli {

std::string_view tool_version();

struct RunKey {
  const ProblemEntry* problem;
  const AlgorithmEntry* algorithm;
  std::uint64_t seed;

  std::string name() const;
};

/// Problem-major, then algorithm, then seed.
std::vector<RunKey> planned_runs(const ExperimentConfig& cfg);
std::filesystem::path archive_dir(const ExperimentConfig& cfg, const RunKey& run);

/// Normalization bounds for the problem recorded in an archive.
NormalizationBounds bounds_for(const RunMeta& meta);

void cmd_generate(const ExperimentConfig& cfg);

struct InflateReport {
  std::uintmax_t compact_bytes = 0;
  std::uintmax_t naive_bytes = 0;
  std::size_t files = 0;

  /// naive / compact.
  double ratio() const;
};
InflateReport cmd_inflate(const std::filesystem::path& archive,
                          const std::filesystem::path& out);

/// Writes decisions.csv and returns its path. Archives are only read.
std::filesystem::path cmd_replay(const ExperimentConfig& cfg);

struct PoseSetting {
  double alpha;
  double delta;
};

/// Writes pose.csv (one row per archive x criterion x setting) and
/// pose_avg.csv (one row per problem x algorithm x criterion x setting).
void cmd_evaluate(const ExperimentConfig& cfg, std::span<const PoseSetting> settings);

/// Reads pose_avg.csv and pose.csv. Unless `sweep` is set, the results must
/// come from a single (alpha, delta); otherwise ConfigError. In sweep mode a
/// ranks_a<alpha>_d<delta>.csv table is also written per setting.
void cmd_report(const ExperimentConfig& cfg, bool sweep);

}  // namespace stopbench::cli
