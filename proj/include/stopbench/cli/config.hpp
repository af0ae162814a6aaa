#pragma once

// Experiment description read from a plain text file:
//
//   # comment            ; also a comment
//   [experiment]
//   output_dir = out/desk
//   runs = 5
//   seed_base = 1
//   encoding = base64    # or text
//   jobs = 4
//
//   [problem dtlz2_m2]   # the word after the section name is its label
//   id = dtlz2
//   m = 2
//   n = 11               # optional, defaults to m + k - 1
//
//   [algorithm nsga2]
//   mu = 20
//   lambda = 20          # lambda = 1 gives the steady-state variant
//   fe_max = 20000
//   sbx_eta = 20  sbx_prob = 0.9  pm_eta = 20  pm_prob = 0.05
//
//   [criterion ocd]
//   type = ocd           # ocd | mgbm | esc | eps | isc, plus its parameters
//
//   [pose]
//   alpha = 2
//   delta = 0
//
// Unknown sections or keys are errors. Run r (0-based) uses seed
// seed_base + r.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stopbench/criteria.hpp"
#include "stopbench/optimizer.hpp"
#include "stopbench/pose.hpp"
#include "stopbench/problems.hpp"

namespace stopbench::cli {

struct ProblemEntry {
  std::string label;
  ProblemSpec spec;
};

struct AlgorithmEntry {
  std::string label;
  EvolverConfig config;
};

struct CriterionEntry {
  std::string label;
  CriterionParams params;
};

struct ExperimentConfig {
  std::filesystem::path output_dir = "stopbench-out";
  std::size_t runs = 1;
  std::uint64_t seed_base = 1;
  Encoding encoding = Encoding::base64;
  std::size_t jobs = 1;
  std::vector<ProblemEntry> problems;
  std::vector<AlgorithmEntry> algorithms;
  std::vector<CriterionEntry> criteria;
  double alpha = 2.0;
  double delta = 0.0;

  /// ConfigError unless runs >= 1 and every list is nonempty with unique
  /// labels.
  void validate() const;
};

/// `source` only labels error messages.
ExperimentConfig parse_config(std::string_view text, std::string_view source);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Stable rendering of every setting that can change results; equal configs
/// render equal. Where outputs go (output_dir) and how many threads produce
/// them (jobs) are left out.
std::string canonical_text(const ExperimentConfig& cfg);

/// 16 hex digits of FNV-1a 64 over canonical_text.
std::string config_hash(const ExperimentConfig& cfg);

/// Shortest decimal that reads back to the same double.
std::string format_real(double v);
double parse_real(std::string_view s);
std::uint64_t parse_count(std::string_view s);

}  // namespace stopbench::cli
