#pragma once

// On-disk trace formats.
//
// Compact archive (one directory per run):
//   fx.csv    one objective vector per line, in evaluation order
//   id.csv    one line per iteration, mu comma-separated 1-based fx line ids
//   meta.txt  key=value lines: m, mu, lambda, t_max, problem, algorithm,
//             seed, encoding (plus optional provenance keys)
//
// Naive form: fP_1.csv ... fP_<t_max>.csv, each holding the mu vectors of
// one population.
//
// Fields are comma separated, rows end in '\n', there are no header rows.
// In base64 mode each real is the RFC 4648 encoding (with padding) of its
// 8-byte big-endian IEEE-754 binary64 image: always 12 characters. In text
// mode each real is the shortest decimal that reads back to the same double.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stopbench/core.hpp"

namespace stopbench {

struct TraceArchive {
  std::filesystem::path meta_path;
  std::filesystem::path fx_path;
  std::filesystem::path id_path;

  /// Standard file names inside `dir`.
  static TraceArchive in(const std::filesystem::path& dir);
  std::filesystem::path dir() const { return fx_path.parent_path(); }
};

std::string encode_real(double x, Encoding mode);
double decode_real(std::string_view field, Encoding mode);

/// Provenance lines appended to meta.txt (e.g. tool version, config hash).
using ExtraMeta = std::map<std::string, std::string>;

TraceArchive write_compact(const RunTrace& trace,
                           const std::filesystem::path& dir,
                           const ExtraMeta& extra = {});
RunTrace read_compact(const TraceArchive& archive);

/// Reads only meta.txt.
RunMeta read_meta(const std::filesystem::path& meta_path);
ExtraMeta read_extra_meta(const std::filesystem::path& meta_path);

std::filesystem::path naive_file(const std::filesystem::path& dir, Iteration t);
std::vector<std::filesystem::path> write_naive(const RunTrace& trace,
                                               const std::filesystem::path& dir);
/// Reads one fP_t.csv file.
std::vector<ObjectiveVector> read_naive_file(const std::filesystem::path& path,
                                             std::size_t m, Encoding mode);

PopulationSnapshot snapshot(const RunTrace& trace, Iteration t);

/// Non-dominated vectors among the first mu + lambda*(t-1) evaluations.
std::vector<ObjectiveVector> unbounded_archive(const RunTrace& trace,
                                               Iteration t);

/// Sum of the file sizes of a compact archive (fx, id, meta).
std::uintmax_t compact_size(const TraceArchive& archive);

}  // namespace stopbench
