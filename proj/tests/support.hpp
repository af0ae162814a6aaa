#pragma once

// Fixtures and brute-force oracles shared by the test binaries. The oracles
// deliberately avoid the library's own algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stopbench/core.hpp"

namespace testing {

using stopbench::ObjectiveVector;

// The mu=4, lambda=1, t_max=3 run drawn in the paper's two figures.
inline stopbench::RunTrace figure_trace(stopbench::Encoding enc = stopbench::Encoding::text) {
  stopbench::RunTrace t;
  t.meta.m = 2;
  t.meta.mu = 4;
  t.meta.lambda = 1;
  t.meta.t_max = 3;
  t.meta.problem_id = "dtlz2";
  t.meta.algorithm_id = "example";
  t.meta.seed = 0;
  t.meta.encoding = enc;
  t.all_points = {{1.78, 2.53}, {3.14, 2.91}, {0.26, 4.55},
                  {2.88, 0.98}, {1.27, 2.55}, {1.45, 2.39}};
  t.memberships = {{1, 2, 3, 4}, {1, 2, 5, 4}, {6, 2, 5, 4}};
  return t;
}

inline std::vector<ObjectiveVector> random_points(std::mt19937_64& rng, std::size_t n,
                                                  std::size_t m, double lo = 0.0,
                                                  double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<ObjectiveVector> pts(n, ObjectiveVector(m));
  for (auto& p : pts) {
    for (auto& v : p) v = u(rng);
  }
  return pts;
}

inline bool oracle_dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

// O(n^2) pairwise filter; duplicates kept once; sorted for comparison.
inline std::vector<ObjectiveVector> pairwise_nondominated(const std::vector<ObjectiveVector>& pts) {
  std::vector<ObjectiveVector> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool beaten = false;
    for (std::size_t j = 0; j < pts.size() && !beaten; ++j) {
      beaten = oracle_dominates(pts[j], pts[i]);
    }
    if (!beaten && std::find(out.begin(), out.end(), pts[i]) == out.end()) {
      out.push_back(pts[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Inclusion-exclusion over every nonempty subset: the intersection of the
// boxes [p, ref] is the box [componentwise max, ref].
inline double inclusion_exclusion_hv(const std::vector<ObjectiveVector>& pts,
                                     const std::vector<double>& ref) {
  const std::size_t n = pts.size();
  const std::size_t m = ref.size();
  double total = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<double> corner(m, -INFINITY);
    int members = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      ++members;
      for (std::size_t k = 0; k < m; ++k) corner[k] = std::max(corner[k], pts[i][k]);
    }
    double vol = 1.0;
    for (std::size_t k = 0; k < m; ++k) vol *= std::max(0.0, ref[k] - corner[k]);
    total += (members % 2 == 1 ? 1.0 : -1.0) * vol;
  }
  return total;
}

struct MonteCarlo {
  double estimate;
  double standard_error;
};

// Uniform samples in the box [lower, ref].
inline MonteCarlo monte_carlo_hv(const std::vector<ObjectiveVector>& pts,
                                 const std::vector<double>& lower,
                                 const std::vector<double>& ref, std::size_t samples,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t m = ref.size();
  double box = 1.0;
  std::vector<std::uniform_real_distribution<double>> axes;
  for (std::size_t k = 0; k < m; ++k) {
    box *= ref[k] - lower[k];
    axes.emplace_back(lower[k], ref[k]);
  }
  std::size_t hits = 0;
  std::vector<double> z(m);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < m; ++k) z[k] = axes[k](rng);
    for (const auto& p : pts) {
      bool covers = true;
      for (std::size_t k = 0; k < m && covers; ++k) covers = p[k] <= z[k];
      if (covers) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  return {frac * box,
          box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("stopbench-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
