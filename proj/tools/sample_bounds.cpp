// Regenerates data/bounds.csv: ideal and nadir points of the problems whose
// fronts have no closed form, estimated from dense samples of the front.
//
//   stopbench-sample-bounds --samples 100000 --out data/bounds.csv

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stopbench/core.hpp"
#include "stopbench/problems.hpp"

namespace sb = stopbench;

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

// Ideal coordinates are attained by non-dominated points anyway; for each
// nadir coordinate, walk candidates from the largest value down and keep the
// first one nothing dominates.
sb::NormalizationBounds extremes(const std::vector<sb::ObjectiveVector>& pts) {
  const std::size_t m = pts.front().size();
  sb::NormalizationBounds b{sb::ObjectiveVector(m, INFINITY),
                            sb::ObjectiveVector(m, -INFINITY)};
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < m; ++i) b.ideal[i] = std::min(b.ideal[i], p[i]);
  }
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
      return pts[a][i] > pts[c][i];
    });
    for (std::size_t k : order) {
      const bool beaten = std::any_of(pts.begin(), pts.end(), [&](const auto& q) {
        return sb::dominates(q, pts[k]);
      });
      if (!beaten) {
        b.nadir[i] = pts[k][i];
        break;
      }
    }
  }
  return b;
}

// Degenerate curve: only the first position variable moves the point.
sb::NormalizationBounds sample_curve(const sb::ProblemSpec& spec,
                                     std::size_t samples) {
  std::vector<sb::ObjectiveVector> pts;
  std::vector<double> pos(spec.m - 1, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    pos[0] = static_cast<double>(s) / static_cast<double>(samples - 1);
    pts.push_back(sb::front_point(spec, pos));
  }
  return extremes(pts);
}

// The g=1 surface of DTLZ7 is f_m = 2m - sum phi(f_i) with
// phi(v) = v (1 + sin(3 pi v)); a coordinate value is Pareto-optimal iff
// phi at it beats phi at every smaller value, so the largest such value is
// the global argmax of phi.
sb::NormalizationBounds sample_dtlz7(const sb::ProblemSpec& spec,
                                     std::size_t samples) {
  double best_v = 0.0;
  double best_phi = -1.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double v = static_cast<double>(s) / static_cast<double>(samples - 1);
    const double phi = v * (1.0 + std::sin(3.0 * std::numbers::pi * v));
    if (phi > best_phi) {
      best_phi = phi;
      best_v = v;
    }
  }
  const std::vector<double> zeros(spec.m - 1, 0.0);
  const std::vector<double> peak(spec.m - 1, best_v);
  sb::NormalizationBounds b;
  b.ideal.assign(spec.m, 0.0);
  b.nadir.assign(spec.m, best_v);
  b.ideal[spec.m - 1] = sb::front_point(spec, peak)[spec.m - 1];
  b.nadir[spec.m - 1] = sb::front_point(spec, zeros)[spec.m - 1];
  return b;
}

sb::NormalizationBounds sample_surface(const sb::ProblemSpec& spec,
                                       std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<sb::ObjectiveVector> pts;
  const std::size_t d = spec.m - 1;
  std::vector<double> pos(d);
  for (std::size_t c = 0; c < (std::size_t{1} << d); ++c) {
    for (std::size_t j = 0; j < d; ++j) pos[j] = (c >> j) & 1u ? 1.0 : 0.0;
    pts.push_back(sb::front_point(spec, pos));
  }
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& v : pos) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    pts.push_back(sb::front_point(spec, pos));
  }
  return extremes(pts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample Pareto fronts to estimate ideal and nadir points"};
  std::size_t samples = 100000;
  std::uint64_t seed = 20240601;
  std::string out = "bounds.csv";
  std::vector<std::size_t> objectives{2, 3, 4, 5, 6};
  app.add_option("--samples", samples, "Samples per front (>= 2)");
  app.add_option("--seed", seed, "Seed for random surface samples");
  app.add_option("--out", out, "Output file");
  app.add_option("--m", objectives, "Objective counts to cover");
  CLI11_PARSE(app, argc, argv);
  if (samples < 2) {
    std::cerr << "--samples must be >= 2\n";
    return 1;
  }

  std::ofstream file(out);
  if (!file) {
    std::cerr << "cannot write " << out << "\n";
    return 2;
  }
  file << "# problem_id,m,ideal...,nadir...\n";
  file << "# samples=" << samples << " seed=" << seed << "\n";
  const sb::ProblemId ids[] = {sb::ProblemId::dtlz5, sb::ProblemId::dtlz6,
                               sb::ProblemId::dtlz7, sb::ProblemId::cdtlz2};
  for (auto id : ids) {
    for (auto m : objectives) {
      const auto spec = sb::make_problem(id, m);
      sb::NormalizationBounds b;
      switch (id) {
        case sb::ProblemId::dtlz5:
        case sb::ProblemId::dtlz6:
          b = sample_curve(spec, samples);
          break;
        case sb::ProblemId::dtlz7:
          b = sample_dtlz7(spec, samples);
          break;
        default:
          b = sample_surface(spec, samples, seed);
      }
      file << sb::to_string(id) << ',' << m;
      for (double v : b.ideal) file << ',' << shortest(v);
      for (double v : b.nadir) file << ',' << shortest(v);
      file << '\n';
      std::cerr << sb::to_string(id) << " m=" << m << " done\n";
    }
  }
  return 0;
}
