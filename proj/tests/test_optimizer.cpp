#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "stopbench/optimizer.hpp"
#include "support.hpp"

using namespace stopbench;

namespace {

// Front peeling: repeatedly strip the points nothing remaining dominates.
std::vector<std::vector<std::size_t>> oracle_fronts(const std::vector<ObjectiveVector>& pts) {
  std::vector<std::size_t> left(pts.size());
  std::iota(left.begin(), left.end(), 0);
  std::vector<std::vector<std::size_t>> fronts;
  while (!left.empty()) {
    std::vector<std::size_t> front, rest;
    for (auto i : left) {
      bool beaten = false;
      for (auto j : left) beaten = beaten || testing::oracle_dominates(pts[j], pts[i]);
      (beaten ? rest : front).push_back(i);
    }
    fronts.push_back(front);
    left = rest;
  }
  return fronts;
}

// Textbook crowding distance over one front of distinct-valued points.
std::map<std::size_t, double> oracle_crowding(const std::vector<ObjectiveVector>& pts,
                                              const std::vector<std::size_t>& front) {
  std::map<std::size_t, double> cd;
  for (auto i : front) cd[i] = 0.0;
  if (front.size() <= 2) {
    for (auto i : front) cd[i] = std::numeric_limits<double>::infinity();
    return cd;
  }
  for (std::size_t k = 0; k < pts[0].size(); ++k) {
    auto sorted = front;
    std::sort(sorted.begin(), sorted.end(),
              [&](std::size_t a, std::size_t b) { return pts[a][k] < pts[b][k]; });
    const double span = pts[sorted.back()][k] - pts[sorted.front()][k];
    cd[sorted.front()] = cd[sorted.back()] = std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r + 1 < sorted.size(); ++r) {
      cd[sorted[r]] += (pts[sorted[r + 1]][k] - pts[sorted[r - 1]][k]) / span;
    }
  }
  return cd;
}

std::vector<std::size_t> oracle_select(const std::vector<ObjectiveVector>& pts, std::size_t mu) {
  struct Key {
    std::size_t rank;
    double cd;
    std::size_t pos;
  };
  std::vector<Key> keys;
  const auto fronts = oracle_fronts(pts);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    for (auto [pos, cd] : oracle_crowding(pts, fronts[r])) keys.push_back({r, cd, pos});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.cd != b.cd) return a.cd > b.cd;
    return a.pos < b.pos;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mu; ++i) out.push_back(keys[i].pos);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("random source is the standard engine") {
  // The standard fixes the 10000th output of a default-constructed engine.
  std::mt19937_64 e;
  e.discard(9999);
  CHECK(e() == 9981545732273789042ull);

  std::mt19937_64 ref(42);
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double want = static_cast<double>(ref() >> 11) / 9007199254740992.0;
    const double got = rng.uniform();
    CHECK(got == want);
    CHECK(got >= 0.0);
    CHECK(got < 1.0);
  }
  Rng idx(7);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) ++hits[idx.index(5)];
  for (int h : hits) CHECK(h > 800);
}

TEST_CASE("config validation and iteration count") {
  EvolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.t_max() == 1000);
  cfg.mu = 4;
  cfg.lambda = 1;
  cfg.fe_max = 6;
  CHECK(cfg.t_max() == 3);
  cfg.lambda = 3;
  cfg.fe_max = 12;  // 4 + 3*2 = 10 <= 12 < 13
  CHECK(cfg.t_max() == 3);

  EvolverConfig bad;
  bad.mu = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.lambda = 101;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.fe_max = 50;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.sbx_prob = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("environmental selection matches front peeling and crowding") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 2 + rep % 3;
    const auto pts = testing::random_points(rng, 30, m);
    const auto got = environmental_select(pts, 20);
    CHECK(got == oracle_select(pts, 20));
  }
}

TEST_CASE("fronts and crowding examples") {
  const std::vector<ObjectiveVector> pts{{1, 4}, {2, 2}, {4, 1}, {3, 3}, {5, 5}};
  const auto fronts = nondominated_fronts(pts);
  REQUIRE(fronts.size() == 3);
  CHECK(fronts[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(fronts[1] == std::vector<std::size_t>{3});
  CHECK(fronts[2] == std::vector<std::size_t>{4});
  const std::vector<std::uint32_t> ids{1, 2, 3, 4, 5};
  const auto cd = crowding_distance(pts, fronts[0], ids);
  CHECK(std::isinf(cd[0]));
  CHECK(std::isinf(cd[2]));
  CHECK(cd[1] == doctest::Approx(2.0));  // (4-1)/3 + (4-1)/3

  // A single front larger than mu drops its most crowded interior points.
  const std::vector<ObjectiveVector> line{{0, 10}, {1, 9}, {1.1, 8.9}, {5, 5}, {10, 0}};
  CHECK(environmental_select(line, 4) == std::vector<std::size_t>{0, 2, 3, 4});
  CHECK(environmental_select(line, 3) == std::vector<std::size_t>{0, 3, 4});
  // Infinite distances tie; the lower id survives.
  const std::vector<ObjectiveVector> pair{{0, 1}, {1, 0}};
  CHECK(environmental_select(pair, 1) == std::vector<std::size_t>{0});
  CHECK(environmental_select(pair, 5) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("runs are deterministic per seed") {
  const auto spec = make_problem(ProblemId::dtlz2, 3);
  EvolverConfig cfg;
  cfg.mu = 12;
  cfg.lambda = 4;
  cfg.fe_max = 200;
  cfg.seed = 9;
  const auto a = run(spec, cfg);
  const auto b = run(spec, cfg);
  CHECK(a.all_points == b.all_points);
  CHECK(a.memberships == b.memberships);
  cfg.seed = 10;
  CHECK(run(spec, cfg).all_points != a.all_points);
}

TEST_CASE("small steady-state run has the documented shape") {
  const auto spec = make_problem(ProblemId::dtlz2, 2);
  EvolverConfig cfg;
  cfg.mu = 4;
  cfg.lambda = 1;
  cfg.fe_max = 6;
  const auto t = run(spec, cfg);
  CHECK_NOTHROW(t.validate());
  CHECK(t.meta.t_max == 3);
  CHECK(t.all_points.size() == 6);
  REQUIRE(t.memberships.size() == 3);
  CHECK(t.memberships[0] == std::vector<std::uint32_t>{1, 2, 3, 4});
}

TEST_CASE("trace invariants over many configurations") {
  std::mt19937_64 rng(404);
  const ProblemId ids[] = {ProblemId::dtlz1, ProblemId::dtlz2, ProblemId::dtlz4,
                           ProblemId::dtlz7, ProblemId::cdtlz2};
  for (int rep = 0; rep < 25; ++rep) {
    const auto spec = make_problem(ids[rep % 5], 2 + rep % 3);
    EvolverConfig cfg;
    cfg.mu = 4 + rng() % 20;
    cfg.lambda = 1 + rng() % cfg.mu;
    cfg.fe_max = cfg.mu + rng() % 300;
    cfg.seed = rng();
    const auto t = run(spec, cfg);
    CAPTURE(rep);
    CHECK_NOTHROW(t.validate());
    CHECK(t.meta.t_max == cfg.t_max());
    CHECK(t.all_points.size() == cfg.mu + cfg.lambda * (t.meta.t_max - 1));
    CHECK(t.meta.fe_max() <= cfg.fe_max);
    for (std::size_t r = 1; r < t.memberships.size(); ++r) {
      const auto& prev = t.memberships[r - 1];
      const auto& cur = t.memberships[r];
      std::size_t changed = 0;
      for (std::size_t s = 0; s < cfg.mu; ++s) {
        if (prev[s] != cur[s]) {
          ++changed;
          // A freed slot only ever receives a child of this generation.
          CHECK(cur[s] > cfg.mu + cfg.lambda * (r - 1));
        }
      }
      CHECK(changed <= cfg.lambda);
      // Elitism: nothing discarded this generation dominates a survivor.
      std::set<std::uint32_t> pool(prev.begin(), prev.end());
      for (std::uint32_t id = cfg.mu + cfg.lambda * (r - 1) + 1;
           id <= cfg.mu + cfg.lambda * r; ++id) {
        pool.insert(id);
      }
      for (auto id : cur) pool.erase(id);
      for (auto gone : pool) {
        for (auto kept : cur) {
          CHECK_FALSE(testing::oracle_dominates(t.all_points[gone - 1], t.all_points[kept - 1]));
        }
      }
    }
  }
}
