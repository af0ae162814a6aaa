#include "stopbench/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stopbench {

namespace {

struct Individual {
  std::vector<double> x;
  ObjectiveVector f;
  std::uint32_t id = 0;
};

// Rank and crowding distance of each population slot, for mating selection.
struct Fitness {
  std::vector<std::size_t> rank;
  std::vector<double> crowding;
};

Fitness assess(const std::vector<Individual>& pop) {
  std::vector<ObjectiveVector> pts;
  std::vector<std::uint32_t> ids;
  for (const auto& ind : pop) {
    pts.push_back(ind.f);
    ids.push_back(ind.id);
  }
  Fitness fit{std::vector<std::size_t>(pop.size()),
              std::vector<double>(pop.size())};
  const auto fronts = nondominated_fronts(pts);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    const auto cd = crowding_distance(pts, fronts[r], ids);
    for (std::size_t k = 0; k < fronts[r].size(); ++k) {
      fit.rank[fronts[r][k]] = r;
      fit.crowding[fronts[r][k]] = cd[k];
    }
  }
  return fit;
}

std::size_t tournament(const Fitness& fit, Rng& rng) {
  const std::size_t n = fit.rank.size();
  const std::size_t a = rng.index(n);
  std::size_t b = rng.index(n - 1);
  if (b >= a) ++b;
  if (fit.rank[a] != fit.rank[b]) return fit.rank[a] < fit.rank[b] ? a : b;
  if (fit.crowding[a] != fit.crowding[b]) {
    return fit.crowding[a] > fit.crowding[b] ? a : b;
  }
  return a;
}

// Bounded simulated binary crossover on [0,1]^n (Deb & Agrawal).
void sbx(std::vector<double>& c1, std::vector<double>& c2, double eta,
         double prob, Rng& rng) {
  if (rng.uniform() > prob) return;
  constexpr double lo = 0.0;
  constexpr double hi = 1.0;
  for (std::size_t i = 0; i < c1.size(); ++i) {
    if (rng.uniform() > 0.5) continue;
    if (std::fabs(c1[i] - c2[i]) <= 1e-14) continue;
    const double y1 = std::min(c1[i], c2[i]);
    const double y2 = std::max(c1[i], c2[i]);
    const double u = rng.uniform();
    const auto spread = [&](double beta) {
      const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
      return u <= 1.0 / alpha
                 ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                 : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
    };
    const double bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
    const double bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
    const double v1 = std::clamp(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lo, hi);
    const double v2 = std::clamp(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lo, hi);
    if (rng.uniform() <= 0.5) {
      c1[i] = v2;
      c2[i] = v1;
    } else {
      c1[i] = v1;
      c2[i] = v2;
    }
  }
}

// Bounded polynomial mutation on [0,1]^n.
void polynomial_mutation(std::vector<double>& x, double eta, double prob,
                         Rng& rng) {
  const double power = 1.0 / (eta + 1.0);
  for (double& y : x) {
    if (rng.uniform() > prob) continue;
    const double d1 = y;
    const double d2 = 1.0 - y;
    const double u = rng.uniform();
    double dq;
    if (u <= 0.5) {
      const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
      dq = std::pow(v, power) - 1.0;
    } else {
      const double v =
          2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
      dq = 1.0 - std::pow(v, power);
    }
    y = std::clamp(y + dq, 0.0, 1.0);
  }
}

}  // namespace

std::size_t Rng::index(std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

void EvolverConfig::validate() const {
  if (mu < 2) throw ConfigError("mu must be >= 2");
  if (lambda < 1 || lambda > mu) throw ConfigError("lambda must be in [1, mu]");
  if (fe_max < mu) throw ConfigError("fe_max must be >= mu");
  if (!(sbx_prob >= 0.0 && sbx_prob <= 1.0)) {
    throw ConfigError("sbx_prob must be in [0,1]");
  }
  if (!(sbx_eta >= 0.0) || !(pm_eta >= 0.0)) {
    throw ConfigError("distribution indices must be >= 0");
  }
  if (pm_prob > 1.0) throw ConfigError("pm_prob must be <= 1");
}

std::size_t EvolverConfig::t_max() const {
  return 1 + static_cast<std::size_t>((fe_max - mu) / lambda);
}

std::vector<std::vector<std::size_t>> nondominated_fronts(
    std::span<const ObjectiveVector> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> beats(n);
  std::vector<std::size_t> beaten_by(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j])) {
        beats[i].push_back(j);
        ++beaten_by[j];
      } else if (dominates(points[j], points[i])) {
        beats[j].push_back(i);
        ++beaten_by[i];
      }
    }
  }
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (beaten_by[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (auto i : current) {
      for (auto j : beats[i]) {
        if (--beaten_by[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> points,
                                      std::span<const std::size_t> front,
                                      std::span<const std::uint32_t> ids) {
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    return dist;
  }
  const std::size_t m = points[front[0]].size();
  std::vector<std::size_t> order(n);
  for (std::size_t obj = 0; obj < m; ++obj) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = points[front[a]][obj];
      const double vb = points[front[b]][obj];
      if (va != vb) return va < vb;
      return ids[front[a]] < ids[front[b]];
    });
    const double lo = points[front[order.front()]][obj];
    const double hi = points[front[order.back()]][obj];
    dist[order.front()] = std::numeric_limits<double>::infinity();
    dist[order.back()] = std::numeric_limits<double>::infinity();
    if (hi <= lo) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double gap =
          points[front[order[k + 1]]][obj] - points[front[order[k - 1]]][obj];
      dist[order[k]] += gap / (hi - lo);
    }
  }
  return dist;
}

std::vector<std::size_t> environmental_select(
    std::span<const ObjectiveVector> points, std::span<const std::uint32_t> ids,
    std::size_t mu) {
  if (ids.size() != points.size()) {
    throw DimensionError("environmental_select needs one id per point");
  }
  std::vector<std::size_t> chosen;
  if (mu >= points.size()) {
    chosen.resize(points.size());
    std::iota(chosen.begin(), chosen.end(), 0);
    return chosen;
  }
  for (const auto& front : nondominated_fronts(points)) {
    if (chosen.size() + front.size() <= mu) {
      chosen.insert(chosen.end(), front.begin(), front.end());
      if (chosen.size() == mu) break;
      continue;
    }
    const auto cd = crowding_distance(points, front, ids);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (cd[a] != cd[b]) return cd[a] > cd[b];
      return ids[front[a]] < ids[front[b]];
    });
    for (std::size_t k = 0; chosen.size() < mu; ++k) {
      chosen.push_back(front[order[k]]);
    }
    break;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<std::size_t> environmental_select(
    std::span<const ObjectiveVector> points, std::size_t mu) {
  std::vector<std::uint32_t> ids(points.size());
  std::iota(ids.begin(), ids.end(), 1u);
  return environmental_select(points, ids, mu);
}

RunTrace run(const ProblemSpec& spec, const EvolverConfig& cfg) {
  spec.validate();
  cfg.validate();
  Rng rng(cfg.seed);
  const double pm_prob =
      cfg.pm_prob < 0.0 ? 1.0 / static_cast<double>(spec.n) : cfg.pm_prob;

  RunTrace trace;
  trace.meta.m = spec.m;
  trace.meta.mu = cfg.mu;
  trace.meta.lambda = cfg.lambda;
  trace.meta.t_max = cfg.t_max();
  trace.meta.problem_id = std::string(to_string(spec.id));
  trace.meta.algorithm_id = cfg.algorithm_id;
  trace.meta.seed = cfg.seed;
  trace.all_points.reserve(trace.meta.fe_max());

  auto evaluate_new = [&](std::vector<double> x) {
    Individual ind;
    ind.f = evaluate(spec, x);
    ind.x = std::move(x);
    trace.all_points.push_back(ind.f);
    ind.id = static_cast<std::uint32_t>(trace.all_points.size());
    return ind;
  };
  auto membership_row = [](const std::vector<Individual>& pop) {
    std::vector<std::uint32_t> row;
    for (const auto& ind : pop) row.push_back(ind.id);
    return row;
  };

  std::vector<Individual> pop;
  for (std::size_t i = 0; i < cfg.mu; ++i) {
    std::vector<double> x(spec.n);
    for (auto& v : x) v = rng.uniform();
    pop.push_back(evaluate_new(std::move(x)));
  }
  trace.memberships.push_back(membership_row(pop));

  for (std::size_t t = 1; t < trace.meta.t_max; ++t) {
    const Fitness fit = assess(pop);
    std::vector<Individual> offspring;
    while (offspring.size() < cfg.lambda) {
      auto c1 = pop[tournament(fit, rng)].x;
      auto c2 = pop[tournament(fit, rng)].x;
      sbx(c1, c2, cfg.sbx_eta, cfg.sbx_prob, rng);
      polynomial_mutation(c1, cfg.pm_eta, pm_prob, rng);
      polynomial_mutation(c2, cfg.pm_eta, pm_prob, rng);
      offspring.push_back(evaluate_new(std::move(c1)));
      if (offspring.size() < cfg.lambda) {
        offspring.push_back(evaluate_new(std::move(c2)));
      }
    }

    std::vector<ObjectiveVector> pts;
    std::vector<std::uint32_t> ids;
    for (const auto* group : {&pop, &offspring}) {
      for (const auto& ind : *group) {
        pts.push_back(ind.f);
        ids.push_back(ind.id);
      }
    }
    const auto keep = environmental_select(pts, ids, cfg.mu);
    std::vector<bool> kept(pts.size(), false);
    for (auto k : keep) kept[k] = true;

    std::size_t next_child = 0;
    for (std::size_t slot = 0; slot < cfg.mu; ++slot) {
      if (kept[slot]) continue;
      while (!kept[cfg.mu + next_child]) ++next_child;
      pop[slot] = std::move(offspring[next_child++]);
    }
    trace.memberships.push_back(membership_row(pop));
  }
  return trace;
}

}  // namespace stopbench
