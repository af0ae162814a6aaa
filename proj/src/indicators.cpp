#include "stopbench/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stopbench/traceio.hpp"

namespace stopbench {

namespace {

double box_volume(const ObjectiveVector& p, std::span<const double> ref) {
  double v = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) v *= ref[i] - p[i];
  return v;
}

double sweep_2d(std::vector<ObjectiveVector> pts, std::span<const double> ref) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double ceiling = ref[1];
  for (const auto& p : pts) {
    if (p[1] < ceiling) {
      area += (ref[0] - p[0]) * (ceiling - p[1]);
      ceiling = p[1];
    }
  }
  return area;
}

// Exclusive-volume recursion: with points sorted worst-first in the last
// objective, every later point covers the whole slab above the current one,
// so each exclusive contribution is a (d-1)-dimensional problem times the
// slab height.
double wfg(std::vector<ObjectiveVector> pts, std::span<const double> ref,
           bool use_sweep) {
  if (pts.empty()) return 0.0;
  const std::size_t d = pts.front().size();
  if (d == 1) {
    double lo = pts.front()[0];
    for (const auto& p : pts) lo = std::min(lo, p[0]);
    return ref[0] - lo;
  }
  if (pts.size() == 1) return box_volume(pts.front(), ref);
  if (d == 2 && use_sweep) return sweep_2d(std::move(pts), ref);

  std::sort(pts.begin(), pts.end(),
            [d](const ObjectiveVector& a, const ObjectiveVector& b) {
              return a[d - 1] > b[d - 1];
            });
  const auto sub_ref = ref.first(d - 1);
  double total = 0.0;
  std::vector<ObjectiveVector> limited;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& p = pts[k];
    ObjectiveVector head(p.begin(), p.end() - 1);
    limited.clear();
    for (std::size_t j = k + 1; j < pts.size(); ++j) {
      ObjectiveVector q(d - 1);
      for (std::size_t i = 0; i + 1 < d; ++i) q[i] = std::max(pts[j][i], p[i]);
      limited.push_back(std::move(q));
    }
    const double covered = wfg(nondominated_subset(limited), sub_ref, use_sweep);
    total += (ref[d - 1] - p[d - 1]) * (box_volume(head, sub_ref) - covered);
  }
  return total;
}

std::vector<ObjectiveVector> inside_reference(
    std::span<const ObjectiveVector> points, std::span<const double> ref) {
  std::vector<ObjectiveVector> kept;
  for (const auto& p : points) {
    if (p.size() != ref.size()) {
      throw DimensionError("point and reference point differ in length");
    }
    bool inside = true;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(p[i] < ref[i])) {
        inside = false;
        break;
      }
    }
    if (inside) kept.push_back(p);
  }
  return nondominated_subset(kept);
}

void require_same_m(std::span<const ObjectiveVector> a,
                    std::span<const ObjectiveVector> b) {
  const std::size_t m = a.front().size();
  for (auto set : {a, b}) {
    for (const auto& p : set) {
      if (p.size() != m) throw DimensionError("indicator inputs differ in m");
    }
  }
}

}  // namespace

HvConfig HvConfig::normalized(NormalizationBounds b) {
  b.validate();
  HvConfig cfg;
  cfg.reference_point.assign(b.ideal.size(), 1.1);
  cfg.bounds = std::move(b);
  return cfg;
}

HvConfig HvConfig::raw(ObjectiveVector reference) {
  HvConfig cfg;
  cfg.reference_point = std::move(reference);
  return cfg;
}

double hypervolume_exact(std::span<const ObjectiveVector> points,
                         std::span<const double> reference) {
  return wfg(inside_reference(points, reference), reference, true);
}

double hypervolume_recursive(std::span<const ObjectiveVector> points,
                             std::span<const double> reference) {
  return wfg(inside_reference(points, reference), reference, false);
}

double hypervolume(std::span<const ObjectiveVector> points, const HvConfig& cfg) {
  if (cfg.bounds) {
    return hypervolume_exact(normalize_all(points, *cfg.bounds),
                             cfg.reference_point);
  }
  return hypervolume_exact(points, cfg.reference_point);
}

IndicatorSeries hv_series(const RunTrace& trace, const HvConfig& cfg) {
  IndicatorSeries out;
  out.reserve(trace.meta.t_max);
  for (Iteration t = 1; t <= trace.memberships.size(); ++t) {
    out.push_back(hypervolume(snapshot(trace, t).members, cfg));
  }
  return out;
}

IndicatorSeries best_so_far(const IndicatorSeries& per_iteration) {
  IndicatorSeries out(per_iteration.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < per_iteration.size(); ++i) {
    best = std::max(best, per_iteration[i]);
    out[i] = best;
  }
  return out;
}

IndicatorSeries best_so_far_hv(const RunTrace& trace, const HvConfig& cfg) {
  return best_so_far(hv_series(trace, cfg));
}

double additive_epsilon(std::span<const ObjectiveVector> a,
                        std::span<const ObjectiveVector> r) {
  if (a.empty() || r.empty()) {
    throw InputError("additive epsilon needs two nonempty sets");
  }
  require_same_m(a, r);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& rp : r) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ap : a) {
      double shift = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ap.size(); ++i) {
        shift = std::max(shift, ap[i] - rp[i]);
      }
      best = std::min(best, shift);
    }
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<ObjectiveVector> simplex_lattice(std::size_t m,
                                             std::size_t divisions) {
  if (m < 1 || divisions < 1) {
    throw ConfigError("simplex lattice needs m >= 1 and H >= 1");
  }
  std::vector<ObjectiveVector> out;
  std::vector<std::size_t> parts(m, 0);
  // Enumerate compositions of H into m parts in lexicographic order.
  auto rec = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
    if (pos + 1 == m) {
      parts[pos] = left;
      ObjectiveVector w(m);
      for (std::size_t i = 0; i < m; ++i) {
        w[i] = static_cast<double>(parts[i]) / static_cast<double>(divisions);
      }
      out.push_back(std::move(w));
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      parts[pos] = k;
      self(self, pos + 1, left - k);
    }
  };
  rec(rec, 0, divisions);
  return out;
}

std::size_t lattice_divisions_for(std::size_t m, std::size_t target) {
  auto count = [m](std::size_t h) {
    // C(h + m - 1, m - 1), computed incrementally to stay exact.
    double c = 1.0;
    for (std::size_t i = 1; i < m; ++i) {
      c = c * static_cast<double>(h + i) / static_cast<double>(i);
    }
    return c;
  };
  std::size_t best = 1;
  double best_gap = std::fabs(count(1) - static_cast<double>(target));
  for (std::size_t h = 2; count(h - 1) < static_cast<double>(target); ++h) {
    const double gap = std::fabs(count(h) - static_cast<double>(target));
    if (gap < best_gap) {
      best = h;
      best_gap = gap;
    }
  }
  return best;
}

double r2(std::span<const ObjectiveVector> a,
          std::span<const ObjectiveVector> weights) {
  if (weights.empty()) throw ConfigError("R2 needs at least one weight vector");
  if (a.empty()) throw InputError("R2 needs a nonempty point set");
  require_same_m(a, weights);
  for (const auto& w : weights) {
    double sum = 0.0;
    for (double v : w) {
      if (v < 0.0) throw ConfigError("R2 weights must be nonnegative");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw ConfigError("R2 weight vectors must sum to 1");
    }
  }
  double total = 0.0;
  for (const auto& w : weights) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : a) {
      double u = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        u = std::max(u, w[i] * std::fabs(p[i]));
      }
      best = std::min(best, u);
    }
    total += best;
  }
  return total / static_cast<double>(weights.size());
}

}  // namespace stopbench
