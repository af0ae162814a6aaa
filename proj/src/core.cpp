#include "stopbench/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace stopbench {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("objective vectors of length " +
                         std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " are not comparable");
  }
}

}  // namespace

std::string_view to_string(Encoding e) {
  return e == Encoding::base64 ? "base64" : "text";
}

Encoding parse_encoding(std::string_view s) {
  if (s == "text") return Encoding::text;
  if (s == "base64") return Encoding::base64;
  throw ConfigError("unknown encoding '" + std::string(s) +
                    "' (expected text or base64)");
}

EvalCount RunMeta::fe_max() const {
  return static_cast<EvalCount>(mu) +
         static_cast<EvalCount>(lambda) * static_cast<EvalCount>(t_max - 1);
}

void RunMeta::validate() const {
  if (m < 2) throw InputError("m must be >= 2");
  if (mu < 2) throw InputError("mu must be >= 2");
  if (lambda < 1) throw InputError("lambda must be >= 1");
  if (t_max < 1) throw InputError("t_max must be >= 1");
}

void RunTrace::validate() const {
  meta.validate();
  if (all_points.size() != meta.fe_max()) {
    throw InputError("trace holds " + std::to_string(all_points.size()) +
                     " points, expected mu + lambda*(t_max-1) = " +
                     std::to_string(meta.fe_max()));
  }
  for (std::size_t i = 0; i < all_points.size(); ++i) {
    const auto& p = all_points[i];
    if (p.size() != meta.m) {
      throw InputError("point " + std::to_string(i + 1) + " has " +
                       std::to_string(p.size()) + " objectives, expected " +
                       std::to_string(meta.m));
    }
    for (double v : p) {
      if (!std::isfinite(v)) {
        throw InputError("point " + std::to_string(i + 1) +
                         " has a non-finite objective");
      }
    }
  }
  if (memberships.size() != meta.t_max) {
    throw InputError("trace holds " + std::to_string(memberships.size()) +
                     " membership rows, expected t_max = " +
                     std::to_string(meta.t_max));
  }
  for (std::size_t t = 1; t <= memberships.size(); ++t) {
    const auto& row = memberships[t - 1];
    if (row.size() != meta.mu) {
      throw InputError("membership row " + std::to_string(t) + " has " +
                       std::to_string(row.size()) + " ids, expected mu = " +
                       std::to_string(meta.mu));
    }
    const EvalCount limit = fe_of_iteration(meta, t);
    for (auto id : row) {
      if (id < 1 || id > limit) {
        throw InputError("membership row " + std::to_string(t) +
                         " references id " + std::to_string(id) +
                         " outside [1, " + std::to_string(limit) + "]");
      }
    }
  }
}

void NormalizationBounds::validate() const {
  if (ideal.size() != nadir.size() || ideal.empty()) {
    throw BoundsError("ideal and nadir must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < ideal.size(); ++i) {
    if (!(ideal[i] < nadir[i])) {
      throw BoundsError("degenerate bounds in objective " + std::to_string(i) +
                        ": ideal must be strictly below nadir");
    }
  }
}

bool dominates(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b);
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

bool weakly_dominates(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

std::vector<ObjectiveVector> nondominated_subset(
    std::span<const ObjectiveVector> points) {
  std::vector<const ObjectiveVector*> order;
  order.reserve(points.size());
  for (const auto& p : points) order.push_back(&p);
  // A point can only be dominated by something lexicographically smaller.
  std::sort(order.begin(), order.end(),
            [](const ObjectiveVector* a, const ObjectiveVector* b) {
              return *a < *b;
            });

  std::vector<ObjectiveVector> front;
  const ObjectiveVector* previous = nullptr;
  for (const ObjectiveVector* p : order) {
    if (previous != nullptr && *previous == *p) continue;
    previous = p;
    const bool beaten = std::any_of(
        front.begin(), front.end(),
        [&](const ObjectiveVector& q) { return dominates(q, *p); });
    if (!beaten) front.push_back(*p);
  }
  return front;
}

ObjectiveVector normalize(std::span<const double> p,
                          const NormalizationBounds& b) {
  b.validate();
  require_same_length(p, b.ideal);
  ObjectiveVector out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = (p[i] - b.ideal[i]) / (b.nadir[i] - b.ideal[i]);
  }
  return out;
}

ObjectiveVector denormalize(std::span<const double> p,
                            const NormalizationBounds& b) {
  b.validate();
  require_same_length(p, b.ideal);
  ObjectiveVector out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = b.ideal[i] + p[i] * (b.nadir[i] - b.ideal[i]);
  }
  return out;
}

std::vector<ObjectiveVector> normalize_all(
    std::span<const ObjectiveVector> points, const NormalizationBounds& b) {
  std::vector<ObjectiveVector> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(normalize(p, b));
  return out;
}

EvalCount fe_of_iteration(const RunMeta& meta, Iteration t) {
  if (t < 1 || t > meta.t_max) {
    throw RangeError("iteration " + std::to_string(t) + " outside [1, " +
                     std::to_string(meta.t_max) + "]");
  }
  return static_cast<EvalCount>(meta.mu) +
         static_cast<EvalCount>(meta.lambda) * static_cast<EvalCount>(t - 1);
}

}  // namespace stopbench
