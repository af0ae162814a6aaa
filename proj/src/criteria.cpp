#include "stopbench/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "stopbench/indicators.hpp"
#include "stopbench/traceio.hpp"

namespace stopbench {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<std::int64_t> box_of(std::span<const double> u, double epsilon) {
  std::vector<std::int64_t> box(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    box[i] = static_cast<std::int64_t>(std::floor(u[i] / epsilon));
  }
  return box;
}

double corner_distance(std::span<const double> u,
                       const std::vector<std::int64_t>& box, double epsilon) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - epsilon * static_cast<double>(box[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

bool box_dominates(const std::vector<std::int64_t>& a,
                   const std::vector<std::int64_t>& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

ObjectiveVector hv_reference_for(const ReplayContext& ctx,
                                 const std::optional<ObjectiveVector>& raw_ref,
                                 std::string_view who) {
  if (ctx.bounds) return ObjectiveVector(ctx.meta.m, 1.1);
  if (!raw_ref) {
    throw ConfigError(std::string(who) +
                      " needs hv_reference when replaying in raw space");
  }
  if (raw_ref->size() != ctx.meta.m) {
    throw ConfigError(std::string(who) + " hv_reference has the wrong length");
  }
  return *raw_ref;
}

// ---------------------------------------------------------------------------

class Isc final : public StoppingCriterion {
 public:
  Isc(IscParams p, ReplayContext ctx)
      : StoppingCriterion(std::move(ctx)), params_(std::move(p)) {
    params_.validate();
    reference_ = hv_reference_for(context(), params_.hv_reference, "isc");
  }
  std::string_view kind() const override { return "isc"; }

 protected:
  bool step(const PopulationSnapshot& snap) override {
    const double hv = hypervolume_exact(snap.members, reference_);
    if (snap.iteration == 1 || hv > best_) {
      best_ = hv;
      stagnant_ = 0;
      return false;
    }
    return ++stagnant_ >= params_.patience;
  }

 private:
  IscParams params_;
  ObjectiveVector reference_;
  double best_ = 0.0;
  std::size_t stagnant_ = 0;
};

class Mgbm final : public StoppingCriterion {
 public:
  Mgbm(MgbmParams p, ReplayContext ctx)
      : StoppingCriterion(std::move(ctx)),
        params_(p),
        filter_(p.x0, p.p0, p.q, p.r) {
    params_.validate();
  }
  std::string_view kind() const override { return "mgbm"; }

 protected:
  bool step(const PopulationSnapshot& snap) override {
    bool stop = false;
    if (snap.iteration > 1) {
      stop = filter_.update(mdr(previous_, snap.members)) < params_.i_min;
    }
    previous_ = snap.members;
    return stop;
  }

 private:
  MgbmParams params_;
  ScalarKalman filter_;
  std::vector<ObjectiveVector> previous_;
};

class Esc final : public StoppingCriterion {
 public:
  Esc(EscParams p, ReplayContext ctx)
      : StoppingCriterion(std::move(ctx)), params_(p) {
    params_.validate();
  }
  std::string_view kind() const override { return "esc"; }

 protected:
  bool step(const PopulationSnapshot& snap) override {
    const bool normalized = context().bounds.has_value();
    if (snap.iteration == 1) {
      previous_ = snap.members;
      return false;
    }
    double d;
    if (normalized) {
      d = jensen_shannon(cell_distribution(previous_, params_.n_b),
                         cell_distribution(snap.members, params_.n_b));
    } else {
      // Raw space: grid spans the bounding box of both populations.
      std::vector<ObjectiveVector> both = previous_;
      both.insert(both.end(), snap.members.begin(), snap.members.end());
      const std::size_t m = both.front().size();
      ObjectiveVector lo(m, std::numeric_limits<double>::infinity());
      ObjectiveVector hi(m, -std::numeric_limits<double>::infinity());
      for (const auto& p : both) {
        for (std::size_t i = 0; i < m; ++i) {
          lo[i] = std::min(lo[i], p[i]);
          hi[i] = std::max(hi[i], p[i]);
        }
      }
      auto rescale = [&](const std::vector<ObjectiveVector>& pts) {
        std::vector<ObjectiveVector> out = pts;
        for (auto& p : out) {
          for (std::size_t i = 0; i < m; ++i) {
            p[i] = hi[i] > lo[i] ? (p[i] - lo[i]) / (hi[i] - lo[i]) : 0.0;
          }
        }
        return out;
      };
      d = jensen_shannon(cell_distribution(rescale(previous_), params_.n_b),
                         cell_distribution(rescale(snap.members), params_.n_b));
    }
    previous_ = snap.members;

    bool calm = false;
    if (params_.mode == EscMode::below_threshold) {
      calm = d <= params_.diss_tol;
    } else if (last_d_) {
      calm = std::fabs(d - *last_d_) <= params_.diss_tol;
    }
    last_d_ = d;
    counter_ = calm ? counter_ + 1 : 0;
    return counter_ >= params_.n_s;
  }

 private:
  EscParams params_;
  std::vector<ObjectiveVector> previous_;
  std::optional<double> last_d_;
  std::size_t counter_ = 0;
};

class EpsProgress final : public StoppingCriterion {
 public:
  EpsProgress(EpsParams p, ReplayContext ctx)
      : StoppingCriterion(std::move(ctx)), params_(p), archive_(p.epsilon) {
    params_.validate();
  }
  std::string_view kind() const override { return "eps"; }

 protected:
  bool step(const PopulationSnapshot& snap) override {
    // Offspring of the last iteration are the members the previous
    // population did not hold (as a multiset of values).
    std::vector<ObjectiveVector> carried = previous_;
    std::sort(carried.begin(), carried.end());
    std::vector<bool> used(carried.size(), false);
    const std::size_t before = progress_;
    for (const auto& u : snap.members) {
      auto it = std::lower_bound(carried.begin(), carried.end(), u);
      bool seen = false;
      for (; it != carried.end() && *it == u; ++it) {
        const auto k = static_cast<std::size_t>(it - carried.begin());
        if (!used[k]) {
          used[k] = true;
          seen = true;
          break;
        }
      }
      if (seen) continue;
      if (archive_.insert(u) == EpsBoxArchive::Outcome::new_box) ++progress_;
    }
    previous_ = snap.members;
    if (snap.iteration == 1) return false;
    stagnant_ = progress_ != before ? 0 : stagnant_ + 1;
    return stagnant_ >= params_.patience;
  }

 private:
  EpsParams params_;
  EpsBoxArchive archive_;
  std::vector<ObjectiveVector> previous_;
  std::size_t progress_ = 0;
  std::size_t stagnant_ = 0;
};

class Ocd final : public StoppingCriterion {
 public:
  Ocd(OcdParams p, ReplayContext ctx)
      : StoppingCriterion(std::move(ctx)), params_(std::move(p)) {
    params_.validate();
    const bool wants_hv =
        std::find(params_.indicators.begin(), params_.indicators.end(),
                  OcdIndicator::hv) != params_.indicators.end();
    if (wants_hv) {
      reference_ = hv_reference_for(context(), params_.hv_reference, "ocd");
    }
    const std::size_t m = context().meta.m;
    weights_ = simplex_lattice(m, lattice_divisions_for(m, context().meta.mu));
  }
  std::string_view kind() const override { return "ocd"; }

 protected:
  bool step(const PopulationSnapshot& snap) override {
    bool stop = false;
    if (window_.size() == params_.window) {
      const std::vector<PopulationSnapshot> window(window_.begin(), window_.end());
      stop = ocd_step(params_, window, snap, reference_, weights_).value_or(false);
      window_.pop_front();
    }
    window_.push_back(snap);
    return stop;
  }

 private:
  OcdParams params_;
  ObjectiveVector reference_;
  std::vector<ObjectiveVector> weights_;
  std::deque<PopulationSnapshot> window_;
};

}  // namespace

// ---------------------------------------------------------------------------

void OcdParams::validate() const {
  if (window < 3) throw ConfigError("ocd window must be >= 3");
  if (!(var_limit > 0.0)) throw ConfigError("ocd var_limit must be > 0");
  if (!(significance > 0.0 && significance < 1.0)) {
    throw ConfigError("ocd significance must be in (0,1)");
  }
  if (indicators.empty()) throw ConfigError("ocd needs at least one indicator");
}

void MgbmParams::validate() const {
  if (!(i_min >= 0.0)) throw ConfigError("mgbm i_min must be >= 0");
  if (!(r > 0.0)) throw ConfigError("mgbm r must be > 0");
  if (!(q >= 0.0)) throw ConfigError("mgbm q must be >= 0");
  if (!(p0 > 0.0)) throw ConfigError("mgbm p0 must be > 0");
}

void EscParams::validate() const {
  if (n_b < 2) throw ConfigError("esc n_b must be >= 2");
  if (n_s < 1) throw ConfigError("esc n_s must be >= 1");
  if (!(diss_tol >= 0.0)) throw ConfigError("esc diss_tol must be >= 0");
}

void EpsParams::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("eps epsilon must be > 0");
  if (patience < 1) throw ConfigError("eps patience must be >= 1");
}

void IscParams::validate() const {
  if (patience < 1) throw ConfigError("isc patience must be >= 1");
}

std::string_view criterion_kind(const CriterionParams& p) {
  return std::visit(
      overloaded{[](const OcdParams&) { return std::string_view("ocd"); },
                 [](const MgbmParams&) { return std::string_view("mgbm"); },
                 [](const EscParams&) { return std::string_view("esc"); },
                 [](const EpsParams&) { return std::string_view("eps"); },
                 [](const IscParams&) { return std::string_view("isc"); }},
      p);
}

StoppingCriterion::StoppingCriterion(ReplayContext ctx) : ctx_(std::move(ctx)) {
  ctx_.meta.validate();
  if (ctx_.bounds) {
    ctx_.bounds->validate();
    if (ctx_.bounds->ideal.size() != ctx_.meta.m) {
      throw DimensionError("normalization bounds do not match m");
    }
  }
}

StopDecision StoppingCriterion::observe(const PopulationSnapshot& snap) {
  if (snap.iteration != next_) {
    throw SequencingError("expected iteration " + std::to_string(next_) +
                          ", got " + std::to_string(snap.iteration));
  }
  ++next_;
  if (decision_.stopped) return decision_;
  if (snap.members.empty()) throw InputError("empty population snapshot");

  bool stop;
  if (ctx_.bounds) {
    PopulationSnapshot normalized{snap.iteration,
                                  normalize_all(snap.members, *ctx_.bounds)};
    stop = step(normalized);
  } else {
    stop = step(snap);
  }
  if (stop) {
    decision_.stopped = true;
    decision_.stop_iteration = snap.iteration;
    decision_.fe_stop = fe_of_iteration(ctx_.meta, snap.iteration);
  }
  return decision_;
}

std::unique_ptr<StoppingCriterion> make_criterion(const CriterionParams& params,
                                                  const ReplayContext& ctx) {
  return std::visit(
      overloaded{
          [&](const OcdParams& p) -> std::unique_ptr<StoppingCriterion> {
            return std::make_unique<Ocd>(p, ctx);
          },
          [&](const MgbmParams& p) -> std::unique_ptr<StoppingCriterion> {
            return std::make_unique<Mgbm>(p, ctx);
          },
          [&](const EscParams& p) -> std::unique_ptr<StoppingCriterion> {
            return std::make_unique<Esc>(p, ctx);
          },
          [&](const EpsParams& p) -> std::unique_ptr<StoppingCriterion> {
            return std::make_unique<EpsProgress>(p, ctx);
          },
          [&](const IscParams& p) -> std::unique_ptr<StoppingCriterion> {
            return std::make_unique<Isc>(p, ctx);
          }},
      params);
}

std::vector<StopDecision> replay(const RunTrace& trace,
                                 std::span<const CriterionParams> criteria,
                                 const std::optional<NormalizationBounds>& bounds) {
  const ReplayContext ctx{trace.meta, bounds};
  std::vector<std::unique_ptr<StoppingCriterion>> running;
  for (const auto& c : criteria) running.push_back(make_criterion(c, ctx));
  for (Iteration t = 1; t <= trace.meta.t_max; ++t) {
    const bool all_done =
        std::all_of(running.begin(), running.end(),
                    [](const auto& c) { return c->decision().stopped; });
    if (all_done) break;
    const auto snap = snapshot(trace, t);
    for (auto& c : running) {
      if (!c->decision().stopped) c->observe(snap);
    }
  }
  std::vector<StopDecision> out;
  for (const auto& c : running) out.push_back(c->decision());
  return out;
}

double mdr(std::span<const ObjectiveVector> prev,
           std::span<const ObjectiveVector> cur) {
  if (prev.empty() || cur.empty()) {
    throw InputError("MDR needs two nonempty populations");
  }
  auto dominated_count = [](std::span<const ObjectiveVector> a,
                            std::span<const ObjectiveVector> b) {
    std::size_t n = 0;
    for (const auto& p : a) {
      if (std::any_of(b.begin(), b.end(),
                      [&](const ObjectiveVector& q) { return dominates(q, p); })) {
        ++n;
      }
    }
    return static_cast<double>(n);
  };
  return dominated_count(prev, cur) / static_cast<double>(prev.size()) -
         dominated_count(cur, prev) / static_cast<double>(cur.size());
}

bool variance_below_limit(std::span<const double> values, double var_limit,
                          double significance) {
  const std::size_t n = values.size();
  if (n < 2) throw InputError("variance test needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double statistic = ss / var_limit;  // (n-1) s^2 / var_limit
  const boost::math::chi_squared dist(static_cast<double>(n - 1));
  return boost::math::cdf(dist, statistic) < significance;
}

bool no_significant_trend(std::span<const double> values, double significance) {
  const std::size_t n = values.size();
  if (n < 3) throw InputError("trend test needs at least three values");
  const double x_mean = (static_cast<double>(n) + 1.0) / 2.0;
  double y_mean = 0.0;
  for (double v : values) y_mean += v;
  y_mean /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i + 1) - x_mean;
    sxx += dx * dx;
    sxy += dx * (values[i] - y_mean);
  }
  const double slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fit = y_mean + slope * (static_cast<double>(i + 1) - x_mean);
    sse += (values[i] - fit) * (values[i] - fit);
  }
  const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  if (se == 0.0) return slope == 0.0;
  const double t = std::fabs(slope / se);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
  return p >= significance;
}

std::optional<bool> ocd_step(const OcdParams& params,
                             std::span<const PopulationSnapshot> window,
                             const PopulationSnapshot& reference,
                             std::span<const double> hv_reference,
                             std::span<const ObjectiveVector> r2_weights) {
  params.validate();
  if (window.size() < params.window) return std::nullopt;
  const auto recent = window.last(params.window);

  bool all_low_variance = true;
  bool all_flat = true;
  for (const auto indicator : params.indicators) {
    std::vector<double> values;
    values.reserve(recent.size());
    switch (indicator) {
      case OcdIndicator::hv: {
        const double ref_hv = hypervolume_exact(reference.members, hv_reference);
        for (const auto& s : recent) {
          values.push_back(ref_hv - hypervolume_exact(s.members, hv_reference));
        }
        break;
      }
      case OcdIndicator::epsilon:
        for (const auto& s : recent) {
          values.push_back(additive_epsilon(s.members, reference.members));
        }
        break;
      case OcdIndicator::r2: {
        const double ref_r2 = r2(reference.members, r2_weights);
        for (const auto& s : recent) {
          values.push_back(r2(s.members, r2_weights) - ref_r2);
        }
        break;
      }
    }
    all_low_variance = all_low_variance &&
                       variance_below_limit(values, params.var_limit,
                                            params.significance);
    all_flat = all_flat && no_significant_trend(values, params.significance);
  }
  return all_low_variance || all_flat;
}

CellDistribution cell_distribution(std::span<const ObjectiveVector> points,
                                   std::size_t n_b) {
  if (points.empty()) throw InputError("cell distribution of an empty set");
  CellDistribution dist;
  const double share = 1.0 / static_cast<double>(points.size());
  const auto top = static_cast<std::int64_t>(n_b) - 1;
  for (const auto& p : points) {
    std::vector<std::int64_t> cell(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double scaled = std::floor(p[i] * static_cast<double>(n_b));
      cell[i] = scaled <= 0.0 ? 0
                : scaled >= static_cast<double>(top)
                    ? top
                    : static_cast<std::int64_t>(scaled);
    }
    dist[cell] += share;
  }
  return dist;
}

double jensen_shannon(const CellDistribution& p, const CellDistribution& q) {
  std::map<std::vector<std::int64_t>, std::pair<double, double>> joint;
  for (const auto& [cell, v] : p) joint[cell].first = v;
  for (const auto& [cell, v] : q) joint[cell].second = v;
  double js = 0.0;
  for (const auto& [cell, pq] : joint) {
    const auto [a, b] = pq;
    const double mid = 0.5 * (a + b);
    if (a > 0.0) js += 0.5 * a * std::log(a / mid);
    if (b > 0.0) js += 0.5 * b * std::log(b / mid);
  }
  return std::clamp(js, 0.0, std::numbers::ln2);
}

bool eps_box_dominates(std::span<const double> u, std::span<const double> v,
                       double epsilon) {
  if (u.size() != v.size()) throw DimensionError("eps-box vectors differ in m");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  const auto bu = box_of(u, epsilon);
  const auto bv = box_of(v, epsilon);
  if (box_dominates(bu, bv)) return true;
  if (bu != bv) return false;
  return corner_distance(u, bu, epsilon) < corner_distance(v, bv, epsilon);
}

EpsBoxArchive::EpsBoxArchive(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

EpsBoxArchive::Outcome EpsBoxArchive::insert(const ObjectiveVector& u) {
  const auto bu = box_of(u, epsilon_);
  bool occupied = false;
  for (const auto& a : members_) {
    if (eps_box_dominates(a, u, epsilon_)) return Outcome::rejected;
    if (box_of(a, epsilon_) == bu) {
      occupied = true;
      if (!eps_box_dominates(u, a, epsilon_)) return Outcome::rejected;
    }
  }
  std::erase_if(members_, [&](const ObjectiveVector& a) {
    return eps_box_dominates(u, a, epsilon_);
  });
  members_.push_back(u);
  return occupied ? Outcome::replaced : Outcome::new_box;
}

}  // namespace stopbench
