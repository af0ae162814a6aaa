#pragma once

// Online stopping criteria. Each criterion consumes population snapshots in
// iteration order and reports whether it would have stopped the search.
//
// Patience counts everywhere mean "T consecutive iterations without the
// qualifying event"; the criterion fires at the end of the T-th one.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "stopbench/core.hpp"

namespace stopbench {

struct StopDecision {
  bool stopped = false;
  std::optional<Iteration> stop_iteration;
  std::optional<EvalCount> fe_stop;

  friend bool operator==(const StopDecision&, const StopDecision&) = default;
};

/// What a criterion knows about the run it watches.
struct ReplayContext {
  RunMeta meta;
  /// Objectives are normalized with these before any criterion sees them.
  /// Leave empty to work in raw objective space.
  std::optional<NormalizationBounds> bounds;
};

enum class OcdIndicator { hv, epsilon, r2 };

struct OcdParams {
  std::size_t window = 13;
  double var_limit = 1e-4;
  double significance = 0.05;
  std::vector<OcdIndicator> indicators{OcdIndicator::hv, OcdIndicator::epsilon,
                                       OcdIndicator::r2};
  /// HV reference for raw-space replay; normalized replay uses 1.1.
  std::optional<ObjectiveVector> hv_reference;

  void validate() const;
};

struct MgbmParams {
  double i_min = 0.12;
  double r = 0.1;
  double q = 1e-5;
  double x0 = 1.0;
  double p0 = 1.0;

  void validate() const;
};

enum class EscMode {
  /// Count iterations where |D_t - D_{t-1}| <= diss_tol.
  stability,
  /// Count iterations where D_t <= diss_tol.
  below_threshold,
};

struct EscParams {
  std::size_t n_b = 10;
  std::size_t n_s = 30;
  double diss_tol = 1e-6;
  EscMode mode = EscMode::stability;

  void validate() const;
};

struct EpsParams {
  double epsilon = 0.01;
  std::size_t patience = 50;

  void validate() const;
};

struct IscParams {
  std::size_t patience = 50;
  std::optional<ObjectiveVector> hv_reference;

  void validate() const;
};

using CriterionParams =
    std::variant<OcdParams, MgbmParams, EscParams, EpsParams, IscParams>;

/// "ocd", "mgbm", "esc", "eps" or "isc".
std::string_view criterion_kind(const CriterionParams& p);

class StoppingCriterion {
 public:
  explicit StoppingCriterion(ReplayContext ctx);
  virtual ~StoppingCriterion() = default;
  StoppingCriterion(const StoppingCriterion&) = delete;
  StoppingCriterion& operator=(const StoppingCriterion&) = delete;

  /// Feeds iteration t. Snapshots must arrive as t = 1, 2, 3, ...; anything
  /// else throws SequencingError. Once stopped, the decision never changes.
  StopDecision observe(const PopulationSnapshot& snap);

  const StopDecision& decision() const { return decision_; }
  virtual std::string_view kind() const = 0;

 protected:
  /// Receives the (normalized, when bounds are set) snapshot; returns true
  /// to stop at this iteration.
  virtual bool step(const PopulationSnapshot& snap) = 0;
  const ReplayContext& context() const { return ctx_; }

 private:
  ReplayContext ctx_;
  Iteration next_ = 1;
  StopDecision decision_;
};

std::unique_ptr<StoppingCriterion> make_criterion(const CriterionParams& params,
                                                  const ReplayContext& ctx);

/// Replays every snapshot of `trace` through each criterion. Criteria do not
/// share state, so the result for one criterion does not depend on which
/// others run alongside it.
std::vector<StopDecision> replay(const RunTrace& trace,
                                 std::span<const CriterionParams> criteria,
                                 const std::optional<NormalizationBounds>& bounds);

// ---- building blocks -------------------------------------------------------

/// Mutual domination rate:
/// |{p in prev dominated by cur}|/|prev| - |{c in cur dominated by prev}|/|cur|.
double mdr(std::span<const ObjectiveVector> prev,
           std::span<const ObjectiveVector> cur);

/// Random-walk scalar Kalman filter.
class ScalarKalman {
 public:
  ScalarKalman(double x0, double p0, double q, double r)
      : x_(x0), p_(p0), q_(q), r_(r) {}

  /// Predict p += q, then correct with measurement z. Returns the estimate.
  double update(double z) {
    const double prior = p_ + q_;
    const double gain = prior / (prior + r_);
    x_ += gain * (z - x_);
    p_ = (1.0 - gain) * prior;
    return x_;
  }

  double estimate() const { return x_; }
  double variance() const { return p_; }

 private:
  double x_;
  double p_;
  double q_;
  double r_;
};

/// One-sided chi-square variance test: true when H0 "sigma^2 >= var_limit"
/// is rejected at `significance`.
bool variance_below_limit(std::span<const double> values, double var_limit,
                          double significance);

/// Two-sided t-test on the least-squares slope of values against their
/// index: true when the slope is not significant at `significance`.
bool no_significant_trend(std::span<const double> values, double significance);

/// OCD decision for one iteration: indicator values of each window snapshot
/// are taken against `reference` (the current population). Returns nullopt
/// while the window holds fewer than params.window snapshots.
std::optional<bool> ocd_step(const OcdParams& params,
                             std::span<const PopulationSnapshot> window,
                             const PopulationSnapshot& reference,
                             std::span<const double> hv_reference,
                             std::span<const ObjectiveVector> r2_weights);

/// Sparse histogram over the n_b^m grid on [0,1]^m; coordinates outside the
/// unit interval land in the boundary cells. Values are fractions of the
/// population.
using CellDistribution = std::map<std::vector<std::int64_t>, double>;
CellDistribution cell_distribution(std::span<const ObjectiveVector> points,
                                   std::size_t n_b);

/// Jensen-Shannon divergence with natural logarithms; bounded by ln 2.
double jensen_shannon(const CellDistribution& p, const CellDistribution& q);

/// u is in a better epsilon-box than v, or in the same box and strictly
/// closer to that box's lower corner epsilon * floor(u / epsilon).
bool eps_box_dominates(std::span<const double> u, std::span<const double> v,
                       double epsilon);

/// Archive under epsilon-box dominance: at most one member per box and no
/// member epsilon-box-dominates another.
class EpsBoxArchive {
 public:
  enum class Outcome { rejected, replaced, new_box };

  explicit EpsBoxArchive(double epsilon);

  Outcome insert(const ObjectiveVector& u);
  const std::vector<ObjectiveVector>& members() const { return members_; }
  double epsilon() const { return epsilon_; }

 private:
  double epsilon_;
  std::vector<ObjectiveVector> members_;
};

}  // namespace stopbench
