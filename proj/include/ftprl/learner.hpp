#pragma once

#include "ftprl/feasible_set.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace ftprl {

enum class LearnerKind { Diag, Const, Scale, OGD };

std::string_view to_string(LearnerKind kind);
/// Accepts "diag", "const", "scale", "ogd" (case-sensitive).
std::optional<LearnerKind> parse_learner_kind(std::string_view name);

/// Step-size rule for the gradient-descent baseline.
enum class OgdSchedule {
  Adaptive,     // eta_t = D / (2 sqrt(G_t)), G_t the running squared-gradient mass
  Constant,     // eta_t = rate
  InverseSqrt,  // eta_t = rate / sqrt(t)
};

struct LearnerConfig {
  LearnerConfig(LearnerKind kind, FeasibleSet feasible_set, double epsilon_seed = 1e-6);

  LearnerKind kind;
  FeasibleSet feasible_set;
  /// Magnitude of the virtual gradient folded into the squared-gradient
  /// sums before round 1. Zero is accepted for hand-checkable runs.
  double epsilon_seed;
  OgdSchedule ogd_schedule = OgdSchedule::Adaptive;
  double ogd_rate = 1.0;
};

/// Running sums behind the FTPRL update, in the learner's analysis
/// coordinates (the transformed coordinates for Scale).
struct RegAccumulator {
  Vector lambda_sum;   // diagonal of Q_{1:t}
  Vector q_sum;        // sum_tau Q_tau x_tau
  Vector g_sum;        // g_{1:t}
  Vector grad_sq_sum;  // per-coordinate sum of g^2, including the seed
  std::size_t round = 0;

  double total_grad_sq() const { return grad_sq_sum.sum(); }
};

/// What one round did, expressed in analysis coordinates where that
/// matters. For Diag, Const and OGD the analysis coordinates are the
/// original ones.
struct RoundRecord {
  Vector played;           // x_t in F
  Vector next;             // x_{t+1} in F
  double loss = 0.0;       // g^T x_t

  Vector analysis_gradient;  // g, or A^{-1} g for Scale
  Vector analysis_played;    // x_t, or A x_t for Scale
  Vector analysis_next;
  Vector increment;          // diagonal of Q_t (empty for OGD)
  Vector cumulative;         // diagonal of Q_{1:t} (empty for OGD)
  /// ||A_t^{-1} g_t||^2 with A_t = Q_{1:t}^{1/2}; NaN for OGD.
  double dual_norm_sq = 0.0;
};

/// One online learner. Plays x_1 = 0 and updates once per observed
/// subgradient. Single-owner; distinct instances share nothing.
class Learner {
 public:
  explicit Learner(LearnerConfig config);

  const LearnerConfig& config() const { return config_; }
  LearnerKind kind() const { return config_.kind; }
  /// The point to play this round.
  const Vector& point() const { return x_; }
  const RegAccumulator& accumulator() const { return acc_; }
  /// The set the regularization acts on: F itself, or the unit ball for
  /// Scale.
  const FeasibleSet& analysis_set() const;
  /// Per-coordinate widths used by Diag; zero marks a frozen coordinate.
  const Vector& coordinate_widths() const { return widths_; }
  /// L2 diameter used by Const, Scale (of the unit ball) and OGD.
  double diameter() const { return diameter_; }

  /// Observes g_t at the current point and moves to x_{t+1}.
  RoundRecord step(const Vector& g);

 private:
  RoundRecord diag_step(const Vector& g);
  RoundRecord const_step(const Vector& g);
  RoundRecord scale_step(const Vector& g);
  RoundRecord ogd_step(const Vector& g);

  // Shared coordinate-constant recurrence; operates on hat_x_ when the
  // learner is Scale, on x_ otherwise.
  RoundRecord constant_recurrence(const Vector& g, Vector& point, const FeasibleSet& set);

  LearnerConfig config_;
  Vector x_;
  RegAccumulator acc_;
  Vector widths_;
  double diameter_ = 0.0;
  std::optional<FeasibleSet> unit_ball_;  // Scale only
  Vector hat_x_;                          // Scale only
};

/// Wraps a subgradient of the round's loss at the played point.
LinearLoss linearize(double f_value, Vector g);

/// Gradient of ||x - c||^2.
Vector quadratic_subgradient(const Vector& x, const Vector& c);

/// Subgradient of sum_i |x_i|, taking 0 at kinks.
Vector absolute_subgradient(const Vector& x);

}  // namespace ftprl
