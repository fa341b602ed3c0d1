#pragma once

#include "ftprl/bounds.hpp"
#include "ftprl/learner.hpp"
#include "ftprl/problems.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace ftprl {

/// Outcome of streaming one trace through one learner. Losses are the
/// linearized losses g_t^T x_t; for quadratic traces g_t is the gradient at
/// the played point, so the regret here upper-bounds the true regret.
struct RegretReport {
  std::string learner;
  std::string set;
  std::string trace;
  double cumulative_loss = 0.0;
  double comparator_loss = 0.0;
  double regret = 0.0;
  /// Unset for OGD, which has no regularization sequence.
  std::optional<double> tracked_bound;
  std::optional<double> closed_form_bound;
  std::optional<PosthocResult> posthoc;
  std::optional<double> kappa;
  std::size_t rounds = 0;
  std::int64_t wall_time_ms = 0;

  /// r_{1:T}(x*) + sum_t ||A_t^{-1} g_t||^2, in analysis coordinates.
  std::optional<double> regularized_bound;
  std::optional<double> regularizer_at_comparator;
  std::optional<double> dual_norm_sum;
  /// Largest g_t^T (x_t - x_{t+1}) - ||A_t^{-1} g_t||^2 over all rounds.
  std::optional<double> max_round_gap;
};

/// One sampled row of the per-round series.
struct RoundSample {
  std::size_t t;  // 1-based
  double loss;
  double regret;
  std::optional<double> tracked_bound;
};

struct RunOptions {
  std::size_t sample_every = 1;
  std::function<void(const RoundSample&)> on_sample;
};

/// Post-hoc optimum matched to the learner's regularization family on its
/// analysis set. Returns nullopt for OGD and for set/family pairs without a
/// closed form (diagonal family on a non-diagonal ellipsoid).
std::optional<PosthocResult> posthoc_for_learner(const Learner& learner);

/// Regret bound implied by the learner's schedule: 2 sum_i D_i sqrt(G_i) for
/// Diag, 2 D sqrt(G_T) for Const and Scale. Squared-gradient sums include
/// the seed.
std::optional<double> closed_form_bound(const Learner& learner);

/// Plays every round of `trace` with a fresh learner built from `config`.
/// Throws NumericFailure when an iterate leaves the feasible set.
RegretReport run_learner(const LearnerConfig& config, const GradientTrace& trace,
                         const RunOptions& options = {});

}  // namespace ftprl
