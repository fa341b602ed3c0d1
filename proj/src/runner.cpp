#include "ftprl/runner.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace ftprl {

std::optional<PosthocResult> posthoc_for_learner(const Learner& learner) {
  const FeasibleSet& set = learner.analysis_set();
  const Vector& g_sq = learner.accumulator().grad_sq_sum;
  if (!(g_sq.sum() > 0.0)) return std::nullopt;
  switch (learner.kind()) {
    case LearnerKind::OGD:
      return std::nullopt;
    case LearnerKind::Const:
      return posthoc_on_set(set, PosthocFamily::Const, g_sq);
    case LearnerKind::Scale:
      if (set.as<LpBall>()->p.value() == 2.0) return posthoc_on_set(set, PosthocFamily::FullPSD, g_sq);
      return posthoc_on_set(set, PosthocFamily::Diag, g_sq);
    case LearnerKind::Diag: {
      const auto* t = set.as<TransformedBall>();
      if (t && !t->a.is_diagonal()) return std::nullopt;
      return posthoc_on_set(set, PosthocFamily::Diag, g_sq);
    }
  }
  return std::nullopt;
}

std::optional<double> closed_form_bound(const Learner& learner) {
  const Vector& g_sq = learner.accumulator().grad_sq_sum;
  switch (learner.kind()) {
    case LearnerKind::Diag:
      return 2.0 * learner.coordinate_widths().dot(g_sq.cwiseSqrt());
    case LearnerKind::Const:
    case LearnerKind::Scale:
      return 2.0 * learner.diameter() * std::sqrt(g_sq.sum());
    case LearnerKind::OGD:
      return std::nullopt;
  }
  return std::nullopt;
}

RegretReport run_learner(const LearnerConfig& config, const GradientTrace& trace,
                         const RunOptions& options) {
  if (trace.dimension() != config.feasible_set.dimension()) {
    throw InvalidArgument("run: trace dimension " + std::to_string(trace.dimension()) +
                          " does not match feasible set dimension " +
                          std::to_string(config.feasible_set.dimension()));
  }
  const auto start = std::chrono::steady_clock::now();
  Learner learner(config);
  const bool regularized = config.kind != LearnerKind::OGD;
  std::optional<BoundTracker> tracker;
  if (regularized) tracker.emplace(learner.analysis_set());

  const auto n = static_cast<Eigen::Index>(trace.dimension());
  Vector g_sum = Vector::Zero(n);
  Vector analysis_g_sum = Vector::Zero(n);
  double cumulative = 0.0;
  double dual_sum = 0.0;
  double k_sum = 0.0;  // sum_t 1/2 x_t^T Q_t x_t, analysis coordinates
  double max_gap = -std::numeric_limits<double>::infinity();
  const std::size_t every = std::max<std::size_t>(options.sample_every, 1);

  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    const Vector row = trace.row(t);
    const Vector g = trace.loss_shape() == LossShape::Quadratic
                         ? quadratic_subgradient(learner.point(), row)
                         : row;
    const RoundRecord rec = learner.step(g);
    if (!config.feasible_set.contains(rec.next)) {
      std::ostringstream os;
      os << "round " << t + 1 << ": iterate left the feasible set (excess "
         << config.feasible_set.excess(rec.next) << ")";
      throw NumericFailure(os.str());
    }
    cumulative += rec.loss;
    g_sum += g;
    analysis_g_sum += rec.analysis_gradient;
    if (regularized) {
      tracker->track_round(rec.increment, rec.analysis_gradient);
      dual_sum += rec.dual_norm_sq;
      k_sum += 0.5 * rec.increment.dot(rec.analysis_played.cwiseAbs2());
      const double gap =
          rec.analysis_gradient.dot(rec.analysis_played - rec.analysis_next) - rec.dual_norm_sq;
      max_gap = std::max(max_gap, gap);
    }
    if (options.on_sample && ((t + 1) % every == 0 || t + 1 == trace.rounds())) {
      const Vector best = linear_minimizer(config.feasible_set, g_sum);
      RoundSample sample{t + 1, rec.loss, cumulative - g_sum.dot(best), std::nullopt};
      if (tracker) sample.tracked_bound = tracker->value();
      options.on_sample(sample);
    }
  }

  RegretReport report;
  report.learner = std::string(to_string(config.kind));
  report.set = config.feasible_set.describe();
  report.trace = trace.describe();
  report.rounds = trace.rounds();
  report.cumulative_loss = cumulative;
  const Vector x_star = linear_minimizer(config.feasible_set, g_sum);
  report.comparator_loss = g_sum.dot(x_star);
  report.regret = report.cumulative_loss - report.comparator_loss;

  if (regularized) {
    const RegAccumulator& acc = learner.accumulator();
    const Vector x_hat = linear_minimizer(learner.analysis_set(), analysis_g_sum);
    const double reg = 0.5 * x_hat.dot(acc.lambda_sum.cwiseProduct(x_hat)) - acc.q_sum.dot(x_hat) + k_sum;
    report.tracked_bound = tracker->value();
    report.closed_form_bound = closed_form_bound(learner);
    report.regularizer_at_comparator = reg;
    report.dual_norm_sum = dual_sum;
    report.regularized_bound = reg + dual_sum;
    if (trace.rounds() > 0) report.max_round_gap = max_gap;
    report.posthoc = posthoc_for_learner(learner);
    if (report.posthoc && report.posthoc->bound_value > 0.0) {
      report.kappa = competitive_ratio(*report.tracked_bound, report.posthoc->bound_value);
    }
  }
  report.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return report;
}

}  // namespace ftprl
