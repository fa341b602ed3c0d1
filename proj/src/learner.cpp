#include "ftprl/learner.hpp"

#include "ftprl/projection.hpp"

#include <cmath>
#include <limits>

namespace ftprl {

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Diag: return "diag";
    case LearnerKind::Const: return "const";
    case LearnerKind::Scale: return "scale";
    case LearnerKind::OGD: return "ogd";
  }
  return "unknown";
}

std::optional<LearnerKind> parse_learner_kind(std::string_view name) {
  if (name == "diag") return LearnerKind::Diag;
  if (name == "const") return LearnerKind::Const;
  if (name == "scale") return LearnerKind::Scale;
  if (name == "ogd") return LearnerKind::OGD;
  return std::nullopt;
}

LearnerConfig::LearnerConfig(LearnerKind kind, FeasibleSet feasible_set, double epsilon_seed)
    : kind(kind), feasible_set(std::move(feasible_set)), epsilon_seed(epsilon_seed) {}

Learner::Learner(LearnerConfig config) : config_(std::move(config)) {
  if (!std::isfinite(config_.epsilon_seed) || config_.epsilon_seed < 0.0) {
    throw InvalidArgument("learner: epsilon_seed must be finite and nonnegative");
  }
  const FeasibleSet& f = config_.feasible_set;
  const auto n = static_cast<Eigen::Index>(f.dimension());
  const auto* transformed = f.as<TransformedBall>();
  if (config_.kind == LearnerKind::Scale) {
    if (!transformed) {
      throw InvalidArgument("learner: scale requires a transformed-ball feasible set");
    }
    unit_ball_.emplace(FeasibleSet::lp_ball(f.dimension(), transformed->p, 1.0));
    hat_x_ = Vector::Zero(n);
  } else if (transformed && transformed->p.value() != 2.0) {
    throw InvalidArgument("learner: transformed balls with p != 2 are supported by scale only");
  }
  if (config_.kind == LearnerKind::OGD &&
      config_.ogd_schedule != OgdSchedule::Adaptive && !(config_.ogd_rate > 0.0)) {
    throw InvalidArgument("learner: ogd rate must be positive");
  }

  x_ = Vector::Zero(n);
  acc_.lambda_sum = Vector::Zero(n);
  acc_.q_sum = Vector::Zero(n);
  acc_.g_sum = Vector::Zero(n);
  acc_.grad_sq_sum = Vector::Zero(n);

  widths_ = widths(f);
  if (config_.kind == LearnerKind::Scale) {
    diameter_ = l2_diameter(*unit_ball_);
  } else if (config_.kind != LearnerKind::Diag) {
    diameter_ = l2_diameter(f);
  }

  const double seed_sq = config_.epsilon_seed * config_.epsilon_seed;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (config_.kind == LearnerKind::Diag && widths_[i] <= 0.0) continue;
    acc_.grad_sq_sum[i] = seed_sq;
  }
}

const FeasibleSet& Learner::analysis_set() const {
  return unit_ball_ ? *unit_ball_ : config_.feasible_set;
}

RoundRecord Learner::step(const Vector& g) {
  if (g.size() != x_.size()) {
    throw InvalidArgument("learner: gradient dimension mismatch");
  }
  require_finite(g, "learner gradient");
  RoundRecord rec;
  switch (config_.kind) {
    case LearnerKind::Diag: rec = diag_step(g); break;
    case LearnerKind::Const: rec = const_step(g); break;
    case LearnerKind::Scale: rec = scale_step(g); break;
    case LearnerKind::OGD: rec = ogd_step(g); break;
  }
  ++acc_.round;
  return rec;
}

RoundRecord Learner::diag_step(const Vector& g) {
  const auto n = x_.size();
  RoundRecord rec;
  rec.played = x_;
  rec.loss = g.dot(x_);
  rec.increment = Vector::Zero(n);

  Vector u = Vector::Zero(n);
  Vector weight = Vector::Ones(n);
  double dual = 0.0;
  acc_.g_sum += g;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (widths_[i] <= 0.0) continue;  // frozen at 0
    acc_.grad_sq_sum[i] += g[i] * g[i];
    const double bar = 2.0 / widths_[i] * std::sqrt(acc_.grad_sq_sum[i]);
    const double inc = std::max(bar - acc_.lambda_sum[i], 0.0);
    acc_.q_sum[i] += x_[i] * inc;
    acc_.lambda_sum[i] = bar;
    rec.increment[i] = inc;
    if (bar > 0.0) {
      u[i] = (acc_.q_sum[i] - acc_.g_sum[i]) / bar;
      weight[i] = std::sqrt(bar);
      dual += g[i] * g[i] / bar;
    }
  }
  x_ = project(config_.feasible_set, DiagPSD(weight), u);

  rec.next = x_;
  rec.cumulative = acc_.lambda_sum;
  rec.dual_norm_sq = dual;
  rec.analysis_gradient = g;
  rec.analysis_played = rec.played;
  rec.analysis_next = rec.next;
  return rec;
}

RoundRecord Learner::constant_recurrence(const Vector& g, Vector& point, const FeasibleSet& set) {
  const auto n = point.size();
  RoundRecord rec;
  rec.analysis_gradient = g;
  rec.analysis_played = point;

  acc_.grad_sq_sum += g.cwiseAbs2();
  const double prev = n > 0 ? acc_.lambda_sum[0] : 0.0;
  const double bar = 2.0 * std::sqrt(acc_.total_grad_sq()) / diameter_;
  const double inc = std::max(bar - prev, 0.0);
  acc_.q_sum += inc * point;
  acc_.g_sum += g;
  acc_.lambda_sum.setConstant(bar);

  Vector u = Vector::Zero(n);
  double weight = 1.0;
  if (bar > 0.0) {
    u = (acc_.q_sum - acc_.g_sum) / bar;
    weight = std::sqrt(bar);
    rec.dual_norm_sq = g.squaredNorm() / bar;
  }
  point = project(set, DiagPSD::scalar(static_cast<std::size_t>(n), weight), u);

  rec.analysis_next = point;
  rec.increment = Vector::Constant(n, inc);
  rec.cumulative = acc_.lambda_sum;
  return rec;
}

RoundRecord Learner::const_step(const Vector& g) {
  const Vector played = x_;
  RoundRecord rec = constant_recurrence(g, x_, config_.feasible_set);
  rec.played = played;
  rec.next = x_;
  rec.loss = g.dot(played);
  return rec;
}

RoundRecord Learner::scale_step(const Vector& g) {
  const SymPD& a = config_.feasible_set.as<TransformedBall>()->a;
  const Vector played = x_;
  // A is symmetric, so (A^{-1})^T g = A^{-1} g.
  const Vector g_hat = a.apply_inverse(g);
  RoundRecord rec = constant_recurrence(g_hat, hat_x_, *unit_ball_);
  x_ = a.apply_inverse(hat_x_);
  rec.played = played;
  rec.next = x_;
  rec.loss = g.dot(played);
  return rec;
}

RoundRecord Learner::ogd_step(const Vector& g) {
  const auto n = x_.size();
  RoundRecord rec;
  rec.played = x_;
  rec.loss = g.dot(x_);
  acc_.grad_sq_sum += g.cwiseAbs2();
  acc_.g_sum += g;

  double eta = 0.0;
  switch (config_.ogd_schedule) {
    case OgdSchedule::Adaptive: {
      const double total = acc_.total_grad_sq();
      eta = total > 0.0 ? diameter_ / (2.0 * std::sqrt(total)) : 0.0;
      break;
    }
    case OgdSchedule::Constant: eta = config_.ogd_rate; break;
    case OgdSchedule::InverseSqrt:
      eta = config_.ogd_rate / std::sqrt(static_cast<double>(acc_.round + 1));
      break;
  }
  if (eta > 0.0) {
    x_ = project(config_.feasible_set, DiagPSD::scalar(static_cast<std::size_t>(n), 1.0),
                 x_ - eta * g);
  }
  rec.next = x_;
  rec.analysis_gradient = g;
  rec.analysis_played = rec.played;
  rec.analysis_next = rec.next;
  rec.dual_norm_sq = std::numeric_limits<double>::quiet_NaN();
  return rec;
}

LinearLoss linearize(double f_value, Vector g) {
  if (!std::isfinite(f_value)) throw InvalidArgument("linearize: non-finite loss value");
  require_finite(g, "linearize");
  return LinearLoss{std::move(g)};
}

Vector quadratic_subgradient(const Vector& x, const Vector& c) {
  require_same_size(x, c, "quadratic_subgradient");
  return 2.0 * (x - c);
}

Vector absolute_subgradient(const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    g[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
  }
  return g;
}

}  // namespace ftprl
