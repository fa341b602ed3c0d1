#include "ftprl/bounds.hpp"

#include "overloaded.hpp"

#include <cmath>
#include <limits>

namespace ftprl {

namespace {

using detail::Overloaded;

// max over ||z||_p <= 1 of sum_i m_i z_i^2 for m >= 0. With w = z^2 the
// constraint is ||w||_{p/2} <= 1, whose dual norm is the conjugate of p/2.
double max_diag_quadratic_unit_ball(const Vector& m, NormExponent p) {
  if (m.size() == 0) return 0.0;
  if (p.value() <= 2.0) return m.maxCoeff();
  if (p.is_infinite()) return m.sum();
  return lp_norm(m, NormExponent(p.value() / (p.value() - 2.0)));
}

void require_nonnegative(const Vector& v, const char* what) {
  require_finite(v, what);
  if ((v.array() < 0.0).any()) {
    throw InvalidArgument(std::string(what) + ": negative entry");
  }
}

constexpr int kLogSpaceIterations = 100000;
constexpr double kLogSpaceTolerance = 1e-10;

// Minimizes 2 ||lambda||_q + sum_i G_i / lambda_i over lambda > 0 by gradient
// descent on mu = log(lambda) with step halving.
Vector minimize_lq_objective(double q, const Vector& g_sq) {
  const auto n = g_sq.size();
  auto objective = [&](const Vector& mu) {
    const Vector lambda = mu.array().exp();
    return 2.0 * lp_norm(lambda, NormExponent(q)) + (g_sq.array() / lambda.array()).sum();
  };
  auto gradient = [&](const Vector& mu) {
    const Vector lambda = mu.array().exp();
    const double norm = lp_norm(lambda, NormExponent(q));
    Vector grad(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      grad[i] = 2.0 * lambda[i] * std::pow(lambda[i] / norm, q - 1.0) - g_sq[i] / lambda[i];
    }
    return grad;
  };

  // Start at the best constant: 2 alpha n^{1/q} + sum G / alpha.
  const double alpha =
      std::sqrt(g_sq.sum() / (2.0 * std::pow(static_cast<double>(n), 1.0 / q)));
  Vector mu = Vector::Constant(n, std::log(alpha));
  double value = objective(mu);
  double step = 1.0 / std::max(value, 1.0);
  for (int it = 0; it < kLogSpaceIterations; ++it) {
    const Vector grad = gradient(mu);
    const double grad_sq = grad.squaredNorm();
    if (grad_sq == 0.0) break;
    Vector trial = mu - step * grad;
    double trial_value = objective(trial);
    while (trial_value > value - 0.5 * step * grad_sq && step > 1e-300) {
      step *= 0.5;
      trial = mu - step * grad;
      trial_value = objective(trial);
    }
    if (trial_value >= value) break;
    const double change = (value - trial_value) / value;
    mu = std::move(trial);
    value = trial_value;
    step *= 2.0;
    if (change < kLogSpaceTolerance) break;
  }
  return mu.array().exp();
}

}  // namespace

double max_sym_quadratic(const FeasibleSet& f, const Vector& q) {
  if (static_cast<std::size_t>(q.size()) != f.dimension()) {
    throw InvalidArgument("max_sym_quadratic: dimension mismatch");
  }
  return std::visit(
      Overloaded{
          [&](const Box& b) {
            const Vector d = b.hi - b.lo;
            return q.dot(d.cwiseAbs2());
          },
          [&](const L2Ball& b) { return 4.0 * b.radius * b.radius * q.maxCoeff(); },
          [&](const LpBall& b) {
            return 4.0 * b.radius * b.radius * max_diag_quadratic_unit_ball(q, b.p);
          },
          [&](const TransformedBall& t) {
            // F_sym = {y : ||A y||_p <= 2}; substitute y = A^{-1} z.
            const Matrix& inv = t.a.inverse();
            const Matrix m = inv * q.asDiagonal() * inv;
            if (t.p.value() == 2.0) {
              return 4.0 * Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .maxCoeff();
            }
            if (t.p.value() == 1.0) return 4.0 * m.diagonal().maxCoeff();
            if (t.a.is_diagonal()) return 4.0 * max_diag_quadratic_unit_ball(m.diagonal(), t.p);
            throw InvalidArgument(
                "max_sym_quadratic: transformed Lp ball with non-diagonal A needs p in {1, 2}");
          },
      },
      f.shape());
}

BoundTracker::BoundTracker(FeasibleSet set)
    : set_(std::move(set)),
      widths_(widths(set_)),
      lambda_sum_(Vector::Zero(static_cast<Eigen::Index>(set_.dimension()))),
      grad_sq_(Vector::Zero(static_cast<Eigen::Index>(set_.dimension()))) {}

void BoundTracker::track_round(const Vector& increment, const Vector& g) {
  require_same_size(increment, lambda_sum_, "track_round increment");
  require_same_size(g, lambda_sum_, "track_round gradient");
  require_nonnegative(increment, "track_round increment");
  require_finite(g, "track_round gradient");

  lambda_sum_ += increment;
  left_sum_ += 0.5 * max_sym_quadratic(set_, increment);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (widths_[i] <= 0.0 || g[i] == 0.0) continue;
    if (!(lambda_sum_[i] > 0.0)) {
      throw NumericFailure("track_round: nonzero gradient on an unregularized coordinate");
    }
    grad_sq_[i] += g[i] * g[i];
    right_sum_ += g[i] * g[i] / lambda_sum_[i];
  }
}

std::string_view to_string(PosthocFamily family) {
  switch (family) {
    case PosthocFamily::Const: return "const";
    case PosthocFamily::Diag: return "diag";
    case PosthocFamily::FullPSD: return "full";
  }
  return "unknown";
}

PosthocResult posthoc_diag_box(const Vector& d, const Vector& g_sq) {
  require_same_size(d, g_sq, "posthoc_diag_box");
  require_nonnegative(d, "posthoc_diag_box widths");
  require_nonnegative(g_sq, "posthoc_diag_box gradients");
  Vector lambda = Vector::Zero(d.size());
  double bound = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0 || g_sq[i] == 0.0) continue;
    lambda[i] = std::sqrt(2.0 * g_sq[i]) / d[i];
    bound += d[i] * std::sqrt(g_sq[i]);
  }
  return {PosthocFamily::Diag, std::sqrt(2.0) * bound, DiagPSD(lambda)};
}

PosthocResult posthoc_const_sphere(double diameter, double g_total) {
  if (!(diameter > 0.0) || !(g_total > 0.0) || !std::isfinite(diameter) ||
      !std::isfinite(g_total)) {
    throw InvalidArgument("posthoc_const_sphere: diameter and G_T must be positive");
  }
  const double alpha = std::sqrt(2.0 * g_total) / diameter;
  return {PosthocFamily::Const, diameter * std::sqrt(2.0 * g_total), alpha};
}

double lp_diag_objective(NormExponent p, const Vector& g_sq, const Vector& lambda) {
  require_same_size(g_sq, lambda, "lp_diag_objective");
  double right = 0.0;
  for (Eigen::Index i = 0; i < g_sq.size(); ++i) {
    if (g_sq[i] == 0.0) continue;
    right += g_sq[i] / lambda[i];
  }
  return 2.0 * max_diag_quadratic_unit_ball(lambda, p) + right;
}

PosthocResult posthoc_lp_diag(NormExponent p, const Vector& g_sq) {
  require_nonnegative(g_sq, "posthoc_lp_diag");
  const auto n = g_sq.size();
  Vector lambda = Vector::Zero(n);

  // Zero-mass coordinates contribute nothing and are dropped.
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (g_sq[i] > 0.0) active.push_back(i);
  }
  if (active.empty()) return {PosthocFamily::Diag, 0.0, DiagPSD(lambda)};
  Vector g_active(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) g_active[static_cast<Eigen::Index>(k)] = g_sq[active[k]];

  Vector lambda_active;
  if (p.value() <= 2.0) {
    const double alpha = std::sqrt(g_active.sum() / 2.0);
    lambda_active = Vector::Constant(g_active.size(), alpha);
  } else if (p.is_infinite()) {
    lambda_active = (g_active / 2.0).cwiseSqrt();
  } else {
    lambda_active = minimize_lq_objective(p.value() / (p.value() - 2.0), g_active);
  }
  for (std::size_t k = 0; k < active.size(); ++k) lambda[active[k]] = lambda_active[static_cast<Eigen::Index>(k)];

  const double bound = lp_diag_objective(p, g_active, lambda_active);
  return {PosthocFamily::Diag, bound, DiagPSD(lambda)};
}

PosthocResult posthoc_fullpsd_sphere(double g_total) {
  if (!(g_total > 0.0) || !std::isfinite(g_total)) {
    throw InvalidArgument("posthoc_fullpsd_sphere: G_T must be positive");
  }
  return {PosthocFamily::FullPSD, 2.0 * std::sqrt(2.0 * g_total), std::sqrt(g_total / 2.0)};
}

PosthocResult posthoc_on_set(const FeasibleSet& f, PosthocFamily family, const Vector& g_sq) {
  if (static_cast<std::size_t>(g_sq.size()) != f.dimension()) {
    throw InvalidArgument("posthoc: gradient dimension does not match the feasible set");
  }
  require_nonnegative(g_sq, "posthoc gradients");
  if (family == PosthocFamily::Const) return posthoc_const_sphere(l2_diameter(f), g_sq.sum());

  if (family == PosthocFamily::Diag && f.is_box()) return posthoc_diag_box(widths(f), g_sq);

  // Every remaining case is a unit ball in coordinates y = d .* x, with
  // d = 1/r for balls of radius r and d = diag(A) for diagonal transformed
  // balls. There G_i maps to G_i / d_i^2 and lambda_x = d^2 .* lambda_y.
  NormExponent p(2.0);
  Vector d = Vector::Ones(g_sq.size());
  const auto* transformed = f.as<TransformedBall>();
  if (const auto* l2 = f.as<L2Ball>()) {
    d.setConstant(1.0 / l2->radius);
  } else if (const auto* lp = f.as<LpBall>()) {
    p = lp->p;
    d.setConstant(1.0 / lp->radius);
  } else if (transformed) {
    p = transformed->p;
  }

  if (family == PosthocFamily::FullPSD) {
    if (f.is_box() || p.value() != 2.0) {
      throw InvalidArgument("full-PSD post-hoc supported only for L2 balls/ellipsoids");
    }
    if (transformed) {
      // G-hat = sum_t ||A^{-1} g_t||^2 needs the gradients themselves unless
      // A is diagonal.
      if (!transformed->a.is_diagonal()) {
        throw InvalidArgument("full-PSD post-hoc on a non-diagonal ellipsoid needs the gradient trace");
      }
      d = transformed->a.matrix().diagonal();
    }
    PosthocResult unit = posthoc_fullpsd_sphere(g_sq.cwiseQuotient(d.cwiseAbs2()).sum());
    if (transformed) return unit;  // optimizer alpha I is stated in y coordinates
    return {PosthocFamily::FullPSD, unit.bound_value, std::get<double>(unit.optimizer) * d[0] * d[0]};
  }

  if (transformed) {
    if (!transformed->a.is_diagonal()) {
      throw InvalidArgument("diagonal post-hoc on a transformed ball requires diagonal A");
    }
    d = transformed->a.matrix().diagonal();
  }
  PosthocResult unit = posthoc_lp_diag(p, g_sq.cwiseQuotient(d.cwiseAbs2()));
  const Vector lambda = std::get<DiagPSD>(unit.optimizer).diag();
  return {PosthocFamily::Diag, unit.bound_value, DiagPSD(Vector(lambda.cwiseProduct(d.cwiseAbs2())))};
}

double competitive_ratio(double adaptive_bound, double posthoc_bound) {
  if (!(posthoc_bound > 0.0) || !std::isfinite(posthoc_bound) || !std::isfinite(adaptive_bound)) {
    throw InvalidArgument("competitive_ratio: post-hoc bound must be positive and finite");
  }
  return adaptive_bound / posthoc_bound;
}

double beta_for_set(const FeasibleSet& f) {
  const double n = static_cast<double>(f.dimension());
  return std::visit(
      Overloaded{
          [](const Box& b) {
            if (((b.hi - b.lo).array() <= 0.0).any()) {
              throw InvalidArgument("beta_for_set: box has an empty interior");
            }
            return 1.0;
          },
          [&](const L2Ball&) { return std::sqrt(n); },
          [&](const LpBall& b) { return b.p.is_infinite() ? 1.0 : std::pow(n, 1.0 / b.p.value()); },
          [&](const TransformedBall& t) {
            const double cube = t.p.is_infinite() ? 1.0 : std::pow(n, 1.0 / t.p.value());
            if (t.a.is_diagonal()) return cube;
            // ||A x||_p <= n^{max(0, 1/p - 1/2)} lmax(A) ||x||_2 bounds an
            // inscribed Euclidean ball; take the cube inside it.
            const double spread =
                t.p.value() < 2.0 ? std::pow(n, 1.0 / t.p.value() - 0.5) : 1.0;
            const double rho = 1.0 / (t.a.max_eigenvalue() * spread);
            const double inner = 2.0 * rho / std::sqrt(n);
            return widths(FeasibleSet(t)).maxCoeff() / inner;
          },
      },
      f.shape());
}

std::pair<double, double> lemma_sum_check(const Vector& x) {
  require_nonnegative(x, "lemma_sum_check");
  double prefix = 0.0;
  double lhs = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    prefix += x[i];
    if (prefix > 0.0) lhs += x[i] / std::sqrt(prefix);
  }
  return {lhs, 2.0 * std::sqrt(prefix)};
}

}  // namespace ftprl
