#pragma once

// Random instance generators and brute-force oracles shared by the tests.
// Oracles here avoid the library's projection and minimization code paths.

#include "ftprl/bounds.hpp"
#include "ftprl/learner.hpp"
#include "ftprl/problems.hpp"
#include "ftprl/projection.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace ftprl::testing {

inline Vector uniform_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline Vector normal_vector(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.next() % (hi - lo + 1));
}

enum class SetKind { Box, L2Ball, DiagEllipsoid, FullEllipsoid };

inline const char* set_kind_name(SetKind k) {
  switch (k) {
    case SetKind::Box: return "box";
    case SetKind::L2Ball: return "l2ball";
    case SetKind::DiagEllipsoid: return "ellipsoid";
    case SetKind::FullEllipsoid: return "full-ellipsoid";
  }
  return "?";
}

inline Matrix random_spd(Rng& rng, Eigen::Index n) {
  Matrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = rng.uniform(-1.0, 1.0);
  return b.transpose() * b + 0.5 * Matrix::Identity(n, n);
}

inline FeasibleSet random_set(Rng& rng, SetKind kind, std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  switch (kind) {
    case SetKind::Box:
      return FeasibleSet::box(-uniform_vector(rng, m, 0.1, 1.5), uniform_vector(rng, m, 0.1, 1.5));
    case SetKind::L2Ball:
      return FeasibleSet::l2_ball(n, rng.uniform(0.5, 2.0));
    case SetKind::DiagEllipsoid:
      return FeasibleSet::transformed_ball(SymPD::diagonal(uniform_vector(rng, m, 0.5, 3.0)),
                                           NormExponent(2.0));
    case SetKind::FullEllipsoid:
      return FeasibleSet::transformed_ball(SymPD(random_spd(rng, m)), NormExponent(2.0));
  }
  throw InvalidArgument("unknown set kind");
}

inline std::vector<Vector> uniform_rows(Rng& rng, std::size_t n, std::size_t rounds) {
  std::vector<Vector> rows;
  rows.reserve(rounds);
  for (std::size_t t = 0; t < rounds; ++t) {
    rows.push_back(uniform_vector(rng, static_cast<Eigen::Index>(n), -1.0, 1.0));
  }
  return rows;
}

/// Uniform sample from F by rejection from its bounding box for balls and
/// by the substitution x = A^{-1} y for transformed balls.
inline Vector sample_point(Rng& rng, const FeasibleSet& f) {
  const auto n = static_cast<Eigen::Index>(f.dimension());
  if (const auto* b = f.as<Box>()) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform(b->lo[i], b->hi[i]);
    return x;
  }
  if (const auto* t = f.as<TransformedBall>()) {
    while (true) {
      const Vector y = uniform_vector(rng, n, -1.0, 1.0);
      if (lp_norm(y, t->p) <= 1.0) return t->a.apply_inverse(y);
    }
  }
  double r = 0.0;
  NormExponent p(2.0);
  if (const auto* l2 = f.as<L2Ball>()) r = l2->radius;
  if (const auto* lp = f.as<LpBall>()) {
    r = lp->radius;
    p = lp->p;
  }
  while (true) {
    const Vector x = uniform_vector(rng, n, -r, r);
    if (lp_norm(x, p) <= r) return x;
  }
}

/// Independent minimizer of h^T x + 1/2 x^T H x over F via accelerated
/// projected gradient in coordinates where F is a box or a unit L2 ball
/// (y = A x for ellipsoids, y = x / r for balls).
inline Vector fista_quadratic(const FeasibleSet& f, const Matrix& h_mat, const Vector& h,
                              int iterations = 20000) {
  const auto n = h.size();
  Matrix to_x = Matrix::Identity(n, n);  // x = to_x * y
  std::function<Vector(const Vector&)> project_y;
  if (const auto* b = f.as<Box>()) {
    Vector lo = b->lo;
    Vector hi = b->hi;
    project_y = [lo, hi](const Vector& y) { return Vector(y.cwiseMax(lo).cwiseMin(hi)); };
  } else {
    if (const auto* l2 = f.as<L2Ball>()) to_x *= l2->radius;
    if (const auto* t = f.as<TransformedBall>()) to_x = t->a.inverse();
    project_y = [](const Vector& y) {
      const double norm = y.norm();
      return norm > 1.0 ? Vector(y / norm) : y;
    };
  }
  const Matrix hy = to_x.transpose() * h_mat * to_x;
  const Vector cy = to_x.transpose() * h;
  const double lipschitz =
      Eigen::SelfAdjointEigenSolver<Matrix>(hy, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  Vector y = Vector::Zero(n);
  Vector z = y;
  double s = 1.0;
  for (int k = 0; k < iterations; ++k) {
    const Vector next = project_y(z - (cy + hy * z) / lipschitz);
    const double s_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * s * s));
    z = next + ((s - 1.0) / s_next) * (next - y);
    y = next;
    s = s_next;
  }
  return to_x * y;
}

/// Weighted projection oracle for n = 2 sets whose boundary has a polar
/// parametrization: dense angular scan then golden-section refinement.
inline Vector boundary_projection_2d(const FeasibleSet& f, const Vector& w, const Vector& u) {
  if (f.contains(u, 0.0)) return u;
  auto boundary = [&](double theta) -> Vector {
    Vector d(2);
    d << std::cos(theta), std::sin(theta);
    if (const auto* t = f.as<TransformedBall>()) {
      return t->a.apply_inverse(d / lp_norm(d, t->p));
    }
    if (const auto* lp = f.as<LpBall>()) return d * (lp->radius / lp_norm(d, lp->p));
    return d * f.as<L2Ball>()->radius;
  };
  auto cost = [&](double theta) { return w.cwiseProduct(boundary(theta) - u).squaredNorm(); };
  const int grid = 20000;
  const double step = 2.0 * std::numbers::pi / grid;
  int best = 0;
  for (int k = 1; k < grid; ++k) {
    if (cost(k * step) < cost(best * step)) best = k;
  }
  double a = (best - 1) * step;
  double b = (best + 1) * step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    if (cost(c) < cost(d)) b = d; else a = c;
  }
  return boundary(0.5 * (a + b));
}

/// Regret of a learner run directly from its round records, plus the pieces
/// of the FTRL bound r_{1:T}(x*) + sum_t ||A_t^{-1} g_t||^2 computed
/// term by term in analysis coordinates.
struct BoundCheck {
  double regret = 0.0;
  double reg_at_comparator = 0.0;
  double dual_sum = 0.0;
  double btrl_regret = 0.0;  // loss of x_{t+1} against x*
  double max_round_gap = -1e300;
  std::vector<double> losses;
};

inline BoundCheck check_run(const LearnerConfig& config, const std::vector<Vector>& rows) {
  Learner learner(config);
  const auto n = static_cast<Eigen::Index>(config.feasible_set.dimension());
  std::vector<RoundRecord> records;
  Vector g_sum = Vector::Zero(n);
  Vector g_hat_sum = Vector::Zero(n);
  BoundCheck out;
  double loss = 0.0;
  double hat_loss_next = 0.0;
  for (const Vector& g : rows) {
    RoundRecord rec = learner.step(g);
    loss += g.dot(rec.played);
    out.losses.push_back(g.dot(rec.played));
    g_sum += g;
    g_hat_sum += rec.analysis_gradient;
    hat_loss_next += rec.analysis_gradient.dot(rec.analysis_next);
    out.dual_sum += rec.dual_norm_sq;
    out.max_round_gap = std::max(
        out.max_round_gap,
        rec.analysis_gradient.dot(rec.analysis_played - rec.analysis_next) - rec.dual_norm_sq);
    records.push_back(std::move(rec));
  }
  const Vector x_star = linear_minimizer(config.feasible_set, g_sum);
  out.regret = loss - g_sum.dot(x_star);
  const Vector y_star = linear_minimizer(learner.analysis_set(), g_hat_sum);
  for (const auto& rec : records) {
    const Vector d = y_star - rec.analysis_played;
    out.reg_at_comparator += 0.5 * rec.increment.dot(d.cwiseAbs2());
  }
  out.btrl_regret = hat_loss_next - g_hat_sum.dot(y_star);
  return out;
}

}  // namespace ftprl::testing
