#include "ftprl/projection.hpp"

#include "overloaded.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace ftprl {

namespace {

using detail::Overloaded;

constexpr int kBisectionIterations = 100;
constexpr double kBisectionInterval = 1e-12;
constexpr int kFallbackIterations = 10000;
constexpr double kFallbackStep = 1e-10;

Vector clamp(const Vector& u, const Vector& lo, const Vector& hi) {
  return u.cwiseMax(lo).cwiseMin(hi);
}

// Smallest mu >= 0 with gauge(mu) <= target, where gauge is nonincreasing.
// Returns the feasible end of the final bracket. The interval test is
// relative because the multiplier scales with the regularization strength.
double bisect_multiplier(double hi, double target, const std::function<double(double)>& gauge) {
  hi = std::max(hi, std::numeric_limits<double>::min());
  while (gauge(hi) > target) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < kBisectionIterations && hi - lo >= kBisectionInterval * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gauge(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

Vector weighted_l2_ball(const Vector& w2, const Vector& u, double radius) {
  const double un = u.norm();
  if (un <= radius) return u;
  auto point = [&](double mu) -> Vector {
    return (w2.array() * u.array() / (w2.array() + mu)).matrix();
  };
  const double bracket = w2.maxCoeff() * (un / radius - 1.0);
  const double mu = bisect_multiplier(bracket, radius, [&](double m) { return point(m).norm(); });
  return point(mu);
}

Vector weighted_ellipsoid(const Vector& w2, const SymPD& shape, const Vector& u) {
  const Matrix& m = shape.matrix();
  if ((m * u).norm() <= 1.0) return u;
  const Matrix m2 = m * m;
  const Vector rhs = w2.cwiseProduct(u);
  auto point = [&](double mu) -> Vector {
    Matrix lhs = mu * m2;
    lhs.diagonal() += w2;
    return lhs.ldlt().solve(rhs);
  };
  const double mu = bisect_multiplier(w2.maxCoeff(), 1.0, [&](double x) { return (m * point(x)).norm(); });
  return point(mu);
}

// Euclidean projection onto the L1 ball via the sorted-threshold rule.
Vector project_l1(const Vector& u, double radius) {
  if (u.cwiseAbs().sum() <= radius) return u;
  std::vector<double> mags(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) mags[i] = std::abs(u[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (mags[k] > candidate) theta = candidate;
  }
  Vector x(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double m = std::max(std::abs(u[i]) - theta, 0.0);
    x[i] = u[i] < 0.0 ? -m : m;
  }
  return x;
}

// Solves z + mu p z^{p-1} = b for z in [0, b].
double shrink_coordinate(double b, double mu, double p) {
  if (b == 0.0 || mu == 0.0) return b;
  double lo = 0.0;
  double hi = b;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * b; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid + mu * p * std::pow(mid, p - 1.0) > b) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

Vector project_lp_generic(const Vector& u, double p, double radius) {
  const NormExponent expo(p);
  if (lp_norm(u, expo) <= radius) return u;
  auto point = [&](double mu) -> Vector {
    Vector x(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double z = shrink_coordinate(std::abs(u[i]), mu, p);
      x[i] = u[i] < 0.0 ? -z : z;
    }
    return x;
  };
  const double mu = bisect_multiplier(1.0, radius, [&](double m) { return lp_norm(point(m), expo); });
  Vector x = point(mu);
  // Pull the point onto the feasible side of the bisection tolerance.
  const double norm = lp_norm(x, expo);
  if (norm > radius) x *= radius / norm;
  return x;
}

Vector projected_gradient(const Vector& w2, const Vector& u,
                          const std::function<Vector(const Vector&)>& euclidean) {
  const double step = 1.0 / w2.maxCoeff();
  Vector x = euclidean(u);
  for (int it = 0; it < kFallbackIterations; ++it) {
    const Vector grad = w2.cwiseProduct(x - u);
    Vector next = euclidean(x - step * grad);
    const double change = (next - x).norm();
    x = std::move(next);
    if (change < kFallbackStep) break;
  }
  return x;
}

}  // namespace

Vector euclidean_project_lp_ball(const Vector& u, NormExponent p, double radius) {
  if (p.is_infinite()) {
    const auto n = u.size();
    return clamp(u, Vector::Constant(n, -radius), Vector::Constant(n, radius));
  }
  if (p.value() == 1.0) return project_l1(u, radius);
  if (p.value() == 2.0) {
    const double un = u.norm();
    return un <= radius ? u : Vector(u * (radius / un));
  }
  return project_lp_generic(u, p.value(), radius);
}

Vector project(const FeasibleSet& f, const DiagPSD& a, const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != f.dimension() || a.size() != f.dimension()) {
    throw InvalidArgument("project: dimension mismatch");
  }
  if (!a.positive_definite()) {
    throw InvalidArgument("project: weight matrix must be positive definite");
  }
  require_finite(u, "project");
  const Vector w2 = a.diag().cwiseAbs2();
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vector { return clamp(u, b.lo, b.hi); },
          [&](const L2Ball& b) -> Vector {
            if (a.is_scalar()) return euclidean_project_lp_ball(u, NormExponent(2.0), b.radius);
            return weighted_l2_ball(w2, u, b.radius);
          },
          [&](const LpBall& b) -> Vector {
            if (b.p.is_infinite() || a.is_scalar()) return euclidean_project_lp_ball(u, b.p, b.radius);
            if (b.p.value() == 2.0) return weighted_l2_ball(w2, u, b.radius);
            return projected_gradient(w2, u, [&](const Vector& v) {
              return euclidean_project_lp_ball(v, b.p, b.radius);
            });
          },
          [&](const TransformedBall& t) -> Vector {
            if (t.p.value() != 2.0) {
              throw InvalidArgument(
                  "project: transformed balls are supported for p = 2 only; use the Scale "
                  "learner for other exponents");
            }
            return weighted_ellipsoid(w2, t.a, u);
          },
      },
      f.shape());
}

}  // namespace ftprl
