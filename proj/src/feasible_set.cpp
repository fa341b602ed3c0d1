#include "ftprl/feasible_set.hpp"

#include "overloaded.hpp"

#include <cmath>
#include <sstream>

namespace ftprl {

namespace {

using detail::Overloaded;

std::size_t validate(const FeasibleSet::Shape& shape) {
  return std::visit(
      Overloaded{
          [](const Box& b) -> std::size_t {
            require_same_size(b.lo, b.hi, "Box");
            require_finite(b.lo, "Box lower bound");
            require_finite(b.hi, "Box upper bound");
            if (b.lo.size() == 0) throw InvalidArgument("Box: empty dimension");
            if ((b.lo.array() > 0.0).any() || (b.hi.array() < 0.0).any()) {
              throw InvalidArgument("Box: origin must be feasible (lo <= 0 <= hi)");
            }
            if (!((b.hi - b.lo).array() > 0.0).any()) {
              throw InvalidArgument("Box: at least one coordinate must have positive width");
            }
            return static_cast<std::size_t>(b.lo.size());
          },
          [](const L2Ball& b) -> std::size_t {
            if (b.n == 0) throw InvalidArgument("L2Ball: empty dimension");
            if (!(b.radius > 0.0) || !std::isfinite(b.radius)) {
              throw InvalidArgument("L2Ball: radius must be positive and finite");
            }
            return b.n;
          },
          [](const LpBall& b) -> std::size_t {
            if (b.n == 0) throw InvalidArgument("LpBall: empty dimension");
            if (!(b.radius > 0.0) || !std::isfinite(b.radius)) {
              throw InvalidArgument("LpBall: radius must be positive and finite");
            }
            return b.n;
          },
          [](const TransformedBall& b) -> std::size_t {
            if (b.a.size() == 0) throw InvalidArgument("TransformedBall: empty matrix");
            return b.a.size();
          },
      },
      shape);
}

// Largest value of |e_i^T B y| over the unit Lp ball is the dual norm of
// row i of B.
Vector transformed_half_widths(const TransformedBall& t) {
  const Matrix& inv = t.a.inverse();
  const NormExponent q = t.p.dual();
  Vector out(inv.rows());
  for (Eigen::Index i = 0; i < inv.rows(); ++i) {
    out[i] = lp_norm(inv.row(i).transpose(), q);
  }
  return out;
}

}  // namespace

FeasibleSet::FeasibleSet(Shape shape) : shape_(std::move(shape)), dimension_(validate(shape_)) {}

FeasibleSet FeasibleSet::box(Vector lo, Vector hi) {
  return FeasibleSet(Box{std::move(lo), std::move(hi)});
}

FeasibleSet FeasibleSet::cube(std::size_t n, double half_width) {
  const auto m = static_cast<Eigen::Index>(n);
  return box(Vector::Constant(m, -half_width), Vector::Constant(m, half_width));
}

FeasibleSet FeasibleSet::l2_ball(std::size_t n, double radius) {
  return FeasibleSet(L2Ball{n, radius});
}

FeasibleSet FeasibleSet::lp_ball(std::size_t n, NormExponent p, double radius) {
  return FeasibleSet(LpBall{n, p, radius});
}

FeasibleSet FeasibleSet::transformed_ball(SymPD a, NormExponent p) {
  return FeasibleSet(TransformedBall{std::move(a), p});
}

bool FeasibleSet::is_euclidean_ball() const {
  if (as<L2Ball>()) return true;
  const auto* lp = as<LpBall>();
  return lp && lp->p.value() == 2.0;
}

bool FeasibleSet::is_ellipsoid() const {
  const auto* t = as<TransformedBall>();
  return t && t->p.value() == 2.0;
}

double FeasibleSet::excess(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension_) {
    throw InvalidArgument("FeasibleSet: dimension mismatch");
  }
  return std::visit(
      Overloaded{
          [&](const Box& b) {
            const double below = (b.lo - x).maxCoeff();
            const double above = (x - b.hi).maxCoeff();
            return std::max(below, above);
          },
          [&](const L2Ball& b) { return x.norm() - b.radius; },
          [&](const LpBall& b) { return lp_norm(x, b.p) - b.radius; },
          [&](const TransformedBall& t) { return lp_norm(t.a.apply(x), t.p) - 1.0; },
      },
      shape_);
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (!x.allFinite()) return false;
  return excess(x) <= tol;
}

std::string FeasibleSet::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Box& b) {
                   os << "box(n=" << b.lo.size() << ")";
                 },
                 [&](const L2Ball& b) { os << "l2ball(n=" << b.n << ",r=" << b.radius << ")"; },
                 [&](const LpBall& b) {
                   os << "lpball(n=" << b.n << ",p=" << format_exponent(b.p) << ",r=" << b.radius
                      << ")";
                 },
                 [&](const TransformedBall& t) {
                   os << "transformed(n=" << t.a.size() << ",p=" << format_exponent(t.p) << ")";
                 },
             },
             shape_);
  return os.str();
}

Vector widths(const FeasibleSet& f) {
  const auto n = static_cast<Eigen::Index>(f.dimension());
  return std::visit(
      Overloaded{
          [](const Box& b) -> Vector { return b.hi - b.lo; },
          [&](const L2Ball& b) -> Vector { return Vector::Constant(n, 2.0 * b.radius); },
          [&](const LpBall& b) -> Vector { return Vector::Constant(n, 2.0 * b.radius); },
          [](const TransformedBall& t) -> Vector { return 2.0 * transformed_half_widths(t); },
      },
      f.shape());
}

double l2_diameter(const FeasibleSet& f) {
  return std::visit(
      Overloaded{
          [](const Box& b) { return (b.hi - b.lo).norm(); },
          [](const L2Ball& b) { return 2.0 * b.radius; },
          [](const LpBall& b) {
            const double p = b.p.value();
            if (p <= 2.0) return 2.0 * b.radius;
            const double n = static_cast<double>(b.n);
            const double expo = b.p.is_infinite() ? 0.5 : 0.5 - 1.0 / p;
            return 2.0 * b.radius * std::pow(n, expo);
          },
          [](const TransformedBall& t) {
            const double p = t.p.value();
            if (p == 2.0) return 2.0 / t.a.min_eigenvalue();
            if (p == 1.0) {
              // The maximum of a convex function over the L1 ball sits at a
              // vertex +-e_i.
              return 2.0 * t.a.inverse().colwise().norm().maxCoeff();
            }
            if (t.a.is_diagonal()) {
              const Vector a2 = t.a.matrix().diagonal().cwiseInverse().cwiseAbs2();
              if (p < 2.0) return 2.0 * std::sqrt(a2.maxCoeff());
              const NormExponent r = t.p.is_infinite() ? NormExponent(1.0)
                                                       : NormExponent(p / (p - 2.0));
              return 2.0 * std::sqrt(lp_norm(a2, r));
            }
            throw InvalidArgument(
                "l2_diameter: transformed Lp ball with non-diagonal A needs p in {1, 2}");
          },
      },
      f.shape());
}

Vector unit_ball_minimizer(const Vector& c, NormExponent p) {
  const Eigen::Index n = c.size();
  Vector x = Vector::Zero(n);
  if (n == 0 || c.cwiseAbs().maxCoeff() == 0.0) return x;
  if (p.is_infinite()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (c[i] > 0.0) x[i] = -1.0;
      if (c[i] < 0.0) x[i] = 1.0;
    }
    return x;
  }
  if (p.value() == 1.0) {
    Eigen::Index j = 0;
    c.cwiseAbs().maxCoeff(&j);
    x[j] = c[j] > 0.0 ? -1.0 : 1.0;
    return x;
  }
  if (p.value() == 2.0) return -c / c.norm();
  // Hoelder equality case: x_i = -sign(c_i) |c_i|^{q-1} / ||c||_q^{q-1}.
  const double q = p.dual().value();
  const double m = c.cwiseAbs().maxCoeff();
  const Vector scaled = c / m;
  const double norm_q = lp_norm(scaled, p.dual());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mag = std::pow(std::abs(scaled[i]) / norm_q, q - 1.0);
    x[i] = scaled[i] > 0.0 ? -mag : (scaled[i] < 0.0 ? mag : 0.0);
  }
  return x;
}

Vector linear_minimizer(const FeasibleSet& f, const Vector& c) {
  if (static_cast<std::size_t>(c.size()) != f.dimension()) {
    throw InvalidArgument("linear_minimizer: dimension mismatch");
  }
  require_finite(c, "linear_minimizer");
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vector {
            Vector x = Vector::Zero(c.size());
            for (Eigen::Index i = 0; i < c.size(); ++i) {
              if (c[i] > 0.0) x[i] = b.lo[i];
              if (c[i] < 0.0) x[i] = b.hi[i];
            }
            return x;
          },
          [&](const L2Ball& b) -> Vector {
            return b.radius * unit_ball_minimizer(c, NormExponent(2.0));
          },
          [&](const LpBall& b) -> Vector { return b.radius * unit_ball_minimizer(c, b.p); },
          [&](const TransformedBall& t) -> Vector {
            // x = A^{-1} y with ||y||_p <= 1, and c^T A^{-1} y = (A^{-1} c)^T y.
            return t.a.apply_inverse(unit_ball_minimizer(t.a.apply_inverse(c), t.p));
          },
      },
      f.shape());
}

}  // namespace ftprl
