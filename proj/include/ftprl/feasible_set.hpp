#pragma once

#include "ftprl/core.hpp"

#include <string>
#include <variant>

namespace ftprl {

/// Axis-aligned box [lo_i, hi_i] with lo_i <= 0 <= hi_i.
struct Box {
  Vector lo;
  Vector hi;
};

/// {x : ||x||_2 <= radius} in R^n.
struct L2Ball {
  std::size_t n;
  double radius;
};

/// {x : ||x||_p <= radius} in R^n.
struct LpBall {
  std::size_t n;
  NormExponent p;
  double radius;
};

/// {x : ||A x||_p <= 1}.
struct TransformedBall {
  SymPD a;
  NormExponent p;
};

/// Absolute slack applied by membership tests.
inline constexpr double kMembershipTolerance = 1e-9;

/// A convex, compact feasible set containing the origin. Immutable once
/// constructed; construction validates the variant's invariants.
class FeasibleSet {
 public:
  using Shape = std::variant<Box, L2Ball, LpBall, TransformedBall>;

  explicit FeasibleSet(Shape shape);

  static FeasibleSet box(Vector lo, Vector hi);
  static FeasibleSet cube(std::size_t n, double half_width);
  static FeasibleSet l2_ball(std::size_t n, double radius);
  static FeasibleSet lp_ball(std::size_t n, NormExponent p, double radius);
  static FeasibleSet transformed_ball(SymPD a, NormExponent p);

  const Shape& shape() const { return shape_; }
  std::size_t dimension() const { return dimension_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&shape_);
  }

  bool is_box() const { return as<Box>() != nullptr; }
  /// True for an L2 ball, or an Lp ball with p = 2.
  bool is_euclidean_ball() const;
  /// True for {x : ||Ax||_2 <= 1} (any SymPD A, including the identity).
  bool is_ellipsoid() const;

  bool contains(const Vector& x, double tol = kMembershipTolerance) const;

  /// Value of the gauge that defines the set, e.g. ||Ax||_p for a
  /// transformed ball; for a box the largest violation of the bounds.
  double excess(const Vector& x) const;

  std::string describe() const;

 private:
  Shape shape_;
  std::size_t dimension_;
};

/// D_i = max_{x,x' in F} |x_i - x'_i|.
Vector widths(const FeasibleSet& f);

/// max_{x,x' in F} ||x - x'||_2.
double l2_diameter(const FeasibleSet& f);

/// argmin_{x in F} c^T x. Returns 0 for c = 0.
Vector linear_minimizer(const FeasibleSet& f, const Vector& c);

/// argmin over the unit Lp ball of c^T x.
Vector unit_ball_minimizer(const Vector& c, NormExponent p);

}  // namespace ftprl
