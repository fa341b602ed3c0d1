#pragma once

#include "ftprl/feasible_set.hpp"

#include <string_view>
#include <utility>
#include <variant>

namespace ftprl {

/// max over y in F_sym = {x - x' : x, x' in F} of y^T diag(q) y.
double max_sym_quadratic(const FeasibleSet& f, const Vector& q);

/// Running value of the regret bound function
///   B_R = 1/2 sum_t max_{y in F_sym} y^T Q_t y + sum_t g_t^T Q_{1:t}^{-1} g_t
/// for diagonal Q_t. Coordinates of zero width are skipped on the right.
class BoundTracker {
 public:
  explicit BoundTracker(FeasibleSet set);

  /// Folds in round t given diag(Q_t) and g_t. Throws NumericFailure when a
  /// coordinate with nonzero gradient has no regularization.
  void track_round(const Vector& increment, const Vector& g);

  double left_sum() const { return left_sum_; }
  double right_sum() const { return right_sum_; }
  double value() const { return left_sum_ + right_sum_; }
  const Vector& lambda_sum() const { return lambda_sum_; }
  /// Sum of squared observed gradients per coordinate.
  const Vector& per_coord_grad_sq() const { return grad_sq_; }

 private:
  FeasibleSet set_;
  Vector widths_;
  Vector lambda_sum_;
  Vector grad_sq_;
  double left_sum_ = 0.0;
  double right_sum_ = 0.0;
};

enum class PosthocFamily { Const, Diag, FullPSD };

std::string_view to_string(PosthocFamily family);

/// Infimum of the bound function over a matrix family with the gradient
/// sequence known in advance. `optimizer` holds alpha for a multiple of the
/// identity, or the diagonal for Diag.
struct PosthocResult {
  PosthocFamily family;
  double bound_value;
  std::variant<double, DiagPSD> optimizer;
};

/// Diagonal family on a box of widths D: lambda_i = sqrt(2 G_i) / D_i and
/// bound sqrt(2) sum_i D_i sqrt(G_i). Coordinates with D_i = 0 or G_i = 0 are
/// dropped (lambda_i reported as 0).
PosthocResult posthoc_diag_box(const Vector& d, const Vector& g_sq);

/// Constant family on a set of L2 diameter D: min_alpha alpha D^2 / 2 +
/// G_T / alpha = D sqrt(2 G_T).
PosthocResult posthoc_const_sphere(double diameter, double g_total);

/// Diagonal family on the unit Lp ball. Constant for p <= 2; separable for
/// p = inf; otherwise minimized numerically in log-space.
PosthocResult posthoc_lp_diag(NormExponent p, const Vector& g_sq);

/// Objective minimized by posthoc_lp_diag:
///   max_{||y||_p <= 1} 2 sum_i y_i^2 lambda_i + sum_i G_i / lambda_i.
double lp_diag_objective(NormExponent p, const Vector& g_sq, const Vector& lambda);

/// Post-hoc optimum of `family` on an arbitrary supported set, given
/// per-coordinate squared-gradient sums. Const uses the L2 diameter of any
/// set; Diag covers boxes, L2/Lp balls and transformed balls with diagonal A;
/// FullPSD covers L2 balls and transformed balls with p = 2 (for the latter
/// the optimizer alpha is stated in the transformed coordinates). Other
/// pairs throw InvalidArgument.
PosthocResult posthoc_on_set(const FeasibleSet& f, PosthocFamily family, const Vector& g_sq);

/// Full PSD family on the unit L2 ball: 2 sqrt(2 G_T), attained at
/// sqrt(G_T / 2) I.
PosthocResult posthoc_fullpsd_sphere(double g_total);

/// kappa = adaptive / posthoc. Requires posthoc > 0.
double competitive_ratio(double adaptive_bound, double posthoc_bound);

/// beta = max_i W_i / w_i for the circumscribed box W and an inscribed box w.
/// The inscribed box is of maximal volume for boxes, Lp balls and
/// transformed balls with diagonal A; for non-diagonal A it is the cube
/// inside the inscribed Euclidean ball, which still yields a valid beta.
double beta_for_set(const FeasibleSet& f);

/// lhs = sum_i x_i / sqrt(x_1 + ... + x_i) (terms with zero prefix skipped),
/// rhs = 2 sqrt(sum_i x_i). Throws on a negative entry.
std::pair<double, double> lemma_sum_check(const Vector& x);

}  // namespace ftprl
