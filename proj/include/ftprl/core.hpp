#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace ftprl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown for malformed inputs: dimension mismatches, out-of-range
/// parameters, non-finite values.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numeric routine produces a result that violates an
/// invariant (an infeasible iterate, a NaN).
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_finite(const Vector& v, const char* what);
void require_same_size(const Vector& a, const Vector& b, const char* what);

/// Nonnegative diagonal matrix, stored as its diagonal.
class DiagPSD {
 public:
  DiagPSD() = default;
  explicit DiagPSD(Vector diag);

  static DiagPSD scalar(std::size_t n, double value);

  const Vector& diag() const { return diag_; }
  std::size_t size() const { return static_cast<std::size_t>(diag_.size()); }
  double operator[](std::size_t i) const { return diag_[static_cast<Eigen::Index>(i)]; }

  bool positive_definite() const;
  /// True when every entry equals the first one (relative tolerance 1e-12).
  bool is_scalar() const;
  double max_entry() const;

  DiagPSD sqrt() const;
  /// Requires positive_definite().
  DiagPSD inverse() const;

 private:
  Vector diag_;
};

/// Dense symmetric positive-definite matrix with a cached eigendecomposition
/// A = P diag(w) P^T.
class SymPD {
 public:
  SymPD() = default;
  /// Symmetrizes (m + m^T)/2 and rejects when the smallest eigenvalue is not
  /// above 1e-12 times the largest.
  explicit SymPD(const Matrix& m);
  static SymPD diagonal(const Vector& d);

  const Matrix& matrix() const { return matrix_; }
  const Matrix& inverse() const { return inverse_; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }

  Matrix sqrt() const;
  double min_eigenvalue() const { return eigenvalues_.minCoeff(); }
  double max_eigenvalue() const { return eigenvalues_.maxCoeff(); }
  bool is_diagonal() const;

  Vector apply(const Vector& x) const { return matrix_ * x; }
  Vector apply_inverse(const Vector& x) const { return inverse_ * x; }

 private:
  Matrix matrix_;
  Matrix inverse_;
  Matrix eigenvectors_;
  Vector eigenvalues_;
};

/// Exponent p of an Lp norm, validated to [1, inf]. Infinity is stored as
/// +inf.
class NormExponent {
 public:
  explicit NormExponent(double p);
  static NormExponent infinity() { return NormExponent(std::numeric_limits<double>::infinity()); }

  double value() const { return p_; }
  bool is_infinite() const { return p_ == std::numeric_limits<double>::infinity(); }
  /// Hoelder conjugate q with 1/p + 1/q = 1.
  NormExponent dual() const;

  friend bool operator==(NormExponent a, NormExponent b) { return a.p_ == b.p_; }

 private:
  double p_;
};

/// A round's loss reduced to its subgradient g; the round costs g^T x.
struct LinearLoss {
  Vector g;
};

double lp_norm(const Vector& v, NormExponent p);

std::string format_exponent(NormExponent p);

}  // namespace ftprl
