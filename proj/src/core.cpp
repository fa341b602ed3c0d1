#include "ftprl/core.hpp"

#include <cmath>
#include <sstream>

namespace ftprl {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidArgument(std::string(what) + ": non-finite entry");
  }
}

void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a.size() << " vs " << b.size() << ")";
    throw InvalidArgument(os.str());
  }
}

DiagPSD::DiagPSD(Vector diag) : diag_(std::move(diag)) {
  require_finite(diag_, "DiagPSD");
  if ((diag_.array() < 0.0).any()) {
    throw InvalidArgument("DiagPSD: negative diagonal entry");
  }
}

DiagPSD DiagPSD::scalar(std::size_t n, double value) {
  return DiagPSD(Vector::Constant(static_cast<Eigen::Index>(n), value));
}

bool DiagPSD::positive_definite() const {
  return diag_.size() > 0 && (diag_.array() > 0.0).all();
}

bool DiagPSD::is_scalar() const {
  if (diag_.size() == 0) return true;
  const double first = diag_[0];
  const double scale = diag_.cwiseAbs().maxCoeff();
  return ((diag_.array() - first).abs() <= 1e-12 * scale).all();
}

double DiagPSD::max_entry() const { return diag_.size() == 0 ? 0.0 : diag_.maxCoeff(); }

DiagPSD DiagPSD::sqrt() const { return DiagPSD(diag_.cwiseSqrt()); }

DiagPSD DiagPSD::inverse() const {
  if (!positive_definite()) {
    throw InvalidArgument("DiagPSD::inverse: matrix is not positive definite");
  }
  return DiagPSD(diag_.cwiseInverse());
}

SymPD::SymPD(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidArgument("SymPD: matrix must be square and non-empty");
  }
  if (!m.allFinite()) {
    throw InvalidArgument("SymPD: non-finite entry");
  }
  matrix_ = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_);
  if (eig.info() != Eigen::Success) {
    throw InvalidArgument("SymPD: eigendecomposition failed");
  }
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
  const double hi = eigenvalues_.maxCoeff();
  const double lo = eigenvalues_.minCoeff();
  if (!(hi > 0.0) || lo <= 1e-12 * hi) {
    throw InvalidArgument("SymPD: matrix is not positive definite");
  }
  inverse_ = eigenvectors_ * eigenvalues_.cwiseInverse().asDiagonal() * eigenvectors_.transpose();
  inverse_ = 0.5 * (inverse_ + inverse_.transpose());
  if (is_diagonal()) {
    // Exact inverse avoids round-off from the eigenvector products.
    inverse_ = matrix_.diagonal().cwiseInverse().asDiagonal();
  }
}

SymPD SymPD::diagonal(const Vector& d) { return SymPD(Matrix(d.asDiagonal())); }

Matrix SymPD::sqrt() const {
  return eigenvectors_ * eigenvalues_.cwiseSqrt().asDiagonal() * eigenvectors_.transpose();
}

bool SymPD::is_diagonal() const {
  const Matrix off = matrix_ - Matrix(matrix_.diagonal().asDiagonal());
  return off.cwiseAbs().maxCoeff() == 0.0;
}

NormExponent::NormExponent(double p) : p_(p) {
  if (std::isnan(p) || p < 1.0) {
    throw InvalidArgument("norm exponent must lie in [1, inf]");
  }
}

NormExponent NormExponent::dual() const {
  if (is_infinite()) return NormExponent(1.0);
  if (p_ == 1.0) return infinity();
  return NormExponent(p_ / (p_ - 1.0));
}

double lp_norm(const Vector& v, NormExponent p) {
  if (v.size() == 0) return 0.0;
  if (p.is_infinite()) return v.cwiseAbs().maxCoeff();
  if (p.value() == 1.0) return v.cwiseAbs().sum();
  if (p.value() == 2.0) return v.norm();
  // Scale by the max entry so large p does not overflow.
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  const double s = (v.cwiseAbs() / m).array().pow(p.value()).sum();
  return m * std::pow(s, 1.0 / p.value());
}

std::string format_exponent(NormExponent p) {
  if (p.is_infinite()) return "inf";
  std::ostringstream os;
  os << p.value();
  return os.str();
}

}  // namespace ftprl
