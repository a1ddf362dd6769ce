#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace relcalc {

using Index = Eigen::Index;

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;

/// Scalar field of the ambient Hilbert spaces.
enum class Field { Real, Complex };

template <class Scalar>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  using Real = double;
  static constexpr Field field = Field::Real;
  static constexpr const char* name = "real";
};

template <>
struct scalar_traits<Complex> {
  using Real = double;
  static constexpr Field field = Field::Complex;
  static constexpr const char* name = "complex";
};

/// Default relative rank tolerance. The absolute threshold applied to the
/// singular values of a matrix is tol * sigma_max * max(rows, cols).
inline constexpr double kDefaultTol = 1e-10;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Inner product: linear in the first argument, conjugate-linear in the
/// second. (Eigen's dot() conjugates its first argument, hence the swap.)
template <class Scalar>
Scalar inner(const VectorX<Scalar>& x, const VectorX<Scalar>& y) {
  return y.dot(x);
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mismatched ambient dimensions or non-conformable shapes.
struct DimensionError : Error {
  using Error::Error;
};

/// A vector fell outside a required domain/range; carries the residual norm.
struct NotInDomainError : Error {
  double residual;
  NotInDomainError(const std::string& what, double res)
      : Error(what + " (residual " + std::to_string(res) + ")"), residual(res) {}
};

/// An operation's mathematical precondition is violated.
struct PreconditionError : Error {
  using Error::Error;
};

/// Two independent computation routes disagreed beyond tolerance; signals a
/// rank-decision fault rather than bad input.
struct NumericError : Error {
  using Error::Error;
};

/// Malformed input document.
struct ParseError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Small dense-linear-algebra helpers shared across the library
// ---------------------------------------------------------------------------

inline double rank_threshold(double sigma_max, Index rows, Index cols, double tol) {
  return tol * sigma_max * static_cast<double>(std::max<Index>(rows, cols));
}

/// Largest singular value; 0 for empty matrices.
template <class Scalar>
double op_norm(const MatrixX<Scalar>& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(a);
  return svd.singularValues()(0);
}

/// Orthonormal basis of the (right) null space of a, empty when a has full
/// column rank. `scale` fixes the reference magnitude for the rank decision;
/// pass a nonnegative value (e.g. 1 for blocks of an orthonormal basis) when
/// the matrix itself may be numerically zero, and -1 to use sigma_max.
template <class Scalar>
MatrixX<Scalar> null_space(const MatrixX<Scalar>& a, double tol, double scale = -1.0) {
  const Index n = a.cols();
  if (n == 0) return MatrixX<Scalar>(0, 0);
  if (a.rows() == 0 || a.isZero(0.0)) return MatrixX<Scalar>::Identity(n, n);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double ref = scale < 0 ? sv(0) : scale;
  const double thresh = rank_threshold(ref, a.rows(), a.cols(), tol);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > thresh) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

/// Minimum-norm least-squares solution of a x = b (column-wise for matrices).
template <class Scalar>
MatrixX<Scalar> pinv_solve(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b, double tol,
                           double scale = -1.0) {
  if (a.cols() == 0) return MatrixX<Scalar>(0, b.cols());
  if (a.rows() == 0) return MatrixX<Scalar>::Zero(a.cols(), b.cols());
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double ref = scale < 0 ? (sv.size() ? sv(0) : 0.0) : scale;
  const double thresh = rank_threshold(ref, a.rows(), a.cols(), tol);
  VectorX<Scalar> inv = VectorX<Scalar>::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) inv(i) = Scalar(1.0 / sv(i));
  return svd.matrixV() * inv.asDiagonal() * (svd.matrixU().adjoint() * b);
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues inside the
/// noise band [-clamp_tol, clamp_tol] are clamped to exactly zero before the
/// root is taken (a square root of eigenvalue noise would otherwise inflate
/// it from O(eps) to O(sqrt(eps)) and poison downstream rank decisions);
/// anything below -clamp_tol throws.
template <class Scalar>
MatrixX<Scalar> hermitian_sqrt(const MatrixX<Scalar>& h, double tol) {
  if (h.rows() != h.cols()) throw DimensionError("hermitian_sqrt: matrix not square");
  const Index n = h.rows();
  if (n == 0) return h;
  MatrixX<Scalar> sym = (h + h.adjoint()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(sym);
  VectorX<double> lam = es.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double clamp_tol = tol * scale * static_cast<double>(n);
  VectorX<double> root(n);
  for (Index i = 0; i < n; ++i) {
    if (lam(i) < -clamp_tol)
      throw PreconditionError("hermitian_sqrt: matrix is not positive semidefinite");
    root(i) = lam(i) > clamp_tol ? std::sqrt(lam(i)) : 0.0;
  }
  return es.eigenvectors() * root.asDiagonal().toDenseMatrix().template cast<Scalar>() *
         es.eigenvectors().adjoint();
}

/// Relative closeness that treats two infinities as equal.
inline bool rel_close(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0);
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace relcalc
