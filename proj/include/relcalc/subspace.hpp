#pragma once

#include <algorithm>
#include <vector>

#include "relcalc/core.hpp"

namespace relcalc {

/// A linear subspace of C^n (or R^n), stored as an orthonormal basis.
///
/// The zero subspace has an empty basis (never zero columns). Equality and
/// containment are principal-angle based: bases are non-unique and are never
/// compared entrywise. The rank tolerance used at construction is recorded
/// and propagated through derived subspaces.
template <class Scalar>
class Subspace {
 public:
  using Real = typename scalar_traits<Scalar>::Real;

  Subspace() : ambient_(1), basis_(1, 0), tol_(kDefaultTol) {}

  static Subspace zero(Index ambient_dim, double tol = kDefaultTol) {
    check_ambient(ambient_dim);
    return Subspace(ambient_dim, MatrixX<Scalar>(ambient_dim, 0), tol);
  }

  static Subspace full(Index ambient_dim, double tol = kDefaultTol) {
    check_ambient(ambient_dim);
    return Subspace(ambient_dim, MatrixX<Scalar>::Identity(ambient_dim, ambient_dim), tol);
  }

  /// Span of the given generator columns. Rank = number of singular values
  /// above tol * sigma_max * max(rows, cols); all-zero input gives the zero
  /// subspace. A nonnegative `scale` replaces sigma_max as the reference
  /// magnitude, which matters when the generators themselves may be noise.
  static Subspace span_of(const MatrixX<Scalar>& generators, double tol = kDefaultTol,
                          double scale = -1.0) {
    check_ambient(generators.rows());
    if (generators.cols() == 0 || generators.isZero(0.0))
      return zero(generators.rows(), tol);
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(generators, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double ref = scale < 0 ? sv(0) : scale;
    const double thresh = rank_threshold(ref, generators.rows(), generators.cols(), tol);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > thresh) ++rank;
    return Subspace(generators.rows(), svd.matrixU().leftCols(rank), tol);
  }

  static Subspace span_of(const std::vector<VectorX<Scalar>>& vectors, Index ambient_dim,
                          double tol = kDefaultTol) {
    check_ambient(ambient_dim);
    MatrixX<Scalar> g(ambient_dim, static_cast<Index>(vectors.size()));
    for (Index j = 0; j < g.cols(); ++j) {
      if (vectors[static_cast<size_t>(j)].size() != ambient_dim)
        throw DimensionError("span_of: generators have mixed ambient dimensions");
      g.col(j) = vectors[static_cast<size_t>(j)];
    }
    return span_of(g, tol);
  }

  /// Wrap an already-orthonormal basis without re-factoring.
  static Subspace from_orthonormal(MatrixX<Scalar> basis, double tol = kDefaultTol) {
    const Index ambient = basis.rows();
    check_ambient(ambient);
    return Subspace(ambient, std::move(basis), tol);
  }

  Index ambient_dim() const { return ambient_; }
  Index rank() const { return basis_.cols(); }
  double tol() const { return tol_; }
  const MatrixX<Scalar>& basis() const { return basis_; }

  Subspace complement() const {
    if (rank() == 0) return full(ambient_, tol_);
    if (rank() == ambient_) return zero(ambient_, tol_);
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(basis_, Eigen::ComputeFullU);
    return Subspace(ambient_, svd.matrixU().rightCols(ambient_ - rank()), tol_);
  }

  /// Orthogonal projection of v onto this subspace.
  VectorX<Scalar> project(const VectorX<Scalar>& v) const {
    check_vector(v);
    if (rank() == 0) return VectorX<Scalar>::Zero(ambient_);
    return basis_ * (basis_.adjoint() * v);
  }

  bool member(const VectorX<Scalar>& v, double tol) const {
    check_vector(v);
    return (v - project(v)).norm() <= tol * std::max(1.0, v.norm());
  }
  bool member(const VectorX<Scalar>& v) const { return member(v, tol_ * 1e2); }

  /// Sine of the largest principal angle of `other` against this subspace;
  /// 0 exactly when other is contained in this.
  double angle_defect(const Subspace& other) const {
    check_same_ambient(other);
    if (other.rank() == 0) return 0.0;
    MatrixX<Scalar> resid = other.basis_;
    if (rank() > 0) resid -= basis_ * (basis_.adjoint() * other.basis_);
    return op_norm(resid);
  }

  bool contains(const Subspace& other, double tol) const { return angle_defect(other) <= tol; }
  bool contains(const Subspace& other) const { return contains(other, angle_tol()); }

  bool equals(const Subspace& other, double tol) const {
    return rank() == other.rank() && angle_defect(other) <= tol &&
           other.angle_defect(*this) <= tol;
  }
  bool equals(const Subspace& other) const { return equals(other, angle_tol()); }

  friend Subspace sum_span(const Subspace& a, const Subspace& b) {
    a.check_same_ambient(b);
    MatrixX<Scalar> g(a.ambient_, a.rank() + b.rank());
    g << a.basis_, b.basis_;
    return span_of(g, std::max(a.tol_, b.tol_));
  }

  /// Intersection via the null space of the stacked generators: solutions of
  /// a_basis x = b_basis y are exactly the common vectors.
  friend Subspace intersect(const Subspace& a, const Subspace& b) {
    a.check_same_ambient(b);
    const double tol = std::max(a.tol_, b.tol_);
    if (a.rank() == 0 || b.rank() == 0) return zero(a.ambient_, tol);
    MatrixX<Scalar> stacked(a.ambient_, a.rank() + b.rank());
    stacked << a.basis_, -b.basis_;
    MatrixX<Scalar> null = null_space(stacked, tol);
    if (null.cols() == 0) return zero(a.ambient_, tol);
    return span_of(a.basis_ * null.topRows(a.rank()), tol);
  }

 private:
  Subspace(Index ambient, MatrixX<Scalar> basis, double tol)
      : ambient_(ambient), basis_(std::move(basis)), tol_(tol) {}

  static void check_ambient(Index ambient) {
    if (ambient < 1) throw DimensionError("subspace: ambient dimension must be positive");
  }
  void check_vector(const VectorX<Scalar>& v) const {
    if (v.size() != ambient_) throw DimensionError("subspace: vector/ambient dimension mismatch");
  }
  void check_same_ambient(const Subspace& other) const {
    if (ambient_ != other.ambient_) throw DimensionError("subspace: ambient dimensions differ");
  }
  double angle_tol() const { return std::max(tol_ * 1e2, 1e-8); }

  Index ambient_;
  MatrixX<Scalar> basis_;  // ambient_ x rank, orthonormal columns
  double tol_;
};

/// Distance between the parallel cosets v1 + N and v2 + N, i.e. the norm of
/// the component of v1 - v2 orthogonal to N.
template <class Scalar>
double coset_distance(const VectorX<Scalar>& v1, const VectorX<Scalar>& v2,
                      const Subspace<Scalar>& n) {
  if (v1.size() != v2.size() || v1.size() != n.ambient_dim())
    throw DimensionError("coset_distance: dimension mismatch");
  const VectorX<Scalar> d = v1 - v2;
  return (d - n.project(d)).norm();
}

}  // namespace relcalc
