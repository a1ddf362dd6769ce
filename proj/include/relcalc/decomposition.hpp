#pragma once

#include "relcalc/relation.hpp"

namespace relcalc {

/// The single-valued part of a relation: its action on an orthonormal basis
/// of the domain, with outputs orthogonal to the multivalued part.
template <class Scalar>
struct OperatorPart {
  MatrixX<Scalar> domain_basis;  // n_h x d
  MatrixX<Scalar> matrix;        // n_k x d, action in domain-basis coordinates
  LinearRelation<Scalar> as_relation;

  double op_norm() const { return relcalc::op_norm(matrix); }

  /// Action in standard coordinates, extended by zero on the orthogonal
  /// complement of the domain (n_k x n_h).
  MatrixX<Scalar> dense(Index ambient_h) const {
    if (domain_basis.cols() == 0)
      return MatrixX<Scalar>::Zero(matrix.rows(), ambient_h);
    return matrix * domain_basis.adjoint();
  }
};

/// T_op: project the outputs of T onto M(T)^perp. The relation decomposes as
/// T = T_op (Minkowski-plus) ({0} x M(T)).
template <class Scalar>
OperatorPart<Scalar> regular_part(const LinearRelation<Scalar>& t) {
  const Subspace<Scalar> dom = t.domain();
  const Subspace<Scalar> mul = t.mulpart();
  MatrixX<Scalar> dm = dom.basis();
  MatrixX<Scalar> coeff = pinv_solve<Scalar>(t.h_block(), dm, t.tol(), 1.0);
  MatrixX<Scalar> k0 = t.k_block() * coeff;
  if (mul.rank() > 0) k0 -= mul.basis() * (mul.basis().adjoint() * k0);
  auto rel = LinearRelation<Scalar>::from_parts(k0, dm, MatrixX<Scalar>(t.dim_k(), 0),
                                                t.dim_h(), t.dim_k(), t.tol());
  return {std::move(dm), std::move(k0), std::move(rel)};
}

/// Moore-Penrose inverse: the regular part of T^{-1}, defined on R(T).
template <class Scalar>
OperatorPart<Scalar> moore_penrose(const LinearRelation<Scalar>& t) {
  return regular_part(t.inverse());
}

/// Norm of the quotient operator Q_T T, i.e. the operator norm of T_op.
template <class Scalar>
double quotient_operator_norm(const LinearRelation<Scalar>& t) {
  return regular_part(t).op_norm();
}

/// Reduced minimum modulus: the smallest nonzero singular value of T_op.
/// By convention +inf when T_op vanishes identically (nothing to stabilize).
template <class Scalar>
double gamma(const LinearRelation<Scalar>& t) {
  const OperatorPart<Scalar> op = regular_part(t);
  if (op.matrix.cols() == 0 || op.matrix.isZero(0.0)) return kInf;
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(op.matrix);
  const auto& sv = svd.singularValues();
  // Reference scale at least 1 so that an operator part consisting of pure
  // roundoff is recognized as vanishing.
  const double ref = std::max(1.0, sv(0));
  const double thresh = rank_threshold(ref, op.matrix.rows(), op.matrix.cols(), t.tol());
  double smallest = kInf;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) smallest = sv(i);
  return smallest;
}

/// M_T = ||T^dagger||; 0 when the range is trivial. Equals 1/gamma(T).
template <class Scalar>
double hus_constant(const LinearRelation<Scalar>& t) {
  const OperatorPart<Scalar> dag = moore_penrose(t);
  if (dag.matrix.cols() == 0) return 0.0;
  const double raw = dag.op_norm();
  // A pseudoinverse consisting of pure roundoff means there is nothing to
  // invert (gamma = +inf); mirror that convention here.
  const double noise =
      rank_threshold(std::max(1.0, raw), dag.matrix.rows(), dag.matrix.cols(), t.tol());
  return raw > noise ? raw : 0.0;
}

/// Principal square root of a nonnegative self-adjoint relation: the root of
/// the operator part, Minkowski-summed with the untouched multivalued part.
template <class Scalar>
LinearRelation<Scalar> sqrt_nonneg(const LinearRelation<Scalar>& t) {
  if (t.dim_h() != t.dim_k() || !t.is_selfadjoint() || !t.is_nonnegative())
    throw PreconditionError("sqrt_nonneg: relation is not nonnegative self-adjoint");
  const OperatorPart<Scalar> op = regular_part(t);
  // Outputs of T_op lie in D(T) for self-adjoint T, so the compression to
  // domain coordinates loses nothing.
  MatrixX<Scalar> compressed = op.domain_basis.adjoint() * op.matrix;
  MatrixX<Scalar> root = hermitian_sqrt<Scalar>(compressed, t.tol());
  MatrixX<Scalar> action = op.domain_basis * root;
  return LinearRelation<Scalar>::from_parts(action, op.domain_basis, t.mulpart().basis(),
                                            t.dim_h(), t.dim_k(), t.tol());
}

/// |T| = (T* T)^{1/2}.
template <class Scalar>
LinearRelation<Scalar> abs_relation(const LinearRelation<Scalar>& t) {
  return sqrt_nonneg(compose(t.adjoint(), t));
}

/// The contraction C_T = (I + T*T)^{-1}, computed two independent ways and
/// cross-checked: (i) Moore-Penrose inverse of the relation I + T*T, and
/// (ii) the top-left H-block of the orthogonal projector onto the graph.
/// Disagreement beyond tolerance signals a rank-decision fault.
template <class Scalar>
MatrixX<Scalar> resolvent_contraction(const LinearRelation<Scalar>& t, double check_tol = 1e-8) {
  const Index nh = t.dim_h();
  // Route (ii): projector block.
  const MatrixX<Scalar>& b = t.graph().basis();
  MatrixX<Scalar> projector_block =
      b.topRows(nh) * b.topRows(nh).adjoint();
  // Route (i): invert I + T*T as a relation.
  LinearRelation<Scalar> gram = compose(t.adjoint(), t);
  LinearRelation<Scalar> shifted = sum(LinearRelation<Scalar>::identity(nh, t.tol()), gram);
  OperatorPart<Scalar> inv = moore_penrose(shifted);
  MatrixX<Scalar> inverse_route = inv.dense(nh);
  const double defect = (inverse_route - projector_block).cwiseAbs().maxCoeff();
  if (defect > check_tol)
    throw NumericError("resolvent_contraction: routes disagree by " + std::to_string(defect));
  return projector_block;
}

/// Z_T = T C_T^{1/2}. Verifies that the operator part commutes with the
/// transform and that the result is a contraction in quotient norm.
template <class Scalar>
LinearRelation<Scalar> z_transform(const LinearRelation<Scalar>& t, double check_tol = 1e-8) {
  MatrixX<Scalar> c = resolvent_contraction(t, check_tol);
  MatrixX<Scalar> root = hermitian_sqrt<Scalar>(c, t.tol());
  LinearRelation<Scalar> z = compose(t, LinearRelation<Scalar>::from_graph_matrix(root, t.tol()));
  if (quotient_operator_norm(z) > 1.0 + 1e-10)
    throw NumericError("z_transform: result is not a contraction");
  if (!t.is_operator()) {
    LinearRelation<Scalar> z_of_op = z_transform(regular_part(t).as_relation, check_tol);
    MatrixX<Scalar> lhs = regular_part(z).dense(t.dim_h());
    MatrixX<Scalar> rhs = regular_part(z_of_op).dense(t.dim_h());
    if ((lhs - rhs).cwiseAbs().maxCoeff() > check_tol)
      throw NumericError("z_transform: operator part does not commute with the transform");
  }
  return z;
}

}  // namespace relcalc
