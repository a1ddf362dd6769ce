#pragma once

#include <utility>
#include <vector>

#include "relcalc/subspace.hpp"

namespace relcalc {

/// An affine coset: particular + direction. Represents the solution sets
/// T(x) and T^{-1}(y), whose translating subspaces are the multivalued part
/// and the kernel respectively.
template <class Scalar>
struct CosetElement {
  VectorX<Scalar> particular;
  Subspace<Scalar> direction;

  bool same_coset(const CosetElement& other, double tol) const {
    return direction.equals(other.direction, tol) &&
           direction.member(VectorX<Scalar>(particular - other.particular), tol);
  }
};

/// A linear relation from H to K: a subspace of H (+) K whose elements are
/// stacked pairs [h; k]. Operators are the single-valued special case; every
/// construction here works for genuinely multivalued graphs as well.
template <class Scalar>
class LinearRelation {
 public:
  using Sub = Subspace<Scalar>;

  LinearRelation() : dim_h_(1), dim_k_(1), graph_(Sub::zero(2)) {}

  /// Span of stacked generator pairs (h, k).
  static LinearRelation from_generators(const MatrixX<Scalar>& stacked_pairs, Index dim_h,
                                        Index dim_k, double tol = kDefaultTol) {
    check_dims(dim_h, dim_k);
    if (stacked_pairs.cols() > 0 && stacked_pairs.rows() != dim_h + dim_k)
      throw DimensionError("from_generators: stacked pair length != dim_h + dim_k");
    MatrixX<Scalar> g = stacked_pairs;
    if (g.rows() != dim_h + dim_k) g.resize(dim_h + dim_k, 0);
    return LinearRelation(dim_h, dim_k, Sub::span_of(g, tol));
  }

  static LinearRelation from_generators(const std::vector<std::pair<VectorX<Scalar>, VectorX<Scalar>>>& pairs,
                                        Index dim_h, Index dim_k, double tol = kDefaultTol) {
    check_dims(dim_h, dim_k);
    MatrixX<Scalar> g(dim_h + dim_k, static_cast<Index>(pairs.size()));
    for (Index j = 0; j < g.cols(); ++j) {
      const auto& [h, k] = pairs[static_cast<size_t>(j)];
      if (h.size() != dim_h || k.size() != dim_k)
        throw DimensionError("from_generators: pair does not match declared dimensions");
      g.col(j).head(dim_h) = h;
      g.col(j).tail(dim_k) = k;
    }
    return LinearRelation(dim_h, dim_k, Sub::span_of(g, tol));
  }

  /// Graph of the everywhere-defined operator v -> a v (a maps H into K, so
  /// dim_h = cols and dim_k = rows).
  static LinearRelation from_graph_matrix(const MatrixX<Scalar>& a, double tol = kDefaultTol) {
    check_dims(a.cols(), a.rows());
    MatrixX<Scalar> g(a.cols() + a.rows(), a.cols());
    g.topRows(a.cols()) = MatrixX<Scalar>::Identity(a.cols(), a.cols());
    g.bottomRows(a.rows()) = a;
    return LinearRelation(a.cols(), a.rows(), Sub::span_of(g, tol));
  }

  /// Relation with prescribed operator action on a domain basis plus a
  /// multivalued part spanned by mul_generators.
  static LinearRelation from_parts(const MatrixX<Scalar>& action, const MatrixX<Scalar>& domain_basis,
                                   const MatrixX<Scalar>& mul_generators, Index dim_h, Index dim_k,
                                   double tol = kDefaultTol) {
    check_dims(dim_h, dim_k);
    if (domain_basis.rows() != dim_h || action.rows() != dim_k ||
        action.cols() != domain_basis.cols())
      throw DimensionError("from_parts: operator block shapes are inconsistent");
    if (mul_generators.cols() > 0 && mul_generators.rows() != dim_k)
      throw DimensionError("from_parts: mul generators must live in K");
    MatrixX<Scalar> g(dim_h + dim_k, domain_basis.cols() + mul_generators.cols());
    g.setZero();
    g.topLeftCorner(dim_h, domain_basis.cols()) = domain_basis;
    g.bottomLeftCorner(dim_k, action.cols()) = action;
    g.bottomRightCorner(dim_k, mul_generators.cols()) = mul_generators;
    return LinearRelation(dim_h, dim_k, Sub::span_of(g, tol));
  }

  static LinearRelation from_graph_subspace(Index dim_h, Index dim_k, Sub graph) {
    check_dims(dim_h, dim_k);
    if (graph.ambient_dim() != dim_h + dim_k)
      throw DimensionError("from_graph_subspace: graph ambient != dim_h + dim_k");
    return LinearRelation(dim_h, dim_k, std::move(graph));
  }

  static LinearRelation identity(Index n, double tol = kDefaultTol) {
    return from_graph_matrix(MatrixX<Scalar>::Identity(n, n), tol);
  }

  Index dim_h() const { return dim_h_; }
  Index dim_k() const { return dim_k_; }
  const Sub& graph() const { return graph_; }
  double tol() const { return graph_.tol(); }
  Index graph_dim() const { return graph_.rank(); }

  MatrixX<Scalar> h_block() const { return graph_.basis().topRows(dim_h_); }
  MatrixX<Scalar> k_block() const { return graph_.basis().bottomRows(dim_k_); }

  // -- the four parts -------------------------------------------------------
  //
  // All rank decisions below use reference scale 1: the blocks are slices of
  // an orthonormal basis, so a direction is genuinely present only when its
  // singular value is of order 1 rather than of order of the block's noise.

  Sub domain() const { return Sub::span_of(h_block(), tol(), 1.0); }
  Sub range() const { return Sub::span_of(k_block(), tol(), 1.0); }

  /// N(T) = those h with (h, 0) in the graph.
  Sub kernel() const {
    MatrixX<Scalar> nz = null_space<Scalar>(k_block(), tol(), 1.0);
    return Sub::span_of(MatrixX<Scalar>(h_block() * nz), tol(), 1.0);
  }

  /// M(T) = those k with (0, k) in the graph.
  Sub mulpart() const {
    MatrixX<Scalar> nz = null_space<Scalar>(h_block(), tol(), 1.0);
    return Sub::span_of(MatrixX<Scalar>(k_block() * nz), tol(), 1.0);
  }

  struct Parts {
    Sub domain, range, kernel, mulpart;
  };
  Parts parts() const { return {domain(), range(), kernel(), mulpart()}; }

  // -- algebra ---------------------------------------------------------------

  LinearRelation inverse() const {
    MatrixX<Scalar> g(dim_k_ + dim_h_, graph_dim());
    g.topRows(dim_k_) = k_block();
    g.bottomRows(dim_h_) = h_block();
    return LinearRelation(dim_k_, dim_h_, Sub::span_of(g, tol()));
  }

  /// Adjoint: the orthogonal complement, inside K (+) H, of the image of the
  /// graph under (h, k) -> (k, -h).
  LinearRelation adjoint() const {
    MatrixX<Scalar> flipped(dim_k_ + dim_h_, graph_dim());
    flipped.topRows(dim_k_) = k_block();
    flipped.bottomRows(dim_h_) = -h_block();
    Sub image = Sub::from_orthonormal(std::move(flipped), tol());
    return LinearRelation(dim_k_, dim_h_, image.complement());
  }

  /// Pointwise sum: pairs (x, y + z) with (x, y) in T and (x, z) in S.
  friend LinearRelation sum(const LinearRelation& t, const LinearRelation& s) {
    t.check_same_shape(s, "sum");
    const Index nh = t.dim_h_, nk = t.dim_k_;
    // Work in the triple space (x, y, z).
    Sub ct = cylinder(t.graph_, nh, nk, nk, /*middle=*/true);
    Sub cs = cylinder(s.graph_, nh, nk, nk, /*middle=*/false);
    Sub common = intersect(ct, cs);
    MatrixX<Scalar> map(nh + nk, nh + 2 * nk);
    map.setZero();
    map.topLeftCorner(nh, nh).setIdentity();
    map.block(nh, nh, nk, nk).setIdentity();
    map.block(nh, nh + nk, nk, nk).setIdentity();
    return LinearRelation(nh, nk,
                          Sub::span_of(MatrixX<Scalar>(map * common.basis()),
                                       std::max(t.tol(), s.tol())));
  }

  /// Minkowski sum: elementwise sum of the graphs.
  friend LinearRelation minkowski_sum(const LinearRelation& t, const LinearRelation& s) {
    t.check_same_shape(s, "minkowski_sum");
    return LinearRelation(t.dim_h_, t.dim_k_, sum_span(t.graph_, s.graph_));
  }

  /// Composition t(s(.)): apply s, then t.
  friend LinearRelation compose(const LinearRelation& t, const LinearRelation& s) {
    if (s.dim_k_ != t.dim_h_)
      throw DimensionError("compose: inner dimensions do not match");
    const Index nx = s.dim_h_, nz = s.dim_k_, ny = t.dim_k_;
    // Triple space (x, z, y); intersect the two cylinders, then drop z.
    MatrixX<Scalar> gs(nx + nz + ny, s.graph_dim() + ny);
    gs.setZero();
    gs.topLeftCorner(nx + nz, s.graph_dim()) = s.graph_.basis();
    gs.bottomRightCorner(ny, ny).setIdentity();
    MatrixX<Scalar> gt(nx + nz + ny, t.graph_dim() + nx);
    gt.setZero();
    gt.bottomLeftCorner(nz + ny, t.graph_dim()) = t.graph_.basis();
    gt.topRightCorner(nx, nx).setIdentity();
    const double tol = std::max(t.tol(), s.tol());
    Sub common = intersect(Sub::span_of(gs, tol), Sub::span_of(gt, tol));
    MatrixX<Scalar> proj(nx + ny, common.rank());
    proj.topRows(nx) = common.basis().topRows(nx);
    proj.bottomRows(ny) = common.basis().bottomRows(ny);
    return LinearRelation(nx, ny, Sub::span_of(proj, tol));
  }

  /// Relation between product spaces, pairing ((h1, h2), (k1, k2)).
  friend LinearRelation cartesian_product(const LinearRelation& t, const LinearRelation& s) {
    const Index nh = t.dim_h_ + s.dim_h_, nk = t.dim_k_ + s.dim_k_;
    MatrixX<Scalar> g(nh + nk, t.graph_dim() + s.graph_dim());
    g.setZero();
    g.block(0, 0, t.dim_h_, t.graph_dim()) = t.h_block();
    g.block(t.dim_h_, t.graph_dim(), s.dim_h_, s.graph_dim()) = s.h_block();
    g.block(nh, 0, t.dim_k_, t.graph_dim()) = t.k_block();
    g.block(nh + t.dim_k_, t.graph_dim(), s.dim_k_, s.graph_dim()) = s.k_block();
    return LinearRelation(nh, nk, Sub::span_of(g, std::max(t.tol(), s.tol())));
  }

  /// c T = { (x, c y + m) : (x, y) in T, m in M(T) }. Keeping the multivalued
  /// part fixed makes 0 T = D(T) x M(T), so R(0 T) = M(T).
  friend LinearRelation scalar_mul(Scalar c, const LinearRelation& t) {
    MatrixX<Scalar> mul = t.mulpart().basis();
    MatrixX<Scalar> g(t.dim_h_ + t.dim_k_, t.graph_dim() + mul.cols());
    g.setZero();
    g.topLeftCorner(t.dim_h_, t.graph_dim()) = t.h_block();
    g.bottomLeftCorner(t.dim_k_, t.graph_dim()) = c * t.k_block();
    g.bottomRightCorner(t.dim_k_, mul.cols()) = mul;
    return LinearRelation(t.dim_h_, t.dim_k_, Sub::span_of(g, t.tol()));
  }

  /// T - lambda I on square relations: (x, y) -> (x, y - lambda x).
  friend LinearRelation shift(const LinearRelation& t, Scalar lambda) {
    if (t.dim_h_ != t.dim_k_) throw DimensionError("shift: relation is not square");
    MatrixX<Scalar> g(2 * t.dim_h_, t.graph_dim());
    g.topRows(t.dim_h_) = t.h_block();
    g.bottomRows(t.dim_k_) = t.k_block() - lambda * t.h_block();
    return LinearRelation(t.dim_h_, t.dim_k_, Sub::span_of(g, t.tol()));
  }

  /// Restriction to W: graph intersected with W x K.
  friend LinearRelation restrict_to(const LinearRelation& t, const Sub& w) {
    if (w.ambient_dim() != t.dim_h_)
      throw DimensionError("restrict_to: subspace does not live in the domain space");
    MatrixX<Scalar> cyl(t.dim_h_ + t.dim_k_, w.rank() + t.dim_k_);
    cyl.setZero();
    cyl.topLeftCorner(t.dim_h_, w.rank()) = w.basis();
    cyl.bottomRightCorner(t.dim_k_, t.dim_k_).setIdentity();
    Sub res = intersect(t.graph_, Sub::from_orthonormal(std::move(cyl), t.tol()));
    return LinearRelation(t.dim_h_, t.dim_k_, std::move(res));
  }

  // -- images ----------------------------------------------------------------

  /// T(x) as a coset: the minimum-norm element plus M(T). Throws when x is
  /// not in the domain, carrying the residual norm.
  CosetElement<Scalar> image_of(const VectorX<Scalar>& x, double membership_tol = 0) const {
    if (x.size() != dim_h_) throw DimensionError("image_of: vector not in H");
    const double mtol = membership_tol > 0 ? membership_tol : tol() * 1e2;
    Sub dom = domain();
    const double residual = (x - dom.project(x)).norm();
    if (residual > mtol * std::max(1.0, x.norm()))
      throw NotInDomainError("image_of: x is not in the domain", residual);
    MatrixX<Scalar> c = pinv_solve<Scalar>(h_block(), x, tol(), 1.0);
    VectorX<Scalar> k0 = k_block() * c;
    Sub mul = mulpart();
    return {VectorX<Scalar>(k0 - mul.project(k0)), mul};
  }

  CosetElement<Scalar> preimage_of(const VectorX<Scalar>& y, double membership_tol = 0) const {
    return inverse().image_of(y, membership_tol);
  }

  // -- predicates --------------------------------------------------------------

  bool is_operator() const { return mulpart().rank() == 0; }
  bool is_everywhere_defined() const { return domain().rank() == dim_h_; }

  bool is_symmetric() const {
    require_square("is_symmetric");
    return adjoint().graph().contains(graph_);
  }

  bool is_selfadjoint() const {
    require_square("is_selfadjoint");
    return adjoint().graph().equals(graph_);
  }

  /// Tests Re <k, h> >= 0 over the whole graph: the Hermitian part of the
  /// induced form on graph coordinates must be positive semidefinite (the
  /// form is not diagonal in an arbitrary basis, so per-generator checks are
  /// not sufficient).
  bool is_nonnegative() const {
    require_square("is_nonnegative");
    if (graph_dim() == 0) return true;
    MatrixX<Scalar> form = h_block().adjoint() * k_block();
    MatrixX<Scalar> herm = (form + form.adjoint()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(herm);
    const double scale = std::max(1.0, op_norm(form));
    return es.eigenvalues().minCoeff() >= -tol() * 1e2 * scale;
  }

 private:
  LinearRelation(Index dim_h, Index dim_k, Sub graph)
      : dim_h_(dim_h), dim_k_(dim_k), graph_(std::move(graph)) {}

  static void check_dims(Index dim_h, Index dim_k) {
    if (dim_h < 1 || dim_k < 1)
      throw DimensionError("relation: space dimensions must be positive");
  }
  void check_same_shape(const LinearRelation& other, const char* op) const {
    if (dim_h_ != other.dim_h_ || dim_k_ != other.dim_k_)
      throw DimensionError(std::string(op) + ": relations have different shapes");
  }
  void require_square(const char* op) const {
    if (dim_h_ != dim_k_)
      throw DimensionError(std::string(op) + ": relation is not square");
  }

  /// Cylinder over a graph subspace of H (+) K inside (x, y, z) with one free
  /// K-coordinate block: middle=true leaves z free ((x,y) constrained),
  /// middle=false leaves y free ((x,z) constrained).
  static Sub cylinder(const Sub& graph, Index nh, Index nk1, Index nk2, bool middle) {
    const Index total = nh + nk1 + nk2;
    const Index free_dim = middle ? nk2 : nk1;
    MatrixX<Scalar> g(total, graph.rank() + free_dim);
    g.setZero();
    g.topLeftCorner(nh, graph.rank()) = graph.basis().topRows(nh);
    if (middle) {
      g.block(nh, 0, nk1, graph.rank()) = graph.basis().bottomRows(nk1);
      g.bottomRightCorner(nk2, nk2).setIdentity();
    } else {
      g.block(nh + nk1, 0, nk2, graph.rank()) = graph.basis().bottomRows(nk2);
      g.block(nh, graph.rank(), nk1, nk1).setIdentity();
    }
    return Sub::from_orthonormal(std::move(g), graph.tol());
  }

  Index dim_h_, dim_k_;
  Sub graph_;
};

/// Graph equality of relations (same shape, same subspace).
template <class Scalar>
bool relations_equal(const LinearRelation<Scalar>& a, const LinearRelation<Scalar>& b,
                     double tol) {
  return a.dim_h() == b.dim_h() && a.dim_k() == b.dim_k() && a.graph().equals(b.graph(), tol);
}

}  // namespace relcalc
