#include <catch2/catch_amalgamated.hpp>

#include "relcalc/generate.hpp"
#include "relcalc/relation.hpp"
#include "test_support.hpp"

using namespace relcalc;
using relcalc::testing::make_rng;
using relcalc::testing::random_matrix;
using relcalc::testing::random_vector;
using relcalc::testing::svd_rank;

namespace {

template <class S>
LinearRelation<S> zero_times_full(Index dim_h, Index dim_k) {
  // The relation {0} x K.
  MatrixX<S> g = MatrixX<S>::Zero(dim_h + dim_k, dim_k);
  g.bottomRows(dim_k).setIdentity();
  return LinearRelation<S>::from_generators(g, dim_h, dim_k);
}

template <class S>
LinearRelation<S> random_any(std::mt19937_64& rng, Index max_dim, bool square = false) {
  RandomRelationConfig cfg;
  cfg.max_dim = max_dim;
  cfg.square = square;
  cfg.min_gamma = 0;  // algebra identities must hold without conditioning floors
  return random_relation<S>(rng, cfg);
}

}  // namespace

TEST_CASE("from_generators reads off a matrix graph") {
  MatrixX<double> gen(4, 2);
  // Pairs ((1,0),(0,2)) and ((0,1),(0,0)).
  gen << 1, 0, 0, 1, 0, 0, 2, 0;
  auto t = LinearRelation<double>::from_generators(gen, 2, 2);
  MatrixX<double> a(2, 2);
  a << 0, 0, 2, 0;
  CHECK(relations_equal(t, LinearRelation<double>::from_graph_matrix(a), 1e-12));
}

TEST_CASE("from_generators with no pairs is the trivial relation") {
  auto t = LinearRelation<double>::from_generators(MatrixX<double>(0, 0), 2, 3);
  CHECK(t.graph_dim() == 0);
  CHECK(t.domain().rank() == 0);
  CHECK(t.range().rank() == 0);
}

TEST_CASE("single vertical generator gives {0} x K") {
  MatrixX<double> gen(2, 1);
  gen << 0, 1;
  auto t = LinearRelation<double>::from_generators(gen, 1, 1);
  CHECK(t.domain().rank() == 0);
  CHECK(t.mulpart().rank() == 1);
}

TEST_CASE("from_generators validates dimensions") {
  CHECK_THROWS_AS(LinearRelation<double>::from_generators(MatrixX<double>::Ones(3, 1), 1, 1),
                  DimensionError);
  CHECK_THROWS_AS(LinearRelation<double>::from_graph_matrix(MatrixX<double>(0, 0)),
                  DimensionError);
}

TEST_CASE("from_graph_matrix of the identity has full domain and range") {
  auto t = LinearRelation<double>::identity(2);
  CHECK(t.domain().rank() == 2);
  CHECK(t.range().rank() == 2);
  CHECK(t.kernel().rank() == 0);
  CHECK(t.mulpart().rank() == 0);
}

TEST_CASE("from_parts builds the prescribed structure") {
  MatrixX<double> action(2, 1), dom(1, 1), mul(2, 1);
  action << 2, 0;
  dom << 1;
  mul << 0, 1;
  auto t = LinearRelation<double>::from_parts(action, dom, mul, 1, 2);
  CHECK(t.dim_h() == 1);
  CHECK(t.dim_k() == 2);
  CHECK(t.mulpart().rank() == 1);
  VectorX<double> e2(2);
  e2 << 0, 1;
  CHECK(t.mulpart().member(e2, 1e-12));
  CHECK(t.domain().rank() == 1);
}

TEST_CASE("parts of a diagonal graph") {
  MatrixX<double> a(2, 2);
  a << 2, 0, 0, 0;
  auto t = LinearRelation<double>::from_graph_matrix(a);
  auto p = t.parts();
  VectorX<double> e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  CHECK(p.kernel.rank() == 1);
  CHECK(p.kernel.member(e2, 1e-12));
  CHECK(p.mulpart.rank() == 0);
  CHECK(p.range.rank() == 1);
  CHECK(p.range.member(e1, 1e-12));
  CHECK(p.domain.rank() == 2);
}

TEST_CASE("parts of {0} x K") {
  auto t = zero_times_full<double>(2, 3);
  CHECK(t.domain().rank() == 0);
  CHECK(t.mulpart().rank() == 3);
  CHECK(t.kernel().rank() == 0);
  CHECK(t.range().rank() == 3);
}

TEMPLATE_TEST_CASE("part dimensions satisfy both counting identities", "[property]", double,
                   Complex) {
  auto rng = make_rng(101);
  for (int trial = 0; trial < 120; ++trial) {
    auto t = random_any<TestType>(rng, 5);
    auto p = t.parts();
    REQUIRE(t.graph_dim() == p.domain.rank() + p.mulpart.rank());
    REQUIRE(t.graph_dim() == p.range.rank() + p.kernel.rank());
    CHECK(p.domain.contains(p.kernel, 1e-9));
    CHECK(p.range.contains(p.mulpart, 1e-9));
  }
}

TEST_CASE("inverse of a scaled identity") {
  auto t = LinearRelation<double>::from_graph_matrix(2 * MatrixX<double>::Identity(3, 3));
  auto expected = LinearRelation<double>::from_graph_matrix(0.5 * MatrixX<double>::Identity(3, 3));
  CHECK(relations_equal(t.inverse(), expected, 1e-12));
}

TEST_CASE("inverse of {0} x K is the zero map on K") {
  auto t = zero_times_full<double>(2, 3);
  auto ti = t.inverse();
  CHECK(ti.domain().rank() == 3);
  CHECK(ti.range().rank() == 0);
  CHECK(ti.mulpart().rank() == 0);
  CHECK(ti.kernel().rank() == 3);
}

TEMPLATE_TEST_CASE("inverse is involutive", "[property]", double, Complex) {
  auto rng = make_rng(103);
  for (int trial = 0; trial < 60; ++trial) {
    auto t = random_any<TestType>(rng, 6);
    CHECK(relations_equal(t.inverse().inverse(), t, 1e-10));
    CHECK(t.inverse().domain().equals(t.range(), 1e-9));
    CHECK(t.inverse().kernel().equals(t.mulpart(), 1e-9));
  }
}

TEMPLATE_TEST_CASE("adjoint of a dense graph is the conjugate transpose graph", "[property]",
                   double, Complex) {
  auto rng = make_rng(107);
  for (int trial = 0; trial < 40; ++trial) {
    const Index dh = 1 + static_cast<Index>(rng() % 5), dk = 1 + static_cast<Index>(rng() % 5);
    MatrixX<TestType> a = random_matrix<TestType>(rng, dk, dh);
    auto t = LinearRelation<TestType>::from_graph_matrix(a);
    auto expected = LinearRelation<TestType>::from_graph_matrix(MatrixX<TestType>(a.adjoint()));
    CHECK(relations_equal(t.adjoint(), expected, 1e-9));
  }
}

TEST_CASE("adjoint of {0} x K swaps to {0} x H") {
  auto t = zero_times_full<double>(2, 3);
  auto ts = t.adjoint();
  CHECK(ts.dim_h() == 3);
  CHECK(ts.dim_k() == 2);
  CHECK(ts.domain().rank() == 0);
  CHECK(ts.mulpart().rank() == 2);  // M(T*) = D(T)^perp = H
}

TEMPLATE_TEST_CASE("adjoint identities", "[property]", double, Complex) {
  auto rng = make_rng(109);
  for (int trial = 0; trial < 80; ++trial) {
    auto t = random_any<TestType>(rng, 6);
    CHECK(relations_equal(t.adjoint().adjoint(), t, 1e-9));
    CHECK(relations_equal(t.inverse().adjoint(), t.adjoint().inverse(), 1e-9));
    CHECK(t.adjoint().kernel().equals(t.range().complement(), 1e-9));
    CHECK(t.adjoint().mulpart().equals(t.domain().complement(), 1e-9));
  }
}

TEST_CASE("pointwise sum of matrix graphs") {
  auto rng = make_rng(113);
  MatrixX<double> a = random_matrix<double>(rng, 3, 2), b = random_matrix<double>(rng, 3, 2);
  auto ta = LinearRelation<double>::from_graph_matrix(a);
  auto tb = LinearRelation<double>::from_graph_matrix(b);
  CHECK(relations_equal(sum(ta, tb), LinearRelation<double>::from_graph_matrix(a + b), 1e-10));
}

TEST_CASE("minkowski sum with {0} x M enlarges the multivalued part only") {
  auto rng = make_rng(127);
  auto t = LinearRelation<double>::from_graph_matrix(random_matrix<double>(rng, 3, 2));
  MatrixX<double> mg = MatrixX<double>::Zero(5, 1);
  mg(2 + 1, 0) = 1;  // direction e2 of K
  auto vertical = LinearRelation<double>::from_generators(mg, 2, 3);
  auto widened = minkowski_sum(t, vertical);
  CHECK(widened.domain().equals(t.domain(), 1e-10));
  CHECK(widened.mulpart().rank() == 1);
  CHECK(widened.graph().contains(t.graph(), 1e-10));
}

TEMPLATE_TEST_CASE("pointwise sum has the intersected domain", "[property]", double, Complex) {
  auto rng = make_rng(131);
  for (int trial = 0; trial < 50; ++trial) {
    const Index dh = 1 + static_cast<Index>(rng() % 4), dk = 1 + static_cast<Index>(rng() % 4);
    RandomRelationConfig cfg;
    cfg.max_dim = 4;
    cfg.min_gamma = 0;
    auto t = random_any<TestType>(rng, 4);
    // Force matching shapes.
    MatrixX<TestType> gt = random_matrix<TestType>(rng, dh + dk, rng() % (dh + dk + 1));
    MatrixX<TestType> gs = random_matrix<TestType>(rng, dh + dk, rng() % (dh + dk + 1));
    auto t1 = LinearRelation<TestType>::from_generators(gt, dh, dk);
    auto t2 = LinearRelation<TestType>::from_generators(gs, dh, dk);
    auto s = sum(t1, t2);
    CHECK(s.domain().equals(intersect(t1.domain(), t2.domain()), 1e-8));
  }
}

TEMPLATE_TEST_CASE("composition matches matrix products", "[property]", double, Complex) {
  auto rng = make_rng(137);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n1 = 1 + static_cast<Index>(rng() % 4);
    const Index n2 = 1 + static_cast<Index>(rng() % 4);
    const Index n3 = 1 + static_cast<Index>(rng() % 4);
    MatrixX<TestType> a = random_matrix<TestType>(rng, n3, n2);
    MatrixX<TestType> b = random_matrix<TestType>(rng, n2, n1);
    auto ta = LinearRelation<TestType>::from_graph_matrix(a);
    auto tb = LinearRelation<TestType>::from_graph_matrix(b);
    auto prod = compose(ta, tb);
    CHECK(relations_equal(prod, LinearRelation<TestType>::from_graph_matrix(MatrixX<TestType>(a * b)),
                          1e-10));
  }
}

TEST_CASE("composition with the identity fixes everywhere-defined relations") {
  auto rng = make_rng(139);
  auto t = LinearRelation<double>::from_graph_matrix(random_matrix<double>(rng, 3, 3));
  CHECK(relations_equal(compose(t, LinearRelation<double>::identity(3)), t, 1e-10));
  CHECK(relations_equal(compose(LinearRelation<double>::identity(3), t), t, 1e-10));
}

TEMPLATE_TEST_CASE("composition kernels contain the inner kernel", "[property]", double,
                   Complex) {
  auto rng = make_rng(149);
  for (int trial = 0; trial < 40; ++trial) {
    auto s = random_any<TestType>(rng, 4);
    // Build t with dim_h equal to s.dim_k.
    MatrixX<TestType> g = random_matrix<TestType>(rng, s.dim_k() + 3, rng() % (s.dim_k() + 3));
    auto t = LinearRelation<TestType>::from_generators(g, s.dim_k(), 3);
    auto ts = compose(t, s);
    // N(TS) contains N(S) whenever 0 is in S(ker) directions that t can consume;
    // membership requires 0 in T(0) which always holds.
    CHECK(ts.kernel().contains(s.kernel(), 1e-8));
  }
}

TEST_CASE("compose rejects non-conformable relations") {
  auto a = LinearRelation<double>::identity(2);
  auto b = LinearRelation<double>::identity(3);
  CHECK_THROWS_AS(compose(a, b), DimensionError);
}

TEST_CASE("cartesian product of matrix graphs is the block-diagonal graph") {
  auto rng = make_rng(151);
  MatrixX<double> a = random_matrix<double>(rng, 2, 3), b = random_matrix<double>(rng, 1, 2);
  auto p = cartesian_product(LinearRelation<double>::from_graph_matrix(a),
                             LinearRelation<double>::from_graph_matrix(b));
  MatrixX<double> blk = MatrixX<double>::Zero(3, 5);
  blk.topLeftCorner(2, 3) = a;
  blk.bottomRightCorner(1, 2) = b;
  CHECK(relations_equal(p, LinearRelation<double>::from_graph_matrix(blk), 1e-10));
  CHECK(p.graph_dim() == 5);
}

TEST_CASE("cartesian product with the trivial relation pads the graph") {
  auto rng = make_rng(157);
  auto t = LinearRelation<double>::from_graph_matrix(random_matrix<double>(rng, 2, 2));
  auto trivial = LinearRelation<double>::from_generators(MatrixX<double>(0, 0), 1, 1);
  auto p = cartesian_product(t, trivial);
  CHECK(p.graph_dim() == t.graph_dim());
  CHECK(p.domain().rank() == t.domain().rank());
  CHECK(p.range().rank() == t.range().rank());
}

TEST_CASE("scalar_mul by zero has range M(T)") {
  auto rng = make_rng(163);
  // A relation with a genuine multivalued part.
  MatrixX<double> action = random_matrix<double>(rng, 3, 2);
  MatrixX<double> dom(3, 2);
  dom << 1, 0, 0, 1, 0, 0;
  MatrixX<double> mul(3, 1);
  mul << 0, 0, 1;
  auto t = LinearRelation<double>::from_parts(action, dom, mul, 3, 3);
  auto z = scalar_mul(0.0, t);
  CHECK(z.range().equals(t.mulpart(), 1e-10));
  CHECK(z.domain().equals(t.domain(), 1e-10));
}

TEST_CASE("shift of the identity by one is the zero graph") {
  auto t = LinearRelation<double>::identity(2);
  auto shifted = shift(t, 1.0);
  CHECK(relations_equal(shifted, LinearRelation<double>::from_graph_matrix(MatrixX<double>::Zero(2, 2)),
                        1e-12));
}

TEMPLATE_TEST_CASE("shift preserves domain and multivalued part", "[property]", double, Complex) {
  auto rng = make_rng(167);
  for (int trial = 0; trial < 40; ++trial) {
    auto t = random_any<TestType>(rng, 5, /*square=*/true);
    const TestType lambda = relcalc::testing::Draw<TestType>::scalar(rng);
    auto s = shift(t, lambda);
    CHECK(s.domain().equals(t.domain(), 1e-9));
    CHECK(s.mulpart().equals(t.mulpart(), 1e-9));
  }
}

TEST_CASE("restriction to the full space is the identity operation") {
  auto rng = make_rng(173);
  auto t = random_any<double>(rng, 5);
  CHECK(relations_equal(restrict_to(t, Subspace<double>::full(t.dim_h())), t, 1e-10));
}

TEST_CASE("restriction to the zero subspace keeps only the multivalued part") {
  auto rng = make_rng(179);
  MatrixX<double> action = random_matrix<double>(rng, 3, 2);
  MatrixX<double> dom(2, 2);
  dom.setIdentity();
  MatrixX<double> mul(3, 1);
  mul << 0, 0, 1;
  auto t = LinearRelation<double>::from_parts(action, dom, mul, 2, 3);
  auto r = restrict_to(t, Subspace<double>::zero(2));
  CHECK(r.domain().rank() == 0);
  CHECK(r.mulpart().equals(t.mulpart(), 1e-10));
  CHECK(r.graph_dim() == 1);
}

TEST_CASE("image of a matrix graph is the matrix action") {
  auto rng = make_rng(181);
  MatrixX<double> a = random_matrix<double>(rng, 3, 2);
  auto t = LinearRelation<double>::from_graph_matrix(a);
  VectorX<double> x = random_vector<double>(rng, 2);
  auto img = t.image_of(x);
  CHECK((img.particular - a * x).norm() < 1e-10 * (1 + x.norm()));
  CHECK(img.direction.rank() == 0);
}

TEST_CASE("image of zero under {0} x K is the whole space") {
  auto t = zero_times_full<double>(2, 3);
  auto img = t.image_of(VectorX<double>::Zero(2));
  CHECK(img.particular.norm() < 1e-14);
  CHECK(img.direction.rank() == 3);
}

TEST_CASE("image_of outside the domain reports the residual") {
  MatrixX<double> action(2, 1), dom(2, 1);
  action << 1, 0;
  dom << 1, 0;
  auto t = LinearRelation<double>::from_parts(action, dom, MatrixX<double>(2, 0), 2, 2);
  VectorX<double> x(2);
  x << 0, 1;
  CHECK_THROWS_AS(t.image_of(x), NotInDomainError);
  try {
    t.image_of(x);
  } catch (const NotInDomainError& e) {
    CHECK(e.residual == Catch::Approx(1.0));
  }
}

TEMPLATE_TEST_CASE("preimage cosets map back into the fiber", "[property]", double, Complex) {
  auto rng = make_rng(191);
  int done = 0;
  while (done < 40) {
    auto t = random_any<TestType>(rng, 5);
    if (t.range().rank() == 0) continue;
    ++done;
    VectorX<TestType> y = random_unit_in<TestType>(rng, t.range());
    auto pre = t.preimage_of(y);
    CHECK(pre.direction.equals(t.kernel(), 1e-8));
    // Sample elements of the preimage coset and push them forward.
    for (int s = 0; s < 4; ++s) {
      VectorX<TestType> x = pre.particular;
      if (pre.direction.rank() > 0)
        x += pre.direction.basis() *
             relcalc::testing::random_vector<TestType>(rng, pre.direction.rank());
      auto img = t.image_of(x, 1e-6);
      VectorX<TestType> diff = y - img.particular;
      CHECK(t.mulpart().member(diff, 1e-6));
    }
  }
}

TEST_CASE("predicate hand cases") {
  MatrixX<Complex> herm(2, 2);
  herm << Complex{2, 0}, Complex{0, 1}, Complex{0, -1}, Complex{3, 0};
  auto t = LinearRelation<Complex>::from_graph_matrix(herm);
  CHECK(t.is_selfadjoint());
  CHECK(t.is_symmetric());
  CHECK(t.is_operator());
  CHECK(t.is_everywhere_defined());
  CHECK(t.is_nonnegative());  // eigenvalues of herm are 2.5 +- sqrt(1.25), both positive

  auto v = zero_times_full<Complex>(2, 2);
  CHECK_FALSE(v.is_operator());
  CHECK(v.is_selfadjoint());  // {0} x H equals its own adjoint in H

  MatrixX<double> neg = -MatrixX<double>::Identity(2, 2);
  CHECK_FALSE(LinearRelation<double>::from_graph_matrix(neg).is_nonnegative());
  CHECK_THROWS_AS(LinearRelation<double>::from_graph_matrix(MatrixX<double>::Zero(2, 3)).is_selfadjoint(),
                  DimensionError);
}

TEMPLATE_TEST_CASE("gram relations are nonnegative self-adjoint", "[property]", double, Complex) {
  auto rng = make_rng(193);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_any<TestType>(rng, 4);
    auto gram = compose(t.adjoint(), t);
    CHECK(gram.is_selfadjoint());
    CHECK(gram.is_nonnegative());
    auto gram2 = compose(t, t.adjoint());
    CHECK(gram2.is_selfadjoint());
    CHECK(gram2.is_nonnegative());
  }
}

TEMPLATE_TEST_CASE("gram relation splits across the kernel and its complement", "[property]",
                   double, Complex) {
  auto rng = make_rng(197);
  for (int trial = 0; trial < 40; ++trial) {
    auto t = random_any<TestType>(rng, 5);
    auto gram = compose(t.adjoint(), t);
    auto n = t.kernel();
    auto r1 = restrict_to(gram, n.complement());
    auto r2 = restrict_to(gram, n);
    CHECK(relations_equal(minkowski_sum(r1, r2), gram, 1e-8));
  }
}
