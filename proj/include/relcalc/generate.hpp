#pragma once

#include <random>

#include "relcalc/decomposition.hpp"

namespace relcalc {

/// Derive an independent engine for corpus item `item`, so batch results do
/// not depend on evaluation order.
inline std::mt19937_64 corpus_rng(uint64_t seed, uint64_t item) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (item + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return std::mt19937_64{z ^ (z >> 31)};
}

template <class Scalar>
Scalar gaussian_scalar(std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  if constexpr (scalar_traits<Scalar>::field == Field::Real) {
    return d(rng);
  } else {
    const double re = d(rng), im = d(rng);
    return Scalar{re, im};
  }
}

template <class Scalar>
MatrixX<Scalar> gaussian_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  MatrixX<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = gaussian_scalar<Scalar>(rng);
  return m;
}

template <class Scalar>
VectorX<Scalar> gaussian_vector(std::mt19937_64& rng, Index n) {
  return VectorX<Scalar>(gaussian_matrix<Scalar>(rng, n, 1));
}

/// Unit-sphere uniform vector inside a subspace (in its own coordinates the
/// draw is an isotropic Gaussian, normalized).
template <class Scalar>
VectorX<Scalar> random_unit_in(std::mt19937_64& rng, const Subspace<Scalar>& s) {
  if (s.rank() == 0) return VectorX<Scalar>::Zero(s.ambient_dim());
  VectorX<Scalar> c = gaussian_vector<Scalar>(rng, s.rank());
  while (c.norm() < 1e-8) c = gaussian_vector<Scalar>(rng, s.rank());
  c /= c.norm();
  return s.basis() * c;
}

struct RandomRelationConfig {
  Index max_dim = 8;
  bool square = false;
  double tol = kDefaultTol;
  /// Relations whose operator part has a finite reduced minimum modulus below
  /// this floor are resampled, keeping relative tolerances downstream
  /// meaningful. Zero disables the floor.
  double min_gamma = 1e-2;
};

/// Draws a structurally diverse relation: dense graphs, rank-deficient
/// graphs, prescribed operator/multivalued splits, and raw generator clouds
/// with forced kernel or multivalued directions.
template <class Scalar>
LinearRelation<Scalar> random_relation(std::mt19937_64& rng, const RandomRelationConfig& cfg = {}) {
  auto dim = [&](Index hi) { return 1 + static_cast<Index>(rng() % static_cast<uint64_t>(hi)); };
  for (int attempt = 0; attempt < 256; ++attempt) {
    const Index dh = dim(cfg.max_dim);
    const Index dk = cfg.square ? dh : dim(cfg.max_dim);
    LinearRelation<Scalar> rel;
    switch (rng() % 3) {
      case 0: {
        // Graph of a (possibly rank-deficient) matrix.
        const Index p = static_cast<Index>(rng() % static_cast<uint64_t>(std::min(dh, dk) + 1));
        MatrixX<Scalar> a = p == 0 ? MatrixX<Scalar>::Zero(dk, dh).eval()
                                   : MatrixX<Scalar>(gaussian_matrix<Scalar>(rng, dk, p) *
                                                     gaussian_matrix<Scalar>(rng, p, dh));
        rel = LinearRelation<Scalar>::from_graph_matrix(a, cfg.tol);
        break;
      }
      case 1: {
        // Prescribed operator action on a partial domain plus a multivalued part.
        const Index d = static_cast<Index>(rng() % static_cast<uint64_t>(dh + 1));
        const Index m = static_cast<Index>(rng() % static_cast<uint64_t>(dk + 1));
        auto dom = Subspace<Scalar>::span_of(gaussian_matrix<Scalar>(rng, dh, d), cfg.tol);
        MatrixX<Scalar> action = gaussian_matrix<Scalar>(rng, dk, dom.rank());
        MatrixX<Scalar> mul = gaussian_matrix<Scalar>(rng, dk, m);
        rel = LinearRelation<Scalar>::from_parts(action, dom.basis(), mul, dh, dk, cfg.tol);
        break;
      }
      default: {
        // Generator cloud with occasional pure-kernel / pure-mul columns.
        const Index g = static_cast<Index>(rng() % static_cast<uint64_t>(dh + dk + 1));
        MatrixX<Scalar> gen = gaussian_matrix<Scalar>(rng, dh + dk, g);
        for (Index j = 0; j < g; ++j) {
          const auto roll = rng() % 4;
          if (roll == 0) gen.col(j).head(dh).setZero();
          if (roll == 1) gen.col(j).tail(dk).setZero();
        }
        rel = LinearRelation<Scalar>::from_generators(gen, dh, dk, cfg.tol);
        break;
      }
    }
    if (cfg.min_gamma > 0) {
      const double g = gamma(rel);
      if (std::isfinite(g) && g < cfg.min_gamma) continue;
    }
    return rel;
  }
  throw Error("random_relation: resampling failed to clear the gamma floor");
}

}  // namespace relcalc
