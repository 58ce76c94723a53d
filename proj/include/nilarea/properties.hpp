#pragma once

/**
 * @file
 * @brief Sampled group-law residuals, the brute-force Q_n oracle and random vertical subgroups.
 */

#include "nilarea/algebra.hpp"
#include "nilarea/rng.hpp"

#include <array>

namespace nilarea {

struct GroupLawResiduals
{
  std::string group;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double associativity = 0.0;
  double inverse = 0.0;
  double dilation = 0.0;
  /// max |A(delta_r x)_{li} - r^{d_l - d_i} A(x)_{li}|, scaled by the entry size.
  double frame_homogeneity = 0.0;

  [[nodiscard]] double worst() const { return std::max({associativity, inverse, dilation, frame_homogeneity}); }
};

/// Uniform point of [-1, 1]^q drawn from slots slot0..slot0+q-1.
inline Vector random_cube_point(const GradedGroup & g, const CounterRng & rng, std::size_t i, std::uint64_t slot0)
{
  Vector x(g.dim());
  for (int k = 0; k < g.dim(); ++k) { x(k) = 2.0 * rng.uniform(i, slot0 + static_cast<std::uint64_t>(k)) - 1.0; }
  return x;
}

/// Residuals relative to max(1, size of the compared values), maximized over samples.
inline GroupLawResiduals group_law_residuals(const GroupPtr & gp, std::size_t samples, std::uint64_t seed)
{
  const auto & g = *gp;
  const CounterRng rng(seed, 0x9a11);
  auto sample = [&](std::size_t i) {
    const Vector x = random_cube_point(g, rng, i, 0);
    const Vector y = random_cube_point(g, rng, i, 100);
    const Vector z = random_cube_point(g, rng, i, 200);
    const double r = 0.1 + 3.0 * rng.uniform(i, 300);
    auto rel = [](const Vector & a, const Vector & b) { return max_abs(a - b) / std::max({1.0, max_abs(a), max_abs(b)}); };
    std::array<double, 4> v{};
    v[0] = rel(bch_product(g, bch_product(g, x, y), z), bch_product(g, x, bch_product(g, y, z)));
    v[1] = std::max(max_abs(bch_product(g, x, inverse(g, x))), max_abs(bch_product(g, inverse(g, x), x))) / std::max(1.0, max_abs(x));
    v[2] = rel(dilate(g, r, bch_product(g, x, y)), bch_product(g, dilate(g, r, x), dilate(g, r, y)));
    const Matrix a = left_invariant_frame(g, x);
    const Matrix ar = left_invariant_frame(g, dilate(g, r, x));
    for (int l = 0; l < g.dim(); ++l) {
      for (int c = 0; c < g.dim(); ++c) {
        const double expect = std::pow(r, g.degree(l) - g.degree(c)) * a(l, c);
        v[3] = std::max(v[3], std::abs(ar(l, c) - expect) / std::max(1.0, std::abs(expect)));
      }
    }
    return v;
  };
  std::vector<std::array<double, 4>> partial((samples + kChunk - 1) / kChunk);
  for_each_chunk(samples, [&](std::size_t b, std::size_t e, std::size_t c) {
    std::array<double, 4> acc{};
    for (std::size_t i = b; i < e; ++i) {
      const auto v = sample(i);
      for (std::size_t k = 0; k < 4; ++k) { acc[k] = std::max(acc[k], v[k]); }
    }
    partial[c] = acc;
  });
  std::array<double, 4> worst{};
  for (const auto & p : partial) {
    for (std::size_t k = 0; k < 4; ++k) { worst[k] = std::max(worst[k], p[k]); }
  }
  GroupLawResiduals out;
  out.group = g.name();
  out.samples = samples;
  out.seed = seed;
  out.associativity = worst[0];
  out.inverse = worst[1];
  out.dilation = worst[2];
  out.frame_homogeneity = worst[3];
  return out;
}

/// max over n-subsets of coordinate indices of the summed degrees.
inline int q_n_brute_force(const GradedGroup & g, int n)
{
  const int q = g.dim();
  if (n < 1 || n > q) { throw BadDimensions("n must satisfy 1 <= n <= q"); }
  std::vector<int> mask(static_cast<std::size_t>(q), 0);
  std::fill(mask.end() - n, mask.end(), 1);
  int best = 0;
  do {
    int d = 0;
    for (int i = 0; i < q; ++i) {
      if (mask[static_cast<std::size_t>(i)] != 0) { d += g.degree(i); }
    }
    best = std::max(best, d);
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

/**
 * @brief Random vertical subgroup of dimension n: a random k-plane of H^1 plus all higher layers.
 *
 * k = n - (q - h_1); the k-plane is the span of k Gaussian vectors of layer 1.
 */
inline Subspace random_vertical_subspace(const GroupPtr & g, int n, const CounterRng & rng, std::size_t index)
{
  const int q = g->dim();
  const int h1 = g->layer_dims()[0];
  const int k = n - (q - h1);
  if (k < 1 || k > h1) { throw BadDimensions("vertical subgroup dimension must satisfy q - h_1 < n <= q"); }
  Matrix b = Matrix::Zero(q, n);
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < h1; ++r) { b(r, c) = rng.normal(index, static_cast<std::uint64_t>(c * h1 + r)); }
  }
  for (int r = h1; r < q; ++r) { b(r, k + r - h1) = 1.0; }
  return {g, b};
}

}  // namespace nilarea
