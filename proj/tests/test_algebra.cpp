#include "nilarea/catalog.hpp"
#include "nilarea/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

using namespace nilarea;

namespace {

Vector v3(double a, double b, double c)
{
  Vector x(3);
  x << a, b, c;
  return x;
}

Vector random_point(const GradedGroup & g, const CounterRng & rng, std::size_t i, std::uint64_t slot0)
{
  Vector x(g.dim());
  for (int k = 0; k < g.dim(); ++k) { x(k) = 2.0 * rng.uniform(i, slot0 + static_cast<std::uint64_t>(k)) - 1.0; }
  return x;
}

std::vector<GroupPtr> property_groups()
{
  return {abelian(3), heisenberg(1), heisenberg(2), engel(), free2(3), h_type(4), h_type(8)};
}

}  // namespace

TEST(BchSeries, LowOrderCoefficients)
{
  const auto c = BchPlan::log_series(3);
  EXPECT_EQ(c.at("x"), Rational(1));
  EXPECT_EQ(c.at("xy"), Rational(1, 2));
  EXPECT_EQ(c.at("yx"), Rational(-1, 2));
  // (1/12)([x,[x,y]] + [y,[y,x]]) expands to xxy/12 - xyx/6 + yxx/12 + ...
  EXPECT_EQ(c.at("xxy"), Rational(1, 12));
  EXPECT_EQ(c.at("xyx"), Rational(-1, 6));
  EXPECT_EQ(c.at("yyx"), Rational(1, 12));
}

TEST(Group, AbelianProductIsAddition)
{
  auto g = abelian(3);
  const Vector x = v3(1, 2, 3);
  const Vector y = v3(-4, 0.5, 7);
  EXPECT_LT((bch_product(*g, x, y) - (x + y)).norm(), 1e-15);
}

TEST(Group, HeisenbergLaw)
{
  auto g = heisenberg(1);
  EXPECT_EQ(g->step(), 2);
  EXPECT_EQ(g->homogeneous_dimension(), 4);
  EXPECT_LT((bch_product(*g, v3(1, 0, 0), v3(0, 1, 0)) - v3(1, 1, 1)).norm(), 1e-15);
  // x_3 + x_3' + x_1 x_2' - x_2 x_1'
  const Vector x = v3(0.3, -1.2, 0.7);
  const Vector y = v3(2.0, 0.4, -0.1);
  EXPECT_NEAR(bch_product(*g, x, y)(2), 0.7 - 0.1 + 0.3 * 0.4 - (-1.2) * 2.0, 1e-14);
}

TEST(Group, IdentityAndInverse)
{
  auto g = heisenberg(1);
  const Vector x = v3(1, 2, 3);
  EXPECT_LT((bch_product(*g, x, Vector::Zero(3)) - x).norm(), 1e-15);
  EXPECT_LT((bch_product(*g, Vector::Zero(3), x) - x).norm(), 1e-15);
  EXPECT_LT((inverse(*g, x) - v3(-1, -2, -3)).norm(), 1e-15);
}

TEST(Group, DilationAndErrors)
{
  auto g = heisenberg(1);
  EXPECT_LT((dilate(*g, 2.0, v3(1, 1, 1)) - v3(2, 2, 4)).norm(), 1e-15);
  EXPECT_LT((dilate(*g, 1.0, v3(1, 5, 1)) - v3(1, 5, 1)).norm(), 1e-15);
  EXPECT_THROW(dilate(*g, 0.0, v3(1, 1, 1)), NonPositiveScale);
  EXPECT_THROW(bch_product(*g, Vector::Zero(2), v3(0, 0, 0)), BadDimensions);
}

TEST(Group, ValidationErrors)
{
  EXPECT_THROW(load_group(nlohmann::json::parse(R"({"layers":[2,1],"brackets":[[1,2,1,1.0]]})")), GradingViolation);
  EXPECT_THROW(load_group(nlohmann::json::parse(R"({"layers":[2,0]})")), BadDimensions);
  EXPECT_THROW(load_group(nlohmann::json::parse(R"({"layers":[2,1],"brackets":[[1,2,4,1.0]]})")), BadDimensions);
  EXPECT_THROW(load_group(nlohmann::json::parse(R"({"layers":[2,1],"brackets":[[1,2,3,1.0],[2,1,3,1.0]]})")), GradingViolation);
  // Graded, but [e3, [e1, e2]] = e5 breaks the Jacobi identity on (e1, e2, e3).
  const auto bad = nlohmann::json::parse(R"({"layers":[3,1,1],"brackets":[[1,2,4,1.0],[1,4,5,1.0],[2,4,5,1.0],[2,3,4,0.0],[3,4,5,1.0]]})");
  EXPECT_THROW(load_group(bad), JacobiViolation);
  const auto h1 = load_group(nlohmann::json::parse(R"({"name":"h1","layers":[2,1],"brackets":[[1,2,3,2.0]]})"));
  EXPECT_EQ(h1->step(), 2);
  EXPECT_THROW(load_group(nlohmann::json::parse(R"({"layers":[2],"extra":1})")), ConfigError);
}

TEST(Group, CatalogNames)
{
  for (const auto & name : catalog_names()) { EXPECT_NO_THROW(catalog_group(name)) << name; }
  EXPECT_EQ(catalog_group("heisenberg(2)")->dim(), 5);
  EXPECT_EQ(catalog_group("h_type(8)")->dim(), 15);
  EXPECT_THROW(catalog_group("nonsense"), ConfigError);
}

TEST(Group, HTypeSkewAndComposition)
{
  // u_l is skew and u_l^2 = -Id, i.e. J-map identity of H-type algebras.
  for (int k : {2, 4, 8}) {
    auto g = h_type(k);
    for (int l = 1; l < k; ++l) {
      Matrix u = Matrix::Zero(k, k);
      for (const auto & e : g->brackets()) {
        if (e.k == k + l - 1) {
          u(e.j, e.i) = e.c;
          u(e.i, e.j) = -e.c;
        }
      }
      EXPECT_LT((u * u + Matrix::Identity(k, k)).norm(), 1e-12) << k << " " << l;
    }
  }
  auto g = h_type(4);
  Vector e1 = Vector::Zero(7);
  Vector e2 = Vector::Zero(7);
  e1(0) = 1;
  e2(1) = 1;
  Vector expected = Vector::Zero(7);
  expected(4) = 1;
  EXPECT_LT((g->bracket(e1, e2) - expected).norm(), 1e-15);
}

TEST(Group, PropertySweeps)
{
  const CounterRng rng(7, 1);
  for (const auto & g : property_groups()) {
    double assoc = 0;
    double inv = 0;
    double dil = 0;
    for (std::size_t i = 0; i < 2000; ++i) {
      const Vector x = random_point(*g, rng, i, 0);
      const Vector y = random_point(*g, rng, i, 100);
      const Vector z = random_point(*g, rng, i, 200);
      const double r = 0.1 + 3.0 * rng.uniform(i, 300);
      assoc = std::max(assoc, max_abs(bch_product(*g, bch_product(*g, x, y), z) - bch_product(*g, x, bch_product(*g, y, z))));
      inv = std::max(inv, max_abs(bch_product(*g, x, inverse(*g, x))));
      dil = std::max(dil, max_abs(dilate(*g, r, bch_product(*g, x, y)) - bch_product(*g, dilate(*g, r, x), dilate(*g, r, y))));
    }
    EXPECT_LT(assoc, 1e-9) << g->name();
    EXPECT_LT(inv, 1e-12) << g->name();
    EXPECT_LT(dil, 1e-9) << g->name();
  }
}

TEST(Group, ProductRecoversBracket)
{
  // Words with a copies of e_i and b copies of e_j land in degree a d_i + b d_j, so the
  // component of e_i·e_j in layer d_i + d_j is exactly [e_i, e_j] / 2.
  for (const auto & g : property_groups()) {
    const int q = g->dim();
    double worst = 0;
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) {
        if (i == j || g->degree(i) + g->degree(j) > g->step()) { continue; }
        Vector ei = Vector::Zero(q);
        Vector ej = Vector::Zero(q);
        ei(i) = 1;
        ej(j) = 1;
        const Vector prod = bch_product(*g, ei, ej);
        const int layer = g->degree(i) + g->degree(j);
        const Vector expected = g->bracket(ei, ej);
        for (int k = g->layer_begin(layer); k < g->layer_end(layer); ++k) {
          worst = std::max(worst, std::abs(2.0 * prod(k) - expected(k)));
        }
      }
    }
    EXPECT_LT(worst, 1e-12) << g->name();
  }
}

TEST(Frame, HeisenbergColumns)
{
  auto g = heisenberg(1);
  const Vector x = v3(0.7, -0.4, 2.0);
  const Matrix a = left_invariant_frame(*g, x);
  EXPECT_LT((a.col(0) - v3(1, 0, 0.4)).norm(), 1e-15);   // e1 - x2 e3
  EXPECT_LT((a.col(1) - v3(0, 1, 0.7)).norm(), 1e-15);   // e2 + x1 e3
  EXPECT_LT((a.col(2) - v3(0, 0, 1)).norm(), 1e-15);
  EXPECT_LT((frame_coefficients(*g, v3(1, 0, 0), v3(0, 1, 0)) - v3(0, 1, -1)).norm(), 1e-15);
  EXPECT_LT((frame_coefficients(*g, Vector::Zero(3), v3(1, 1, 0)) - v3(1, 1, 0)).norm(), 1e-15);
  EXPECT_LT((left_invariant_frame(*abelian(3), x) - Matrix::Identity(3, 3)).norm(), 1e-15);
}

TEST(Frame, MatchesFiniteDifferenceOfProduct)
{
  const CounterRng rng(3, 2);
  for (const auto & g : property_groups()) {
    const int q = g->dim();
    for (std::size_t s = 0; s < 20; ++s) {
      const Vector x = random_point(*g, rng, s, 0);
      const Matrix a = left_invariant_frame(*g, x);
      const double h = 1e-6;
      for (int i = 0; i < q; ++i) {
        Vector e = Vector::Zero(q);
        e(i) = h;
        const Vector fd = (bch_product(*g, x, e) - bch_product(*g, x, -e)) / (2 * h);
        EXPECT_LT((fd - a.col(i)).norm(), 1e-7) << g->name();
      }
    }
  }
}

TEST(Frame, UnipotentHomogeneousRoundTrip)
{
  const CounterRng rng(5, 3);
  for (const auto & g : property_groups()) {
    const int q = g->dim();
    for (std::size_t s = 0; s < 50; ++s) {
      const Vector x = random_point(*g, rng, s, 0);
      const double r = 0.2 + 2.0 * rng.uniform(s, 99);
      const Matrix a = left_invariant_frame(*g, x);
      const Matrix ar = left_invariant_frame(*g, dilate(*g, r, x));
      for (int l = 0; l < q; ++l) {
        for (int i = 0; i < q; ++i) {
          if (g->degree(l) <= g->degree(i)) { EXPECT_EQ(a(l, i), l == i ? 1.0 : 0.0); }
          EXPECT_NEAR(ar(l, i), std::pow(r, g->degree(l) - g->degree(i)) * a(l, i), 1e-12);
        }
        Vector col = a.col(l);
        Vector e = Vector::Zero(q);
        e(l) = 1;
        EXPECT_LT((solve_frame(*g, a, col) - e).norm(), 1e-12);
      }
    }
  }
}

TEST(Subspace, Classification)
{
  auto h1 = heisenberg(1);
  auto c13 = classify_subspace(coordinate_subspace(h1, {0, 2}));
  EXPECT_TRUE(c13.homogeneous);
  EXPECT_TRUE(c13.subalgebra);
  EXPECT_TRUE(c13.vertical);
  EXPECT_FALSE(c13.horizontal);
  auto c12 = classify_subspace(coordinate_subspace(h1, {0, 1}));
  EXPECT_TRUE(c12.homogeneous);
  EXPECT_FALSE(c12.subalgebra);
  EXPECT_TRUE(c12.horizontal);
  Matrix tilted(3, 1);
  tilted << 1, 0, 1;
  auto ct = classify_subspace(Subspace(h1, tilted));
  EXPECT_FALSE(ct.homogeneous);
  EXPECT_FALSE(ct.vertical);

  // Legendrian tangent at the origin of H^2: span{e1 + 2 e3 + e4, e2 + e3}.
  auto h2 = heisenberg(2);
  Matrix leg = Matrix::Zero(5, 2);
  leg(0, 0) = 1;
  leg(2, 0) = 2;
  leg(3, 0) = 1;
  leg(1, 1) = 1;
  leg(2, 1) = 1;
  auto cl = classify_subspace(Subspace(h2, leg));
  EXPECT_TRUE(cl.horizontal);
  EXPECT_TRUE(cl.subalgebra);
  EXPECT_TRUE(cl.homogeneous);

  Matrix dep(3, 2);
  dep << 1, 2, 0, 0, 0, 0;
  EXPECT_THROW(Subspace(h1, dep), DegenerateTangent);
}

TEST(QnMaxDegree, MatchesBruteForce)
{
  for (const auto & name : catalog_names()) {
    auto g = catalog_group(name);
    const int q = g->dim();
    for (int n = 1; n <= q; ++n) {
      // Brute force: all n-subsets of the coordinate indices.
      std::vector<int> mask(static_cast<std::size_t>(q), 0);
      std::fill(mask.end() - n, mask.end(), 1);
      int best = 0;
      do {
        int d = 0;
        for (int i = 0; i < q; ++i) {
          if (mask[static_cast<std::size_t>(i)] != 0) { d += g->degree(i); }
        }
        best = std::max(best, d);
      } while (std::next_permutation(mask.begin(), mask.end()));
      EXPECT_EQ(q_n_max_degree(*g, n), best) << name << " n=" << n;
    }
    EXPECT_EQ(q_n_max_degree(*g, q), g->homogeneous_dimension());
  }
  EXPECT_EQ(q_n_max_degree(*heisenberg(1), 1), 2);
  EXPECT_EQ(q_n_max_degree(*heisenberg(1), 2), 3);
  EXPECT_EQ(q_n_max_degree(*heisenberg(2), 3), 4);
}
