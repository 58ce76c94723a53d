#include "nilarea/catalog.hpp"
#include "nilarea/exterior.hpp"
#include "nilarea/rng.hpp"

#include <gtest/gtest.h>

using namespace nilarea;

namespace {

Multivector e(const GroupPtr & g, std::vector<int> idx) { return Multivector::basis(g, idx); }

Multivector random_vector(const GroupPtr & g, const CounterRng & rng, std::size_t i)
{
  Vector v(g->dim());
  for (int k = 0; k < g->dim(); ++k) { v(k) = rng.normal(i, static_cast<std::uint64_t>(k)); }
  return Multivector::from_vector(g, v);
}

}  // namespace

TEST(Wedge, BasicSigns)
{
  auto g = heisenberg(1);
  EXPECT_TRUE(wedge(e(g, {0}), e(g, {0})).empty());
  const auto e12 = wedge(e(g, {0}), e(g, {1}));
  EXPECT_EQ(e12.coefficient(make_key({0, 1})), 1.0);
  EXPECT_EQ(wedge(e(g, {1}), e(g, {0})).coefficient(make_key({0, 1})), -1.0);
  const auto m = wedge(e(g, {0}) + e(g, {2}), e(g, {1}));
  ASSERT_EQ(m.terms().size(), 2U);
  EXPECT_EQ(m.coefficient(make_key({0, 1})), 1.0);
  EXPECT_EQ(m.coefficient(make_key({1, 2})), -1.0);
  EXPECT_THROW(wedge(wedge(e12, e(g, {2})), e(g, {0})), GradeOverflow);
  EXPECT_EQ(Multivector::basis(g, {2, 0}).coefficient(make_key({0, 2})), -1.0);
}

TEST(Wedge, GradedCommutativityAndAssociativity)
{
  auto g = heisenberg(2);
  const CounterRng rng(11, 0);
  for (std::size_t s = 0; s < 50; ++s) {
    const auto a = wedge(random_vector(g, rng, 3 * s), random_vector(g, rng, 3 * s + 1));
    const auto b = random_vector(g, rng, 3 * s + 2);
    const auto c = random_vector(g, rng, 3 * s + 7000);
    const auto ab = wedge(a, b);
    const auto ba = wedge(b, a);
    // (-1)^{2*1} = 1
    EXPECT_LT((ab + (-1.0) * ba).norm(), 1e-12);
    EXPECT_LT((wedge(wedge(a, b), c) + (-1.0) * wedge(a, wedge(b, c))).norm(), 1e-12);
    const auto bc = wedge(b, c);
    EXPECT_LT((bc + wedge(c, b)).norm(), 1e-12);
  }
}

TEST(Projection, DegreesAndCompleteness)
{
  auto g = heisenberg(1);
  const auto x12 = e(g, {0, 1});
  EXPECT_EQ(project_degree(x12, 2).norm(), 1.0);
  EXPECT_TRUE(project_degree(x12, 3).empty());
  EXPECT_EQ(project_degree(e(g, {0, 2}), 3).norm(), 1.0);
  EXPECT_TRUE(project_degree(Multivector(g, 2), 2).empty());

  EXPECT_DOUBLE_EQ(g_norm(e(g, {0, 2})), 1.0);
  EXPECT_DOUBLE_EQ(g_norm(3.0 * x12), 3.0);
  EXPECT_DOUBLE_EQ(g_norm(x12 + e(g, {0, 2})), std::sqrt(2.0));

  auto h2 = heisenberg(2);
  const CounterRng rng(2, 0);
  for (std::size_t s = 0; s < 30; ++s) {
    const auto v = wedge(wedge(random_vector(h2, rng, s), random_vector(h2, rng, s + 100)), random_vector(h2, rng, s + 200));
    double sum = 0;
    Multivector recon(h2, 3);
    for (int m = 1; m <= 8; ++m) {
      const auto p = project_degree(v, m);
      EXPECT_LT((project_degree(p, m) + (-1.0) * p).norm(), 1e-15);
      sum += p.norm() * p.norm();
      recon = recon + p;
    }
    EXPECT_NEAR(sum, v.norm() * v.norm(), 1e-10);
    EXPECT_LT((recon + (-1.0) * v).norm(), 1e-12);
  }
}

TEST(Lift, ParaboloidAndPlane)
{
  auto g = heisenberg(1);
  Matrix t(3, 2);
  t << 1, 0, 0, 1, 0, 0;
  const auto xi = lift_tangent(g, Vector::Zero(3), t);
  EXPECT_EQ(xi.terms().size(), 1U);
  EXPECT_DOUBLE_EQ(xi.coefficient(make_key({0, 1})), 1.0);
  EXPECT_EQ(xi.max_degree(), 2);

  // Plane {x2 = 0} at p = (p1, 0, p3): X_1(p) = e_1, so xi = X_1 ^ X_3.
  Vector p(3);
  p << 0.8, 0.0, -1.3;
  Matrix t13(3, 2);
  t13 << 1, 0, 0, 0, 0, 1;
  const auto xi13 = lift_tangent(g, p, t13);
  EXPECT_EQ(xi13.terms().size(), 1U);
  EXPECT_DOUBLE_EQ(xi13.coefficient(make_key({0, 2})), 1.0);

  Matrix dep(3, 2);
  dep << 1, 2, 1, 2, 0, 0;
  EXPECT_THROW(lift_tangent(g, p, dep), DegenerateTangent);
}

TEST(Lift, MaxDegreeIsLeftInvariant)
{
  const CounterRng rng(4, 4);
  for (const auto & g : {heisenberg(1), heisenberg(2), engel(), free2(3)}) {
    const int q = g->dim();
    for (std::size_t s = 0; s < 20; ++s) {
      // Fixed frame coefficients C: the tangent at p is A(p) C.
      Matrix c(q, 2);
      for (int i = 0; i < q; ++i) {
        c(i, 0) = i < 2 ? rng.normal(s, static_cast<std::uint64_t>(i)) : 0.0;
        c(i, 1) = rng.normal(s, static_cast<std::uint64_t>(i + 40));
      }
      int reference = -1;
      for (std::size_t k = 0; k < 5; ++k) {
        Vector p(q);
        for (int i = 0; i < q; ++i) { p(i) = 2 * rng.uniform(s * 10 + k, static_cast<std::uint64_t>(i + 100)) - 1; }
        const Matrix tangent = left_invariant_frame(*g, p) * c;
        const int d = lift_tangent(g, p, tangent).max_degree();
        if (reference < 0) { reference = d; }
        EXPECT_EQ(d, reference) << g->name();
      }
    }
  }
}

TEST(DegreeMinors, MatchesProjectedWedge)
{
  auto g = engel();
  const CounterRng rng(9, 9);
  for (int n = 1; n <= 3; ++n) {
    for (std::size_t s = 0; s < 10; ++s) {
      Matrix c(4, n);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < n; ++j) { c(i, j) = rng.normal(s, static_cast<std::uint64_t>(i * 8 + j)); }
      }
      const auto xi = wedge_columns(g, c);
      for (int m = 1; m <= 7; ++m) {
        EXPECT_NEAR(DegreeMinors(*g, n, m).norm(c), project_degree(xi, m).norm(), 1e-12);
      }
    }
  }
}
