#include "nilarea/catalog.hpp"
#include "nilarea/manifold.hpp"

#include <gtest/gtest.h>

using namespace nilarea;

namespace {

Vector vec(std::initializer_list<double> v)
{
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) { x(i++) = a; }
  return x;
}

Box square(int n, double h = 1.0) { return Box(static_cast<std::size_t>(n), {-h, h}); }

}  // namespace

TEST(Param, ParseAndErrors)
{
  auto h1 = heisenberg(1);
  EXPECT_THROW(parse_parametrization(h1, "y1; y2", 2, square(2)), ArityError);
  EXPECT_THROW(parse_parametrization(h1, "y1; y2; y3", 2, square(2)), ParseError);
  EXPECT_THROW(parse_parametrization(h1, "y1; y2; 0", 2, {{0, 0}, {0, 1}}), BadDimensions);
  EXPECT_THROW(parse_parametrization(h1, "y1; y1; y1", 2, square(2)), DegenerateTangent);
  const auto s = parse_parametrization(h1, "y1; y2; log(y1 + 0.5)", 2, {{-1, 1}, {0, 1}});
  EXPECT_THROW(s.point(vec({2.0, 0.5})), DomainViolation);
  EXPECT_THROW(s.point(vec({-0.7, 0.5})), NonFinite);
  EXPECT_NEAR(s.point(vec({0.5, 0.5}))(2), 0.0, 0.0);
}

TEST(Param, JacobianMatchesFiniteDifferences)
{
  auto h2 = heisenberg(2);
  const auto s = parse_parametrization(h2, "sin(y1)*y2; exp(y2); y1^3 - y2; sqrt(1 + y1^2); max(y1, y2) + abs(y1)", 2,
                                       square(2));
  const CounterRng rng(4, 0);
  for (std::size_t i = 0; i < 50; ++i) {
    const Vector y = vec({1.8 * rng.uniform(i, 0) - 0.9, 1.8 * rng.uniform(i, 1) - 0.9});
    if (std::abs(y(0) - y(1)) < 1e-3 || std::abs(y(0)) < 1e-3) { continue; }
    const Matrix j = s.jacobian(y);
    for (int k = 0; k < 2; ++k) {
      const double h = 1e-6;
      Vector a = y;
      Vector b = y;
      a(k) += h;
      b(k) -= h;
      const Vector fd = (s.point(a) - s.point(b)) / (2 * h);
      EXPECT_LT((fd - j.col(k)).norm(), 1e-6);
    }
  }
}

TEST(Classify, ParaboloidOrigin)
{
  auto h1 = heisenberg(1);
  const auto s = parse_parametrization(h1, "y1; y2; y1^2 + y2^2", 2, square(2));
  const auto a = classify_point(s, vec({0, 0}));
  EXPECT_EQ(a.degree, 2);
  EXPECT_EQ(a.sampled_max_degree, 3);
  EXPECT_TRUE(a.characteristic);
  EXPECT_FALSE(a.regular);
  EXPECT_EQ(a.classification, PointClass::Irregular);
  EXPECT_EQ(a.alpha, (std::vector<int>{2, 0}));
  ASSERT_TRUE(a.htangent.has_value());
  EXPECT_EQ(classify_subspace(*a.htangent).layer_intersection, (std::vector<int>{2, 0}));
  const auto b = classify_point(s, vec({0.3, -0.2}));
  EXPECT_EQ(b.degree, 3);
  EXPECT_EQ(b.classification, PointClass::Transversal);
}

TEST(Classify, VerticalPlane)
{
  auto h1 = heisenberg(1);
  const auto s = parse_parametrization(h1, "y1; 0; y2", 2, square(2));
  const auto a = classify_point(s, vec({0.4, -0.7}));
  EXPECT_EQ(a.degree, 3);
  EXPECT_EQ(a.q_n, 3);
  EXPECT_TRUE(a.regular);
  EXPECT_TRUE(a.htangent_vertical);
  EXPECT_EQ(a.classification, PointClass::Transversal);
  EXPECT_EQ(a.alpha, (std::vector<int>{1, 1}));
}

TEST(Classify, HelixIsHorizontal)
{
  auto h1 = heisenberg(1);
  const auto s = parse_parametrization(h1, "cos(y1); sin(y1); y1", 1, {{-3, 3}});
  for (double t : {-2.0, 0.0, 0.7}) {
    const auto a = classify_point(s, vec({t}));
    EXPECT_EQ(a.degree, 1);
    EXPECT_TRUE(a.frame_horizontal);
    EXPECT_TRUE(a.htangent_horizontal);
    EXPECT_EQ(a.classification, PointClass::Horizontal);
    EXPECT_EQ(a.alpha, (std::vector<int>{1, 0}));
  }
}

TEST(Classify, LegendrianSurface)
{
  auto h2 = heisenberg(2);
  const auto s = parse_parametrization(h2, "y1; y2; 2*y1 + y2; y1 + y2^2; y2^3/3", 2, square(2));
  for (const auto & y : {vec({0.0, 0.0}), vec({0.5, -0.3}), vec({-0.8, 0.9})}) {
    const auto a = classify_point(s, y);
    EXPECT_EQ(a.degree, 2);
    EXPECT_TRUE(a.regular);
    EXPECT_TRUE(a.frame_horizontal);
    EXPECT_EQ(a.classification, PointClass::Horizontal);
  }
  // span{e1, e2 + e3} is horizontal but not isotropic, hence not a subalgebra.
  const auto bad = parse_parametrization(h2, "y1; y2; y2; 0; 0", 2, square(2));
  const auto b = classify_point(bad, vec({0.0, 0.0}));
  EXPECT_EQ(b.degree, 2);
  EXPECT_FALSE(b.regular);
}

TEST(Classify, EngelRegularNotVertical)
{
  auto eng = engel();
  const auto s = parse_parametrization(eng, "y1; 0; 0; y2", 2, square(2));
  const auto a = classify_point(s, vec({0.2, 0.1}));
  EXPECT_EQ(a.degree, 4);
  EXPECT_EQ(a.q_n, 5);
  EXPECT_TRUE(a.regular);
  EXPECT_FALSE(a.characteristic);
  EXPECT_EQ(a.classification, PointClass::Regular);
  const auto r = blowup_rates(s, vec({0.2, 0.1}), vec({1.0, 1.0}));
  EXPECT_FALSE(r.covered);
  EXPECT_NE(r.advisory.find("CaseNotCovered"), std::string::npos);
}

TEST(DegreeMap, ParaboloidGrid)
{
  auto h1 = heisenberg(1);
  const auto s = parse_parametrization(h1, "y1; y2; y1^2 + y2^2", 2, square(2));
  const auto m = degree_map(s, {5, 5});
  ASSERT_EQ(m.points.size(), 25U);
  EXPECT_EQ(m.max_degree, 3);
  EXPECT_DOUBLE_EQ(m.low_degree_fraction, 1.0 / 25.0);
  EXPECT_EQ(m.degrees[12], 2);
  EXPECT_EQ(m.classes[12], "irregular");
  EXPECT_EQ(m.classes[0], "transversal");

  const auto before = worker_count();
  worker_count() = 3;
  const auto m3 = degree_map(s, {5, 5});
  worker_count() = before;
  EXPECT_EQ(m3.degrees, m.degrees);
  EXPECT_EQ(m3.classes, m.classes);
}

TEST(Property, AlphaMatchesDegreeAndTranslationInvariance)
{
  const CounterRng rng(11, 2);
  for (const auto & g : {heisenberg(1), heisenberg(2), engel(), free2(3), h_type(4)}) {
    const int q = g->dim();
    for (int n = 1; n < q; ++n) {
      for (std::size_t trial = 0; trial < 20; ++trial) {
        const std::size_t idx = trial * 64 + static_cast<std::size_t>(n);
        Vector p(q);
        Matrix t(q, n);
        for (int i = 0; i < q; ++i) {
          p(i) = rng.normal(idx, static_cast<std::uint64_t>(i));
          for (int k = 0; k < n; ++k) {
            // Sparse tangents produce low-degree and irregular configurations too.
            const double u = rng.uniform(idx, static_cast<std::uint64_t>(100 + i * n + k));
            t(i, k) = u < 0.5 ? 0.0 : rng.normal(idx, static_cast<std::uint64_t>(40 + i * n + k));
          }
        }
        Matrix unit = t;
        if (numerical_rank(unit, 1e-8) < n) { continue; }
        const auto xi = lift_tangent(g, p, t);
        const int degree = degree_of(xi, {});
        const Matrix c = solve_frame(*g, left_invariant_frame(*g, p), t);
        const auto alpha = alpha_from_coefficients(*g, c);
        int weighted = 0;
        for (std::size_t j = 0; j < alpha.size(); ++j) { weighted += static_cast<int>(j + 1) * alpha[j]; }
        EXPECT_EQ(weighted, degree);
        EXPECT_LE(degree, q_n_max_degree(*g, n));

        // Left translation by z maps tangents by A(zp) A(p)^{-1}; the frame coefficients are unchanged.
        Vector z(q);
        for (int i = 0; i < q; ++i) { z(i) = rng.normal(idx, static_cast<std::uint64_t>(500 + i)); }
        const Vector zp = bch_product(*g, z, p);
        const Matrix tz = left_invariant_frame(*g, zp) * c;
        EXPECT_EQ(degree_of(lift_tangent(g, zp, tz), {}), degree);

        // Dilation preserves degrees: d(delta_r) maps X_i to r^{d_i} X_i.
        Matrix tr = c;
        for (int i = 0; i < q; ++i) { tr.row(i) *= std::pow(1.7, g->degree(i)); }
        const Vector pr = dilate(*g, 1.7, p);
        EXPECT_EQ(degree_of(lift_tangent(g, pr, left_invariant_frame(*g, pr) * tr), {}), degree);
      }
    }
  }
}

TEST(Property, ReparametrizationInvariance)
{
  auto h1 = heisenberg(1);
  const auto a = parse_parametrization(h1, "y1; y2; y1*y2 + y2^2", 2, square(2));
  // y -> (y1 + y2^3, 2 y2) is a diffeomorphism near 0.
  const auto b = parse_parametrization(h1, "y1 - (y2/2)^3; y2/2; (y1 - (y2/2)^3)*(y2/2) + (y2/2)^2", 2, square(2));
  for (const auto & y : {vec({0.0, 0.0}), vec({0.3, 0.1}), vec({-0.5, 0.4})}) {
    const Vector yb = vec({y(0) + std::pow(y(1), 3), 2 * y(1)});
    const auto ca = classify_point(a, y);
    const auto cb = classify_point(b, yb);
    EXPECT_LT((a.point(y) - b.point(yb)).norm(), 1e-12);
    EXPECT_EQ(ca.degree, cb.degree);
    EXPECT_EQ(ca.classification, cb.classification);
    EXPECT_EQ(ca.alpha, cb.alpha);
  }
}

TEST(Blowup, PlaneAndHelix)
{
  auto h1 = heisenberg(1);
  const auto plane = parse_parametrization(h1, "y1; 0; y2", 2, square(2));
  const auto r = blowup_rates(plane, vec({0.3, 0.2}), vec({1.0, 1.0}));
  EXPECT_TRUE(r.covered);
  EXPECT_TRUE(r.pass);
  for (const auto & c : r.coords) {
    if (c.in_tangent) { EXPECT_NEAR(c.slope, c.degree, 1e-9); }
  }

  const auto helix = parse_parametrization(h1, "cos(y1); sin(y1); y1", 1, {{-3, 3}});
  const auto rh = blowup_rates(helix, vec({0.0}), vec({1.0}));
  EXPECT_TRUE(rh.covered);
  EXPECT_TRUE(rh.pass);
  int tangent_coords = 0;
  for (const auto & c : rh.coords) {
    tangent_coords += c.in_tangent ? 1 : 0;
    if (!c.in_tangent) { EXPECT_LT(c.ratios.back(), 1e-2); }
  }
  EXPECT_EQ(tangent_coords, 1);

  // Transversal point of the paraboloid: the graph over the vertical plane A is o(t^{d_s}).
  const auto par = parse_parametrization(h1, "y1; y2; y1^2 + y2^2", 2, square(2));
  const auto rp = blowup_rates(par, vec({0.4, 0.3}), vec({0.6, -1.0}));
  EXPECT_TRUE(rp.covered);
  EXPECT_TRUE(rp.pass);
}

TEST(Blowup, EngelCurve)
{
  const auto s = parse_parametrization(engel(), "y1; y1^2; y1^3; y1^4", 1, {{-1, 1}});
  const auto r = blowup_rates(s, vec({0.25}), vec({1.0}));
  EXPECT_TRUE(r.covered);
  EXPECT_TRUE(r.pass);
}
