#include "nilarea/catalog.hpp"
#include "nilarea/metrics.hpp"

#include <gtest/gtest.h>

using namespace nilarea;

namespace {

Vector v3(double a, double b, double c)
{
  Vector x(3);
  x << a, b, c;
  return x;
}

std::vector<HomogeneousDistance> sample_distances()
{
  auto h1 = heisenberg(1);
  auto eng = engel();
  auto ht = h_type(4);
  return {HomogeneousDistance::box(h1, {1.0, 0.5}),
          HomogeneousDistance::cygan_koranyi(h1),
          HomogeneousDistance::euclidean_ball(h1, 0.5),
          HomogeneousDistance::multiradial(h1, "max(r1, 2 * r2^0.5)"),
          HomogeneousDistance::box(eng, {1.0, 0.6, 0.3}),
          HomogeneousDistance::multiradial(eng, "r1^2 + r2 + r3^0.5"),
          HomogeneousDistance::cygan_koranyi(ht)};
}

Vector random_point(const GradedGroup & g, const CounterRng & rng, std::size_t i)
{
  Vector x(g.dim());
  for (int k = 0; k < g.dim(); ++k) { x(k) = 2.0 * rng.normal(i, static_cast<std::uint64_t>(k)); }
  return x;
}

}  // namespace

TEST(Distance, ClosedForms)
{
  auto h1 = heisenberg(1);
  // [e1, e2] = 2 e3 here, so the vertical weight is 16 / 2^2.
  const auto ck = HomogeneousDistance::cygan_koranyi(h1);
  EXPECT_NEAR(ck.norm(v3(0, 0, 4)), 2.0 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ck.norm(v3(1, 1, 0)), std::sqrt(2.0), 1e-14);
  const auto box = HomogeneousDistance::box(h1, {1.0, 0.5});
  EXPECT_NEAR(box.norm(v3(0.3, 0.4, 1.0)), 0.5, 1e-15);
  EXPECT_NEAR(box.norm(v3(0.0, 0.0, 16.0)), 2.0, 1e-15);
  EXPECT_TRUE(box.within(v3(0.6, 0.8, 4.0).data(), 1.0));
  EXPECT_FALSE(box.within(v3(0.6, 0.8, 4.01).data(), 1.0));
  const auto eb = HomogeneousDistance::euclidean_ball(h1, 0.5);
  EXPECT_NEAR(eb.norm(v3(0.5, 0.0, 0.0)), 1.0, 1e-14);
  EXPECT_NEAR(eb.norm(v3(0.0, 0.0, 0.5)), 1.0, 1e-14);
  const auto mr = HomogeneousDistance::multiradial(h1, "max(r1, 2 * r2^0.5)");
  EXPECT_NEAR(mr.norm(v3(0.0, 0.0, 4.0)), 4.0, 1e-13);

  const auto ht = HomogeneousDistance::cygan_koranyi(h_type(4));
  Vector t = Vector::Zero(7);
  t(5) = 4.0;
  EXPECT_NEAR(ht.norm(t), 4.0, 1e-14);
  EXPECT_THROW(HomogeneousDistance::cygan_koranyi(engel()), ConfigError);
  EXPECT_THROW(HomogeneousDistance::cygan_koranyi(free2(3)), ConfigError);
  EXPECT_THROW(HomogeneousDistance::multiradial(h1, "r1 - r2"), ConfigError);
  EXPECT_THROW(HomogeneousDistance::box(h1, {1.0}), ConfigError);
}

TEST(Distance, HomogeneityInverseLeftInvariance)
{
  const CounterRng rng(21, 0);
  for (const auto & d : sample_distances()) {
    const auto & g = *d.group();
    for (std::size_t i = 0; i < 300; ++i) {
      const Vector x = random_point(g, rng, 3 * i);
      const Vector y = random_point(g, rng, 3 * i + 1);
      const Vector z = random_point(g, rng, 3 * i + 2);
      const double r = 10.0 * rng.uniform(i, 900) + 1e-3;
      EXPECT_NEAR(d.norm(dilate(g, r, x)), r * d.norm(x), 1e-12 * r * d.norm(x)) << to_string(d.kind());
      EXPECT_NEAR(d.norm(inverse(g, x)), d.norm(x), 1e-15 * d.norm(x));
      const double dxy = d.distance(x, y);
      EXPECT_NEAR(d.distance(bch_product(g, z, x), bch_product(g, z, y)), dxy, 1e-12 * std::max(1.0, dxy) * 10);
      EXPECT_EQ(d.distance(x, x), 0.0);
      EXPECT_EQ(d.within(x.data(), d.norm(x) * (1 + 1e-12)), true);
      EXPECT_EQ(d.within(x.data(), d.norm(x) * (1 - 1e-9)), false);
    }
  }
}

TEST(Distance, LayerRotationSymmetry)
{
  auto h2 = heisenberg(2);
  const auto d = HomogeneousDistance::box(h2, {1.0, 0.7});
  const CounterRng rng(5, 5);
  // Random orthogonal map on the first layer.
  Matrix m(4, 4);
  for (int i = 0; i < 16; ++i) { m(i / 4, i % 4) = rng.normal(0, static_cast<std::uint64_t>(i)); }
  const Matrix o = Eigen::HouseholderQR<Matrix>(m).householderQ();
  for (std::size_t i = 0; i < 100; ++i) {
    const Vector x = random_point(*h2, rng, i + 1);
    Vector tx = x;
    tx.head(4) = o * x.head(4);
    tx(4) = -x(4);
    EXPECT_NEAR(d.norm(tx), d.norm(x), 1e-14 * d.norm(x));
  }
}

TEST(Distance, Convexity)
{
  auto h1 = heisenberg(1);
  EXPECT_TRUE(HomogeneousDistance::box(h1, {1, 1}).convex_ball());
  EXPECT_TRUE(HomogeneousDistance::cygan_koranyi(h1).convex_ball());
  EXPECT_TRUE(HomogeneousDistance::euclidean_ball(h1, 1).convex_ball());
  EXPECT_EQ(HomogeneousDistance::multiradial(h1, "r1 + r2").convexity(), "unknown");
}

TEST(Axioms, SampledTriangle)
{
  EXPECT_EQ(verify_distance_axioms(HomogeneousDistance::box(abelian(3), {1.0}), 20000, 1).triangle_violations, 0U);
  auto h1 = heisenberg(1);
  EXPECT_GT(verify_distance_axioms(HomogeneousDistance::box(h1, {1.0, 10.0}), 20000, 1).triangle_violations, 0U);
  EXPECT_EQ(verify_distance_axioms(HomogeneousDistance::box(h1, {1.0, 1.0}), 20000, 1).triangle_violations, 0U);
  EXPECT_EQ(verify_distance_axioms(HomogeneousDistance::cygan_koranyi(h1), 20000, 1).triangle_violations, 0U);
  EXPECT_EQ(verify_distance_axioms(HomogeneousDistance::cygan_koranyi(h_type(4)), 20000, 1).triangle_violations, 0U);
  EXPECT_EQ(verify_distance_axioms(HomogeneousDistance::cygan_koranyi(h_type(8)), 20000, 1).triangle_violations, 0U);
}

TEST(Axioms, Calibration)
{
  EXPECT_EQ(calibrate_box(abelian(2), 1000, 3), std::vector<double>{1.0});
  // For the box norm on H^1 the triangle inequality holds iff eps_2^2 <= 2, so the cap eps_1 = 1 is returned.
  const auto h1 = calibrate_box(heisenberg(1), 5000, 3);
  ASSERT_EQ(h1.size(), 2U);
  EXPECT_GT(h1[1], 0.0);
  EXPECT_LE(h1[1], 1.0);
  EXPECT_EQ(verify_distance_axioms(HomogeneousDistance::box(heisenberg(1), h1), 200000, 99).triangle_violations, 0U);
  const auto en = calibrate_box(engel(), 5000, 3);
  ASSERT_EQ(en.size(), 3U);
  EXPECT_GE(en[0], en[1]);
  EXPECT_GE(en[1], en[2]);
  EXPECT_EQ(verify_distance_axioms(HomogeneousDistance::box(engel(), en), 100000, 77).triangle_violations, 0U);
}

TEST(BoundingRadius, Sections)
{
  auto h1 = heisenberg(1);
  const auto eb = HomogeneousDistance::euclidean_ball(h1, 0.8);
  for (const auto & idx : std::vector<std::vector<int>>{{0, 2}, {1}, {0, 1, 2}}) {
    EXPECT_NEAR(ball_bounding_radius(eb, coordinate_subspace(h1, idx), Vector::Zero(3)), 1.2, 1e-9);
  }
  const auto box = HomogeneousDistance::box(h1, {1.0, 1.0});
  const double r = ball_bounding_radius(box, coordinate_subspace(h1, {0, 2}), Vector::Zero(3));
  EXPECT_LE(r, 1.5 * std::sqrt(2.0) + 1e-9);
  EXPECT_GE(r, 1.5 * std::sqrt(2.0) * 0.999);
  // u far from the plane {x_1 = x_3 = 0}... a far translate along e_2 misses span{e_1, e_3}.
  EXPECT_THROW(ball_bounding_radius(box, coordinate_subspace(h1, {0, 2}), v3(0, 5, 0)), EmptySection);
  // Centres in the unit ball always meet the vertical section through 0 in the multiradial case.
  const auto mr = HomogeneousDistance::multiradial(h1, "max(r1, r2^0.5)");
  const CounterRng rng(8, 8);
  for (std::size_t i = 0; i < 20; ++i) {
    const Vector u = random_unit_point(mr, rng, i, 0) * 1.0;
    EXPECT_NO_THROW(ball_bounding_radius(mr, coordinate_subspace(h1, {0, 2}), dilate(*h1, 0.999, u)));
  }
}
