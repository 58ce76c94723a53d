#pragma once

/**
 * @file
 * @brief Explicitly evaluable homogeneous norms and distances.
 *
 * Every kind depends on the layer magnitudes r_j = |x_j| (Euclidean norm of the
 * layer-j block) only:
 *   box            max_j eps_j r_j^{1/j}
 *   cygan_koranyi  (r_1^4 + 16 r_2^2 / kappa^2)^{1/4}  (H-type, bracket scale kappa)
 *   euclidean_ball gauge of the Euclidean ball of radius r0
 *   multiradial    gauge of {phi(r_1, ..., r_iota) <= 1}
 * so ||x^{-1}|| = ||x|| and per-layer orthogonal maps are isometries.
 */

#include "nilarea/algebra.hpp"
#include "nilarea/expression.hpp"
#include "nilarea/rng.hpp"

#include <array>

namespace nilarea {

enum class DistanceKind
{
  Box,
  CyganKoranyi,
  EuclideanBall,
  Multiradial,
};

inline std::string to_string(DistanceKind k)
{
  switch (k) {
    case DistanceKind::Box: return "box";
    case DistanceKind::CyganKoranyi: return "cygan_koranyi";
    case DistanceKind::EuclideanBall: return "euclidean_ball";
    case DistanceKind::Multiradial: return "multiradial";
  }
  return "?";
}

class HomogeneousDistance
{
public:
  static constexpr int kMaxStep = 6;

  static HomogeneousDistance box(GroupPtr g, std::vector<double> eps)
  {
    if (static_cast<int>(eps.size()) != g->step()) { throw ConfigError("box distance needs one eps per layer"); }
    for (double e : eps) {
      if (!(e >= 0.0) || !std::isfinite(e)) { throw ConfigError("box eps must be finite and nonnegative"); }
    }
    HomogeneousDistance d(std::move(g), DistanceKind::Box);
    for (std::size_t j = 0; j < eps.size(); ++j) { d.eps_pow_[j] = std::pow(eps[j], static_cast<double>(j + 1)); }
    d.params_ = std::move(eps);
    return d;
  }

  /// (r_1^4 + (16 / kappa^2) r_2^2)^{1/4} where [x, y]_l = kappa <U_l x, y> with U_l U_m^T + U_m U_l^T = 2 delta_lm Id.
  static HomogeneousDistance cygan_koranyi(GroupPtr g)
  {
    if (g->step() != 2) { throw ConfigError("cygan_koranyi distance needs a step-two group"); }
    const double kappa = h_type_scale(*g);
    HomogeneousDistance d(std::move(g), DistanceKind::CyganKoranyi);
    d.params_ = {16.0 / (kappa * kappa)};
    return d;
  }

  /// Bracket scale kappa of an H-type table; throws ConfigError for other step-two groups.
  static double h_type_scale(const GradedGroup & g)
  {
    const int m = g.layer_dims()[0];
    const int k = g.layer_dims()[1];
    std::vector<Matrix> u(static_cast<std::size_t>(k), Matrix::Zero(m, m));
    for (const auto & e : g.brackets()) {
      auto & ul = u[static_cast<std::size_t>(e.k - m)];
      ul(e.j, e.i) = e.c;
      ul(e.i, e.j) = -e.c;
    }
    const double kappa = std::sqrt((u[0] * u[0].transpose()).trace() / m);
    for (int l = 0; l < k; ++l) {
      for (int n = l; n < k; ++n) {
        const Matrix sym = u[static_cast<std::size_t>(l)] * u[static_cast<std::size_t>(n)].transpose() +
                           u[static_cast<std::size_t>(n)] * u[static_cast<std::size_t>(l)].transpose();
        const Matrix expected = (l == n ? 2.0 * kappa * kappa : 0.0) * Matrix::Identity(m, m);
        if (!(kappa > 0.0) || max_abs(sym - expected) > 1e-12 * std::max(1.0, kappa * kappa)) {
          throw ConfigError("cygan_koranyi distance needs an H-type bracket table");
        }
      }
    }
    return kappa;
  }

  static HomogeneousDistance euclidean_ball(GroupPtr g, double r0)
  {
    if (!(r0 > 0.0)) { throw ConfigError("euclidean_ball radius must be positive"); }
    HomogeneousDistance d(std::move(g), DistanceKind::EuclideanBall);
    d.params_ = {r0};
    return d;
  }

  /// phi over variables r1..r_iota; must pass the monotone-safe construct check.
  static HomogeneousDistance multiradial(GroupPtr g, const std::string & phi_src)
  {
    const auto tree = expr::parse(phi_src, expr::numbered("r", g->step()));
    if (!expr::monotone_safe(tree)) {
      throw ConfigError("phi must be built from +, *, max, min, sqrt, positive constants and positive constant powers");
    }
    HomogeneousDistance d(std::move(g), DistanceKind::Multiradial);
    d.phi_ = expr::Program(tree);
    d.phi_src_ = phi_src;
    std::array<double, kMaxStep> zero{};
    if (!(d.phi_(zero.data()) < 1.0)) { throw ConfigError("phi(0) must be below 1"); }
    return d;
  }

  [[nodiscard]] const GroupPtr & group() const { return group_; }
  [[nodiscard]] DistanceKind kind() const { return kind_; }
  [[nodiscard]] const std::vector<double> & params() const { return params_; }
  [[nodiscard]] const std::string & phi_source() const { return phi_src_; }

  /// All kinds here are multiradial in the sense of a monotone function of layer magnitudes.
  [[nodiscard]] static bool is_multiradial() { return true; }

  /// "true" or "unknown".
  [[nodiscard]] std::string convexity() const
  {
    switch (kind_) {
      case DistanceKind::Box:
      case DistanceKind::EuclideanBall:
      case DistanceKind::CyganKoranyi: return "true";
      default: return "unknown";
    }
  }
  [[nodiscard]] bool convex_ball() const { return convexity() == "true"; }

  [[nodiscard]] std::array<double, kMaxStep> magnitudes(const double * x) const
  {
    std::array<double, kMaxStep> r{};
    const auto & g = *group_;
    for (int j = 1; j <= g.step(); ++j) {
      double s = 0.0;
      for (int i = g.layer_begin(j); i < g.layer_end(j); ++i) { s += x[i] * x[i]; }
      r[static_cast<std::size_t>(j - 1)] = std::sqrt(s);
    }
    return r;
  }

  /// ||x|| <= radius, without computing the norm.
  [[nodiscard]] bool within(const double * x, double radius) const
  {
    const auto r = magnitudes(x);
    const int step = group_->step();
    switch (kind_) {
      case DistanceKind::Box: {
        double rj = 1.0;
        for (int j = 0; j < step; ++j) {
          rj *= radius;
          if (eps_pow_[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(j)] > rj) { return false; }
        }
        return true;
      }
      case DistanceKind::CyganKoranyi: {
        const double r2 = radius * radius;
        return r[0] * r[0] * r[0] * r[0] + params_[0] * r[1] * r[1] <= r2 * r2;
      }
      default: return phi_scaled(r, radius) <= 1.0;
    }
  }

  [[nodiscard]] double norm(const double * x) const
  {
    const auto r = magnitudes(x);
    const int step = group_->step();
    switch (kind_) {
      case DistanceKind::Box: {
        double m = 0.0;
        for (int j = 0; j < step; ++j) {
          const double e = params_[static_cast<std::size_t>(j)];
          if (e > 0.0) { m = std::max(m, e * std::pow(r[static_cast<std::size_t>(j)], 1.0 / (j + 1))); }
        }
        return m;
      }
      case DistanceKind::CyganKoranyi: return std::pow(r[0] * r[0] * r[0] * r[0] + params_[0] * r[1] * r[1], 0.25);
      default: return gauge(r);
    }
  }

  [[nodiscard]] double norm(const Vector & x) const
  {
    check_point(*group_, x);
    return norm(x.data());
  }

  /// d(x, y) = ||x^{-1} y||.
  [[nodiscard]] double distance(const Vector & x, const Vector & y) const
  {
    return norm(bch_product(*group_, inverse(*group_, x), y));
  }

private:
  HomogeneousDistance(GroupPtr g, DistanceKind k) : group_(std::move(g)), kind_(k)
  {
    if (group_->step() > kMaxStep) { throw ConfigError("distance supports step at most 6"); }
  }

  /// phi evaluated on the magnitudes of delta_{1/t} x.
  [[nodiscard]] double phi_scaled(const std::array<double, kMaxStep> & r, double t) const
  {
    std::array<double, kMaxStep> s{};
    double tj = 1.0;
    for (int j = 0; j < group_->step(); ++j) {
      tj *= t;
      s[static_cast<std::size_t>(j)] = r[static_cast<std::size_t>(j)] / tj;
    }
    if (kind_ == DistanceKind::EuclideanBall) {
      double sum = 0.0;
      for (int j = 0; j < group_->step(); ++j) { sum += s[static_cast<std::size_t>(j)] * s[static_cast<std::size_t>(j)]; }
      return std::sqrt(sum) / params_[0];
    }
    return phi_(s.data());
  }

  /// Smallest t with phi(delta_{1/t} x) <= 1, by bracketing and bisection in log t.
  [[nodiscard]] double gauge(const std::array<double, kMaxStep> & r) const
  {
    bool zero = true;
    for (int j = 0; j < group_->step(); ++j) { zero = zero && r[static_cast<std::size_t>(j)] == 0.0; }
    if (zero) { return 0.0; }
    double lo = 1.0;
    double hi = 1.0;
    if (phi_scaled(r, 1.0) <= 1.0) {
      while (phi_scaled(r, lo) <= 1.0 && lo > 1e-300) { lo *= 0.5; }
      hi = lo * 2.0;
    } else {
      while (phi_scaled(r, hi) > 1.0 && hi < 1e300) { hi *= 2.0; }
      lo = hi * 0.5;
    }
    for (int it = 0; it < 80 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (phi_scaled(r, mid) <= 1.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }

  GroupPtr group_;
  DistanceKind kind_;
  std::vector<double> params_;
  std::array<double, kMaxStep> eps_pow_{};
  expr::Program phi_;
  std::string phi_src_;
};

/// Random point on the unit sphere of the norm: w / ||w|| (intrinsic rescaling) for Gaussian w
/// with a random weight per layer, which reaches both flat and spiky parts of the sphere.
inline Vector random_unit_point(const HomogeneousDistance & d, const CounterRng & rng, std::size_t index, std::uint64_t slot0)
{
  const auto & g = *d.group();
  Vector w(g.dim());
  for (int tries = 0; tries < 64; ++tries) {
    for (int j = 1; j <= g.step(); ++j) {
      const double weight = std::exp(6.0 * rng.uniform(index, slot0 + 97 * static_cast<std::uint64_t>(tries) + 80 + static_cast<std::uint64_t>(j)) - 3.0);
      for (int i = g.layer_begin(j); i < g.layer_end(j); ++i) {
        w(i) = weight * rng.normal(index, slot0 + 97 * static_cast<std::uint64_t>(tries) + static_cast<std::uint64_t>(i));
      }
    }
    const double n = d.norm(w.data());
    if (n > 0.0 && std::isfinite(n)) { return dilate(g, 1.0 / n, w); }
  }
  throw NonFinite("could not sample the unit sphere");
}

struct AxiomReport
{
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t triangle_violations = 0;
  double worst_ratio = 0.0;
  [[nodiscard]] bool passed() const { return triangle_violations == 0; }
};

/**
 * @brief Sampled triangle-inequality check ||xy|| <= ||x|| + ||y||.
 *
 * By homogeneity and ||x^{-1}|| = ||x|| it suffices to take ||x|| = 1 and ||y|| = s
 * in (0, 1]; s is drawn log-uniformly in [1e-3, 1] with a quarter of the samples at
 * s = 1.  A violation is a ratio above 1 + 1e-12.  Passing is necessary, not
 * sufficient, for d to be a distance.
 */
inline AxiomReport verify_distance_axioms(const HomogeneousDistance & d, std::size_t samples, std::uint64_t seed)
{
  const auto & g = *d.group();
  const CounterRng rng(seed, 0x7a11);
  struct Local
  {
    std::size_t violations = 0;
    double worst = 0.0;
  };
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<Local> partial(chunks);
  for_each_chunk(samples, [&](std::size_t b, std::size_t e, std::size_t c) {
    std::vector<double> work(g.workspace_size());
    Vector xy(g.dim());
    Local acc;
    for (std::size_t i = b; i < e; ++i) {
      const Vector x = random_unit_point(d, rng, i, 0);
      const double s = (i % 4 == 0) ? 1.0 : std::pow(10.0, -3.0 * rng.uniform(i, 5000));
      const Vector y = dilate(g, s, random_unit_point(d, rng, i, 10000));
      g.product(x.data(), y.data(), xy.data(), work.data());
      const double ratio = d.norm(xy.data()) / (1.0 + s);
      acc.worst = std::max(acc.worst, ratio);
      if (ratio > 1.0 + 1e-12) { ++acc.violations; }
    }
    partial[c] = acc;
  });
  AxiomReport rep;
  rep.samples = samples;
  rep.seed = seed;
  for (const auto & p : partial) {
    rep.triangle_violations += p.violations;
    rep.worst_ratio = std::max(rep.worst_ratio, p.worst);
  }
  return rep;
}

/**
 * @brief Largest box weights passing the sampled triangle check, layer by layer.
 *
 * eps_1 = 1.  For layer j the higher weights are set to 0 (layer j of xy depends on
 * layers <= j only, and dropping higher layers from ||x|| + ||y|| is the hardest
 * case), then eps_j is bisected in log scale on [1e-3, eps_{j-1}].  The result is
 * multiplied by `margin` so a larger re-verification sample still passes.
 */
inline std::vector<double> calibrate_box(const GroupPtr & g, std::size_t samples, std::uint64_t seed, double margin = 0.9)
{
  std::vector<double> eps(static_cast<std::size_t>(g->step()), 0.0);
  eps[0] = 1.0;
  constexpr double kFloor = 1e-3;
  for (int j = 2; j <= g->step(); ++j) {
    auto passes = [&](double e) {
      auto trial = eps;
      trial[static_cast<std::size_t>(j - 1)] = e;
      return verify_distance_axioms(HomogeneousDistance::box(g, trial), samples, seed + static_cast<std::uint64_t>(j)).passed();
    };
    const double upper = eps[static_cast<std::size_t>(j - 2)];
    double value = upper;
    if (!passes(upper)) {
      if (!passes(kFloor)) {
        throw CalibrationFailed("no eps_" + std::to_string(j) + " above 1e-3 passes the triangle check");
      }
      double lo = std::log(kFloor);
      double hi = std::log(upper);
      for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (passes(std::exp(mid))) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      value = std::max(kFloor, std::exp(lo) * margin);
    }
    eps[static_cast<std::size_t>(j - 1)] = value;
  }
  return eps;
}

/**
 * @brief Radius R of a Euclidean ball in S (centred at 0) containing B(u, r) ∩ S.
 *
 * Along sampled unit directions w of S the outermost member rho w of the section is
 * located by a grid scan of [0, rho_hi] followed by bisection, where ||rho_hi w|| >
 * ||u|| + r guarantees that nothing further out belongs to the ball.  R is 1.5 times
 * the largest such rho.
 */
inline double ball_bounding_radius(const HomogeneousDistance & d, const Subspace & s, const Vector & u, std::uint64_t seed = 1,
                                   int directions = 0, double radius = 1.0)
{
  const auto & g = *d.group();
  const Matrix q = s.orthonormal();
  const int n = s.dim();
  const double reach = d.norm(u) + radius;
  const Vector neg_u = -u;
  std::vector<double> work(g.workspace_size());
  Vector diff(g.dim());
  auto member = [&](const Vector & w, double rho) {
    const Vector p = rho * w;
    g.product(neg_u.data(), p.data(), diff.data(), work.data());
    return d.within(diff.data(), radius);
  };

  std::vector<Vector> dirs;
  if (n == 1) {
    dirs = {q.col(0), -q.col(0)};
  } else if (n == 2) {
    const int k = directions > 0 ? directions : 128;
    for (int a = 0; a < k; ++a) {
      const double th = 2.0 * std::numbers::pi * a / k;
      dirs.emplace_back(std::cos(th) * q.col(0) + std::sin(th) * q.col(1));
    }
  } else {
    const int k = directions > 0 ? directions : 512;
    const CounterRng rng(seed, 0xb0b);
    for (int a = 0; a < k; ++a) {
      Vector c(n);
      for (int t = 0; t < n; ++t) { c(t) = rng.normal(static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(t)); }
      dirs.emplace_back(q * c.normalized());
    }
    for (int t = 0; t < n; ++t) {
      dirs.emplace_back(q.col(t));
      dirs.emplace_back(-q.col(t));
    }
  }

  constexpr int kGrid = 256;
  double best = -1.0;
  for (const auto & w : dirs) {
    double hi = 1.0;
    while (d.within(Vector(hi * w).data(), reach)) { hi *= 2.0; }
    int last = -1;
    for (int k = 0; k <= kGrid; ++k) {
      if (member(w, hi * k / kGrid)) { last = k; }
    }
    if (last < 0) { continue; }
    double lo = hi * last / kGrid;
    double up = hi * (last + 1) / kGrid;
    if (last == kGrid) { up = hi; }
    for (int it = 0; it < 60 && last < kGrid; ++it) {
      const double mid = 0.5 * (lo + up);
      if (member(w, mid)) {
        lo = mid;
      } else {
        up = mid;
      }
    }
    best = std::max(best, lo);
  }
  if (best < 0.0) { throw EmptySection("B(u, r) does not meet the subspace"); }
  return 1.5 * std::max(best, 1e-300);
}

}  // namespace nilarea
