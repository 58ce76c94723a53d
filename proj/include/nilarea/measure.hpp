#pragma once

/**
 * @file
 * @brief Monte-Carlo and quadrature estimators: section areas, spherical factors,
 * intrinsic measure, Federer densities, covering sums, and the verification checks
 * built on them.
 *
 * All sample loops draw from counter-based streams and merge per-chunk partial sums
 * in chunk order, so an Estimate is a function of its inputs and seed only.
 */

#include "nilarea/manifold.hpp"
#include "nilarea/metrics.hpp"
#include "nilarea/optimize.hpp"

namespace nilarea {

struct Estimate
{
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string method;
  /// Deterministic quadrature only: |I_h - I_{2h}| / 3.
  double quad_error = 0.0;
};

struct Verdict
{
  std::string name;
  bool pass = false;
  bool advisory = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  std::string note;
};

namespace detail {

/// chunked_sum with a per-chunk scratch state built by `init()`.
template<std::size_t K, typename Init, typename F>
std::array<double, K> chunked_sum_state(std::size_t n, Init && init, F && f)
{
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::array<double, K>> partial(chunks);
  for_each_chunk(n, [&](std::size_t b, std::size_t e, std::size_t c) {
    auto state = init();
    std::array<double, K> acc{};
    for (std::size_t i = b; i < e; ++i) {
      const auto v = f(i, state);
      for (std::size_t k = 0; k < K; ++k) { acc[k] += v[k]; }
    }
    partial[c] = acc;
  });
  std::array<double, K> total{};
  for (const auto & p : partial) {
    for (std::size_t k = 0; k < K; ++k) { total[k] += p[k]; }
  }
  return total;
}

inline double ball_volume(int n, double r)
{
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0) * std::pow(r, n);
}

/// Uniform point in the unit n-ball.
inline void ball_point(const CounterRng & rng, std::size_t i, int n, double * w)
{
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    w[k] = rng.normal(i, static_cast<std::uint64_t>(k));
    s += w[k] * w[k];
  }
  const double r = std::pow(rng.uniform(i, 777), 1.0 / n) / std::sqrt(s);
  for (int k = 0; k < n; ++k) { w[k] *= r; }
}

inline Estimate binomial(double hits, std::size_t n, double volume, std::uint64_t seed, std::string method)
{
  const double p = hits / static_cast<double>(n);
  return {p * volume, volume * std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, seed, std::move(method), 0.0};
}

struct Scratch
{
  explicit Scratch(const GradedGroup & g) : work(g.workspace_size()), a(g.dim()), b(g.dim()), c(g.dim()) {}
  std::vector<double> work;
  Vector a;
  Vector b;
  Vector c;
};

}  // namespace detail

/// Euclidean area of {v in S : d(v, u) <= 1} by uniform sampling of a bounding n-ball in S.
inline Estimate section_area(const HomogeneousDistance & d, const Subspace & s, const Vector & u, std::size_t samples,
                             std::uint64_t seed, std::optional<double> bound = std::nullopt)
{
  const auto & g = *d.group();
  const int n = s.dim();
  double radius = 0.0;
  if (bound) {
    radius = *bound;
  } else {
    try {
      radius = ball_bounding_radius(d, s, u, seed);
    } catch (const EmptySection &) {
      return {0.0, 0.0, samples, seed, "empty-section", 0.0};
    }
  }
  const Matrix q = s.orthonormal();
  const Vector neg_u = -u;
  const CounterRng rng(seed, 0x5ec7);
  const auto hits = detail::chunked_sum_state<1>(
      samples, [&] { return detail::Scratch(g); },
      [&](std::size_t i, detail::Scratch & st) {
        std::array<double, 8> w{};
        detail::ball_point(rng, i, n, w.data());
        st.a = q * Eigen::Map<const Vector>(w.data(), n) * radius;
        g.product(neg_u.data(), st.a.data(), st.b.data(), st.work.data());
        return std::array<double, 1>{d.within(st.b.data(), 1.0) ? 1.0 : 0.0};
      });
  return detail::binomial(hits[0], samples, detail::ball_volume(n, radius), seed, "monte-carlo");
}

struct SphericalOptions
{
  int starts = 12;
  int refine_iters = 60;
  std::size_t search_samples = 20000;
  std::size_t samples = 200000;
  std::uint64_t seed = 1;
  /// Run the search even when a shortcut applies.
  bool force_search = false;
};

struct SphericalResult
{
  Estimate estimate;
  /// Section area at u = 0.
  Estimate at_origin;
  /// Fresh re-evaluation at the best searched centre (search mode only).
  std::optional<Estimate> searched;
  Vector best_u;
  std::string shortcut;
  int evaluations = 0;
};

/// Name of the theorem shortcut placing the maximizing centre at 0, or "".
inline std::string spherical_shortcut(const HomogeneousDistance & d, const Subspace & s)
{
  const auto cls = classify_subspace(s);
  if (cls.vertical && d.convex_ball()) { return "convex-ball"; }
  if (cls.horizontal && HomogeneousDistance::is_multiradial()) { return "horizontal-multiradial"; }
  if (d.group()->step() == 2 && HomogeneousDistance::is_multiradial()) { return "step2-multiradial"; }
  return "";
}

/**
 * @brief beta_d(S) = max over ||u|| <= 1 of the section area of B(u, 1) ∩ S.
 *
 * Search mode evaluates random starts under common random numbers inside a fixed
 * bounding ball of B(0, 2) ∩ S, refines the best three with Nelder-Mead, and reports a
 * fresh re-evaluation of the winner (never less than the u = 0 value).
 */
inline SphericalResult spherical_factor(const HomogeneousDistance & d, const Subspace & s, const SphericalOptions & opt = {})
{
  const auto & g = *d.group();
  const int q = g.dim();
  if (!classify_subspace(s).homogeneous) { throw ConfigError("spherical factor needs a homogeneous subspace"); }
  SphericalResult out;
  out.at_origin = section_area(d, s, Vector::Zero(q), opt.samples, opt.seed);
  out.best_u = Vector::Zero(q);
  out.shortcut = spherical_shortcut(d, s);
  if (!out.shortcut.empty() && !opt.force_search) {
    out.estimate = out.at_origin;
    out.estimate.method = "theorem-shortcut";
    return out;
  }

  const double bound = ball_bounding_radius(d, s, Vector::Zero(q), opt.seed, 0, 2.0);
  auto to_ball = [&](const Vector & v) {
    const double nv = d.norm(v);
    return nv > 1.0 ? dilate(g, 1.0 / nv, v) : v;
  };
  auto objective = [&](const Vector & v) {
    ++out.evaluations;
    return section_area(d, s, to_ball(v), opt.search_samples, opt.seed + 1, bound).value;
  };

  const CounterRng rng(opt.seed, 0x5f);
  std::vector<std::pair<double, Vector>> starts;
  starts.emplace_back(objective(Vector::Zero(q)), Vector::Zero(q));
  for (int k = 0; k < opt.starts; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    const Vector u = dilate(g, rng.uniform(idx, 5000), random_unit_point(d, rng, idx, 0));
    starts.emplace_back(objective(u), u);
  }
  std::stable_sort(starts.begin(), starts.end(), [](const auto & a, const auto & b) { return a.first > b.first; });
  double best_val = starts.front().first;
  Vector best_u = starts.front().second;
  for (std::size_t k = 0; k < std::min<std::size_t>(3, starts.size()); ++k) {
    const auto r = nelder_mead_max(objective, starts[k].second, 0.25, opt.refine_iters);
    if (r.value > best_val) {
      best_val = r.value;
      best_u = r.x;
    }
  }
  out.best_u = to_ball(best_u);
  out.searched = section_area(d, s, out.best_u, opt.samples, opt.seed + 2);
  out.estimate = out.searched->value >= out.at_origin.value ? *out.searched : out.at_origin;
  out.estimate.method = "optimized";
  return out;
}

/// ||pi_N(xi)||_g at parameter points, with the frame taken at Psi(y).
class IntrinsicDensity
{
public:
  IntrinsicDensity(const ParamMap & s, int degree) : s_(s), minors_(*s.group(), s.n(), degree), degree_(degree) {}

  [[nodiscard]] int degree() const { return degree_; }

  /// Density at y; writes Psi(y) into p (length q).
  double operator()(const double * y, Vector & p) const
  {
    const auto & g = *s_.group();
    p.resize(g.dim());
    s_.eval(y, p.data());
    Matrix j;
    s_.jacobian(y, j);
    if (!p.allFinite() || !j.allFinite()) { throw NonFinite("parametrization is not finite at a sample point"); }
    return minors_.norm(solve_frame(g, g.frame(p), j));
  }

private:
  const ParamMap & s_;
  DegreeMinors minors_;
  int degree_;
};

inline ParamMap with_domain(const ParamMap & s, Box region)
{
  return {s.group(), s.n(), s.expressions(), std::move(region), s.source()};
}

/// Degree of Sigma over a region: maximal pointwise degree on a coarse grid.
inline int region_degree(const ParamMap & s, const Box & region, const NumericPolicy & policy = {})
{
  const auto sub = with_domain(s, region);
  return sampled_max_degree(sub, default_grid(s.n()), policy);
}

struct Quadrature
{
  enum class Kind
  {
    Grid,
    MonteCarlo,
  };
  Kind kind = Kind::Grid;
  /// Grid points per axis for the finer grid; 0 picks a default by dimension.
  int resolution = 0;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
};

inline int default_resolution(int n)
{
  if (n <= 2) { return 64; }
  if (n == 3) { return 24; }
  return 12;
}

using Weight = std::function<double(const Vector & y, const Vector & p)>;

/**
 * @brief Integral over `region` of weight * ||pi_N(xi)||_g dy.
 *
 * Grid: midpoint rule at resolution k and k/2, reporting the fine value and the
 * Richardson error |I_k - I_{k/2}| / 3.  MC: jittered stratified sampling with the
 * i.i.d. standard error, which is conservative for stratified draws.
 */
inline Estimate integrate_density(const ParamMap & s, const Box & region, int degree, const Quadrature & quad, const Weight & weight = {})
{
  const int n = s.n();
  if (static_cast<int>(region.size()) != n) { throw BadDimensions("region needs one interval per parameter"); }
  double volume = 1.0;
  for (const auto & [lo, hi] : region) {
    if (!(hi > lo)) { return {0.0, 0.0, 0, quad.seed, "empty-region", 0.0}; }
    volume *= hi - lo;
  }
  for (int i = 0; i < n; ++i) {
    const auto & [lo, hi] = region[static_cast<std::size_t>(i)];
    const auto & [dlo, dhi] = s.domain()[static_cast<std::size_t>(i)];
    if (lo < dlo - 1e-12 * (dhi - dlo) || hi > dhi + 1e-12 * (dhi - dlo)) { throw DomainViolation("region leaves the domain"); }
  }
  const IntrinsicDensity dens(s, degree);
  struct State
  {
    Vector y;
    Vector p;
  };
  auto init = [&] { return State{Vector(n), Vector(s.q())}; };
  auto value_at = [&](State & st) {
    const double rho = dens(st.y.data(), st.p);
    return weight ? rho * weight(st.y, st.p) : rho;
  };

  if (quad.kind == Quadrature::Kind::MonteCarlo) {
    const StratifiedCube cube(n, quad.samples);
    const CounterRng rng(quad.seed, 0x1a7);
    const auto sums = detail::chunked_sum_state<2>(cube.samples(), init, [&](std::size_t i, State & st) {
      cube.point(rng, i, st.y);
      for (int k = 0; k < n; ++k) {
        const auto & [lo, hi] = region[static_cast<std::size_t>(k)];
        st.y(k) = lo + (hi - lo) * st.y(k);
      }
      const double v = value_at(st);
      return std::array<double, 2>{v, v * v};
    });
    const auto m = static_cast<double>(cube.samples());
    const double mean = sums[0] / m;
    const double var = std::max(0.0, sums[1] / m - mean * mean);
    return {volume * mean, volume * std::sqrt(var / m), cube.samples(), quad.seed, "stratified-mc", 0.0};
  }

  const int fine = quad.resolution > 0 ? quad.resolution : default_resolution(n);
  auto grid_integral = [&](int k) {
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) { total *= static_cast<std::size_t>(k); }
    const auto sums = detail::chunked_sum_state<1>(total, init, [&](std::size_t idx, State & st) {
      std::size_t rest = idx;
      for (int i = 0; i < n; ++i) {
        const auto & [lo, hi] = region[static_cast<std::size_t>(i)];
        st.y(i) = lo + (hi - lo) * (static_cast<double>(rest % static_cast<std::size_t>(k)) + 0.5) / k;
        rest /= static_cast<std::size_t>(k);
      }
      return std::array<double, 1>{value_at(st)};
    });
    return std::make_pair(volume * sums[0] / static_cast<double>(total), total);
  };
  const auto [fine_value, fine_count] = grid_integral(fine);
  const auto coarse_value = grid_integral(std::max(1, fine / 2)).first;
  return {fine_value, 0.0, fine_count, 0, "midpoint-grid", std::abs(fine_value - coarse_value) / 3.0};
}

/// mu_Sigma(Psi(region)) with N the sampled degree of Sigma over the region.
inline Estimate intrinsic_measure(const ParamMap & s, const Box & region, const Quadrature & quad = {}, std::optional<int> degree = std::nullopt)
{
  return integrate_density(s, region, degree ? *degree : region_degree(s, region), quad);
}

struct FedererOptions
{
  /// Decreasing radii; empty selects 0.02 * 10^(-k/4), k = 0..8.
  std::vector<double> radii;
  int centers_per_radius = 16;
  std::size_t samples = 200000;
  std::uint64_t seed = 1;
  std::size_t min_hits = 100;
  /// Relative trend allowed across a flat window on top of 3 sigma.
  double flat_rel = 0.01;
};

struct RadiusTrace
{
  double radius = 0.0;
  double ratio = 0.0;
  double std_error = 0.0;
  std::size_t hits = 0;
  int best_candidate = 0;
  /// ||delta_{1/r}(p^{-1} z)|| of the best centre.
  double center_offset = 0.0;
  /// Ratio of the best candidate on the shared sample set.
  double search_ratio = 0.0;
};

struct FedererResult
{
  Estimate estimate;
  std::vector<RadiusTrace> trace;
  int degree = 0;
  double chosen_radius = 0.0;
  bool trend_flat = false;
  double trend = 0.0;
  double trend_std_error = 0.0;
  /// The comparison target is beta * density_factor; the factor is 1 (see README).
  double density_factor = 1.0;
};

namespace detail {

/// Parallelepiped y = y0 + M a, a in [lo, hi], covering the preimage of a metric ball.
struct ParamBox
{
  Vector y0;
  Matrix m;
  Vector lo;
  Vector hi;
  [[nodiscard]] double volume() const { return std::abs(m.determinant()) * (hi - lo).prod(); }
};

/**
 * Columns of M follow the graph coordinates over A_p (so that the preimage of B(p, r)
 * has extent ~ r^{d_i} along column i); identity when no homogeneous tangent exists.
 */
inline Matrix adapted_parameter_frame(const ParamMap & s, const Vector & y0, const NumericPolicy & policy)
{
  const int n = s.n();
  try {
    const auto xi = tangent_lift(s, y0, policy);
    const auto h = homogeneous_tangent_of(xi, degree_of(xi, policy), policy);
    const auto [basis, in_a] = adapted_basis(*h.space);
    const Matrix c = tangent_coefficients(s, y0);
    const Matrix proj = basis.transpose() * c;
    Matrix rows(n, n);
    int r = 0;
    for (int i = 0; i < s.q(); ++i) {
      if (in_a[static_cast<std::size_t>(i)]) { rows.row(r++) = proj.row(i); }
    }
    Eigen::FullPivLU<Matrix> lu(rows);
    if (lu.isInvertible()) {
      Matrix m = lu.inverse();
      for (int k = 0; k < n; ++k) { m.col(k).normalize(); }
      return m;
    }
  } catch (const Error &) {
  }
  return Matrix::Identity(n, n);
}

inline ParamBox preimage_box(const ParamMap & s, const HomogeneousDistance & d, const Vector & y0, const Vector & p, const Matrix & m,
                             double radius)
{
  const auto & g = *d.group();
  const int n = s.n();
  const Vector pinv = -p;
  Scratch st(g);
  auto inside = [&](const Vector & y) {
    s.eval(y.data(), st.a.data());
    g.product(pinv.data(), st.a.data(), st.b.data(), st.work.data());
    return d.within(st.b.data(), radius);
  };
  ParamBox box{y0, m, Vector::Zero(n), Vector::Zero(n)};
  for (int k = 0; k < n; ++k) {
    for (int sign : {-1, 1}) {
      auto at = [&](double t) { return Vector(y0 + sign * t * m.col(k)); };
      double t = 1e-3;
      int guard = 0;
      while (inside(at(t)) && s.contains(at(t).data()) && guard++ < 200) { t *= 2.0; }
      double in = 0.0;
      double out = t;
      if (guard == 0) {
        // Shrink until inside, then bisect.
        while (!inside(at(out * 0.5)) && out > 1e-300) { out *= 0.5; }
        in = out * 0.5;
      } else {
        in = t * 0.5;
      }
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (in + out);
        if (inside(at(mid))) {
          in = mid;
        } else {
          out = mid;
        }
      }
      (sign < 0 ? box.lo(k) : box.hi(k)) = sign * 1.3 * out;
    }
  }
  // Boundary check: no face point may lie in the ball.
  const int per_face = n == 1 ? 1 : (n == 2 ? 64 : 16);
  const CounterRng rng(0xface, 0);
  for (int round = 0; round < 40; ++round) {
    bool grew = false;
    for (int k = 0; k < n && !grew; ++k) {
      for (int side = 0; side < 2 && !grew; ++side) {
        const int count = n <= 2 ? per_face : per_face * per_face;
        for (int c = 0; c < count; ++c) {
          Vector a(n);
          for (int t = 0; t < n; ++t) {
            double f = 0.0;
            if (n == 2) {
              f = (c + 0.5) / per_face;
            } else if (n > 2) {
              f = rng.uniform(static_cast<std::size_t>(round * 100000 + c), static_cast<std::uint64_t>(t));
            }
            a(t) = box.lo(t) + f * (box.hi(t) - box.lo(t));
          }
          a(k) = side == 0 ? box.lo(k) : box.hi(k);
          const Vector y = y0 + m * a;
          if (inside(y)) {
            (side == 0 ? box.lo(k) : box.hi(k)) *= 1.5;
            grew = true;
            break;
          }
        }
      }
    }
    if (!grew) { return box; }
  }
  throw BoundaryTooClose("could not enclose the preimage of the ball in a parameter box");
}

}  // namespace detail

/**
 * @brief Federer density theta^N(mu_Sigma, Psi(y0)) at desk scale.
 *
 * For each radius r the candidate centres z = p delta_r(v) (v = 0 first, then random v
 * in B(0, 1)) share one stratified sample of the parameter preimage of B(p, 2r); the
 * best candidate is re-evaluated on a fresh sample, whose ratio mu(B(z, r)) / r^N
 * enters the trace.  The reported value is the trace entry at the smallest radius
 * whose two-decade window has a linear trend within 3 sigma (plus flat_rel).
 */
inline FedererResult federer_density(const ParamMap & s, const HomogeneousDistance & d, const Vector & y0, const FedererOptions & opt = {},
                                     const NumericPolicy & policy = {})
{
  const auto & g = *d.group();
  const int n = s.n();
  const int q = g.dim();
  if (s.group().get() != d.group().get() && s.group()->name() != d.group()->name()) {
    throw ConfigError("distance and submanifold live in different groups");
  }
  FedererResult out;
  std::vector<double> radii = opt.radii;
  if (radii.empty()) {
    for (int k = 0; k <= 8; ++k) { radii.push_back(0.02 * std::pow(10.0, -k / 4.0)); }
  }
  const Vector p = s.point(y0);
  out.degree = pointwise_degree(s, y0, policy);
  const int degree = out.degree;
  const IntrinsicDensity dens(s, degree);
  const Matrix m = detail::adapted_parameter_frame(s, y0, policy);
  const Vector pinv = -p;

  struct Hit
  {
    std::vector<double> local;
    std::vector<double> density;
    std::size_t outside_domain = 0;
  };

  auto collect = [&](const detail::ParamBox & box, double radius, const CounterRng & rng, std::size_t count) {
    const StratifiedCube cube(n, count);
    const std::size_t chunks = (cube.samples() + kChunk - 1) / kChunk;
    std::vector<Hit> parts(chunks);
    for_each_chunk(cube.samples(), [&](std::size_t b, std::size_t e, std::size_t c) {
      detail::Scratch st(g);
      Vector a(n);
      Vector y(n);
      Vector pt(q);
      auto & part = parts[c];
      for (std::size_t i = b; i < e; ++i) {
        cube.point(rng, i, a);
        for (int k = 0; k < n; ++k) { a(k) = box.lo(k) + (box.hi(k) - box.lo(k)) * a(k); }
        y = box.y0 + box.m * a;
        s.eval(y.data(), st.a.data());
        g.product(pinv.data(), st.a.data(), st.b.data(), st.work.data());
        if (!d.within(st.b.data(), 2.0 * radius)) { continue; }
        if (!s.contains(y.data())) {
          ++part.outside_domain;
          continue;
        }
        part.local.insert(part.local.end(), st.b.data(), st.b.data() + q);
        part.density.push_back(dens(y.data(), pt));
      }
    });
    Hit all;
    for (auto & part : parts) {
      all.local.insert(all.local.end(), part.local.begin(), part.local.end());
      all.density.insert(all.density.end(), part.density.begin(), part.density.end());
      all.outside_domain += part.outside_domain;
    }
    if (all.outside_domain > 0) { throw BoundaryTooClose("the ball B(p, 2r) reaches the edge of the parameter domain"); }
    return std::make_pair(all, cube.samples());
  };

  // mu(B(z, r)) for centre w = p^{-1} z over the collected hits: {sum, sum of squares, count}.
  auto measure = [&](const Hit & hits, const Vector & w, double radius) {
    const Vector winv = -w;
    return detail::chunked_sum_state<3>(
        hits.density.size(), [&] { return detail::Scratch(g); },
        [&](std::size_t i, detail::Scratch & st) {
          g.product(winv.data(), hits.local.data() + i * static_cast<std::size_t>(q), st.c.data(), st.work.data());
          if (!d.within(st.c.data(), radius)) { return std::array<double, 3>{0.0, 0.0, 0.0}; }
          const double v = hits.density[i];
          return std::array<double, 3>{v, v * v, 1.0};
        });
  };

  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    const auto box = detail::preimage_box(s, d, y0, p, m, 2.0 * r);
    const double vol = box.volume();
    const CounterRng base(opt.seed, 0xfede + ri);

    std::vector<Vector> centres{Vector::Zero(q)};
    for (int c = 1; c < opt.centers_per_radius; ++c) {
      const auto idx = static_cast<std::size_t>(c);
      centres.push_back(dilate(g, r * base.uniform(idx, 9000), random_unit_point(d, base, idx, 100)));
    }
    const auto [shared, shared_n] = collect(box, r, base.substream(1), opt.samples);
    int best = 0;
    double best_sum = -1.0;
    for (std::size_t c = 0; c < centres.size(); ++c) {
      const auto sums = measure(shared, centres[c], r);
      if (sums[0] > best_sum) {
        best_sum = sums[0];
        best = static_cast<int>(c);
      }
    }
    const auto [fresh, fresh_n] = collect(box, r, base.substream(2), opt.samples);
    const auto sums = measure(fresh, centres[static_cast<std::size_t>(best)], r);
    const auto nn = static_cast<double>(fresh_n);
    const double mean = sums[0] / nn;
    const double var = std::max(0.0, sums[1] / nn - mean * mean);
    const double scale = vol / std::pow(r, degree);
    RadiusTrace t;
    t.radius = r;
    t.ratio = scale * mean;
    t.std_error = scale * std::sqrt(var / nn);
    t.hits = static_cast<std::size_t>(sums[2]);
    t.best_candidate = best;
    t.center_offset = d.norm(dilate(g, 1.0 / r, centres[static_cast<std::size_t>(best)]));
    t.search_ratio = scale * best_sum / static_cast<double>(shared_n);
    if (t.hits < opt.min_hits) {
      throw RadiusTooSmall("only " + std::to_string(t.hits) + " sample hits at radius " + std::to_string(r) + "; increase samples");
    }
    out.trace.push_back(t);
  }

  // Smallest radius whose window [r, 100 r] (or the whole trace if shorter) is flat.
  std::vector<std::size_t> order(out.trace.size());
  for (std::size_t i = 0; i < order.size(); ++i) { order[i] = i; }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out.trace[a].radius < out.trace[b].radius; });
  const double r_max = out.trace[order.back()].radius;
  const double r_min = out.trace[order.front()].radius;
  const bool short_trace = r_max < 99.0 * r_min;
  std::size_t chosen = order.front();
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const double r0 = out.trace[order[oi]].radius;
    std::vector<std::size_t> win;
    for (std::size_t oj = oi; oj < order.size(); ++oj) {
      if (short_trace || out.trace[order[oj]].radius <= 100.0 * r0 * (1 + 1e-9)) { win.push_back(order[oj]); }
    }
    if (win.size() < 3) { break; }
    if (!short_trace && out.trace[win.back()].radius < 99.0 * r0) { break; }
    // Weighted least squares ratio = a + b log10 r.
    double sw = 0;
    double sx = 0;
    double sy = 0;
    double sxx = 0;
    double sxy = 0;
    for (auto i : win) {
      const auto & t = out.trace[i];
      const double w = 1.0 / std::max(t.std_error * t.std_error, 1e-300);
      const double x = std::log10(t.radius);
      sw += w;
      sx += w * x;
      sy += w * t.ratio;
      sxx += w * x * x;
      sxy += w * x * t.ratio;
    }
    const double det = sw * sxx - sx * sx;
    const double b = (sw * sxy - sx * sy) / det;
    const double sb = std::sqrt(sw / det);
    const double span = std::log10(out.trace[win.back()].radius / r0);
    const double level = sy / sw;
    const bool flat = std::abs(b) * span <= 3.0 * sb * span + opt.flat_rel * std::abs(level);
    if (flat) {
      chosen = order[oi];
      out.trend_flat = true;
      out.trend = b * span;
      out.trend_std_error = sb * span;
      break;
    }
  }
  const auto & t = out.trace[chosen];
  out.chosen_radius = t.radius;
  out.estimate = {t.ratio, t.std_error, opt.samples * out.trace.size() * 2, opt.seed, "federer-trace", 0.0};
  return out;
}

/**
 * @brief Greedy rho-net cover (rho = delta / 2) of a tensor-grid cloud of Psi(region).
 *
 * Cloud points are visited in grid order; a point farther than rho from every centre
 * becomes a centre.  Returns count * rho^N, an upper proxy for phi^N_delta that is
 * not the Carathéodory infimum.
 */
inline Estimate covering_estimate(const ParamMap & s, const HomogeneousDistance & d, const Box & region, int degree, double delta,
                                  const std::vector<int> & cloud_grid)
{
  const auto & g = *d.group();
  const int n = s.n();
  const int q = g.dim();
  if (!(delta > 0.0)) { throw NonPositiveScale("covering scale must be positive"); }
  for (const auto & [lo, hi] : region) {
    if (!(hi > lo)) { return {0.0, 0.0, 0, 0, "greedy-net", 0.0}; }
  }
  if (static_cast<int>(cloud_grid.size()) != n) { throw BadDimensions("cloud grid needs one count per parameter"); }
  std::size_t total = 1;
  for (int c : cloud_grid) {
    if (c < 2) { throw BadDimensions("cloud grid needs at least two points per axis"); }
    total *= static_cast<std::size_t>(c);
  }
  std::vector<double> cloud(total * static_cast<std::size_t>(q));
  for_each_chunk(total, [&](std::size_t b, std::size_t e, std::size_t) {
    Vector y(n);
    for (std::size_t idx = b; idx < e; ++idx) {
      std::size_t rest = idx;
      for (int i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(cloud_grid[static_cast<std::size_t>(i)]);
        const auto & [lo, hi] = region[static_cast<std::size_t>(i)];
        y(i) = lo + (hi - lo) * static_cast<double>(rest % c) / static_cast<double>(c - 1);
        rest /= c;
      }
      s.eval(y.data(), cloud.data() + idx * static_cast<std::size_t>(q));
    }
  });
  const double rho = 0.5 * delta;
  detail::Scratch st(g);
  auto dist = [&](const double * a, const double * b) {
    for (int k = 0; k < q; ++k) { st.a(k) = -a[k]; }
    g.product(st.a.data(), b, st.b.data(), st.work.data());
    return d.norm(st.b.data());
  };

  // Spacing: largest distance between grid neighbours.
  std::size_t stride = 1;
  double spacing = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(cloud_grid[static_cast<std::size_t>(i)]);
    for (std::size_t idx = 0; idx < total; ++idx) {
      if ((idx / stride) % c == c - 1) { continue; }
      spacing = std::max(spacing, dist(cloud.data() + idx * q, cloud.data() + (idx + stride) * q));
    }
    stride *= c;
  }
  if (spacing > 0.25 * delta) {
    throw CloudTooSparse("cloud spacing " + std::to_string(spacing) + " exceeds delta / 4 = " + std::to_string(0.25 * delta));
  }

  std::vector<std::size_t> centres;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const double * x = cloud.data() + idx * q;
    bool covered = false;
    for (auto it = centres.rbegin(); it != centres.rend(); ++it) {
      for (int k = 0; k < q; ++k) { st.a(k) = -cloud[*it * q + static_cast<std::size_t>(k)]; }
      g.product(st.a.data(), x, st.b.data(), st.work.data());
      if (d.within(st.b.data(), rho)) {
        covered = true;
        break;
      }
    }
    if (!covered) { centres.push_back(idx); }
  }
  return {static_cast<double>(centres.size()) * std::pow(rho, degree), 0.0, total, 0, "greedy-net", 0.0};
}

struct ProbeReport
{
  Vector y;
  std::string classification;
  bool covered = false;
  std::string advisory;
  std::optional<SphericalResult> beta;
  std::optional<FedererResult> theta;
  std::optional<Verdict> verdict;
};

struct AreaOptions
{
  Quadrature quad;
  SphericalOptions spherical;
  FedererOptions federer;
  double tolerance = 0.05;
  /// Covering scale for the constant-beta consistency band; 0 skips it.
  double covering_delta = 0.0;
  std::vector<int> cloud_grid;
};

struct AreaReport
{
  Estimate mu;
  int degree = 0;
  std::vector<ProbeReport> probes;
  std::optional<Estimate> covering;
  std::vector<Verdict> verdicts;

  [[nodiscard]] bool passed() const
  {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict & v) { return v.pass || v.advisory; });
  }
};

/// Intrinsic measure, spherical factors and Federer densities at probes, and the theta = beta comparison.
inline AreaReport area_check(const ParamMap & s, const HomogeneousDistance & d, const Box & region, const std::vector<Vector> & probes,
                             const AreaOptions & opt = {}, const NumericPolicy & policy = {})
{
  AreaReport rep;
  rep.degree = region_degree(s, region, policy);
  rep.mu = intrinsic_measure(s, region, opt.quad, rep.degree);
  std::vector<double> betas;
  std::vector<double> beta_errs;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    ProbeReport pr;
    pr.y = probes[k];
    const auto pa = classify_point(s, pr.y, policy, rep.degree);
    pr.classification = to_string(pa.classification);
    const auto bl_covered = pa.regular && (pa.htangent_horizontal || s.group()->step() == 2 || s.n() == 1 || pa.degree == pa.q_n);
    pr.covered = bl_covered && !pa.characteristic;
    if (!pa.regular) {
      pr.advisory = "point is not algebraically regular";
    } else if (pa.characteristic) {
      pr.advisory = "point has degree below the degree of the submanifold";
    } else if (!bl_covered) {
      pr.advisory = "CaseNotCovered: none of the horizontal, step-two, curve or transversal cases applies";
    }
    if (!pr.advisory.empty()) {
      Verdict v;
      v.name = "theta=beta@probe" + std::to_string(k);
      v.advisory = true;
      v.note = pr.advisory;
      rep.verdicts.push_back(v);
      rep.probes.push_back(std::move(pr));
      continue;
    }
    SphericalOptions so = opt.spherical;
    so.seed = opt.spherical.seed + 17 * k;
    pr.beta = spherical_factor(d, *pa.htangent, so);
    FedererOptions fo = opt.federer;
    fo.seed = opt.federer.seed + 31 * k;
    pr.theta = federer_density(s, d, pr.y, fo, policy);
    Verdict v;
    v.name = "theta=beta@probe" + std::to_string(k);
    v.lhs = pr.theta->estimate.value;
    v.rhs = pr.beta->estimate.value * pr.theta->density_factor;
    v.tolerance = opt.tolerance;
    v.pass = std::abs(v.lhs - v.rhs) <= opt.tolerance * std::abs(v.rhs);
    v.note = pr.theta->trend_flat ? "trace flat" : "trace not flat over two decades";
    pr.verdict = v;
    rep.verdicts.push_back(v);
    betas.push_back(pr.beta->estimate.value);
    beta_errs.push_back(pr.beta->estimate.std_error);
    rep.probes.push_back(std::move(pr));
  }
  if (opt.covering_delta > 0.0 && !betas.empty()) {
    bool constant = true;
    for (std::size_t i = 1; i < betas.size(); ++i) {
      constant = constant && std::abs(betas[i] - betas[0]) <= 3.0 * std::hypot(beta_errs[i], beta_errs[0]);
    }
    if (constant) {
      const auto grid = opt.cloud_grid.empty() ? std::vector<int>(static_cast<std::size_t>(s.n()), 64) : opt.cloud_grid;
      rep.covering = covering_estimate(s, d, region, rep.degree, opt.covering_delta, grid);
      Verdict v;
      v.name = "covering~mu/beta";
      v.advisory = true;
      v.lhs = rep.covering->value;
      v.rhs = rep.mu.value / betas[0];
      // Greedy nets over-count by up to 2^N; the band is informational.
      v.tolerance = std::pow(2.0, rep.degree);
      v.pass = v.lhs >= 0.5 * v.rhs && v.lhs <= v.tolerance * v.rhs;
      v.note = "greedy-net upper proxy; never a pass/fail oracle";
      rep.verdicts.push_back(v);
    }
  }
  return rep;
}

/// Convex body in R^q given by a membership test and a Euclidean bounding radius.
struct ConvexBody
{
  std::string kind;
  int dim = 0;
  double radius = 0.0;
  std::function<bool(const double *)> contains;
};

inline ConvexBody cube_body(int q)
{
  return {"cube", q, std::sqrt(static_cast<double>(q)), [q](const double * x) {
            for (int i = 0; i < q; ++i) {
              if (std::abs(x[i]) > 1.0) { return false; }
            }
            return true;
          }};
}

inline ConvexBody ellipsoid_body(std::vector<double> axes)
{
  const int q = static_cast<int>(axes.size());
  const double r = *std::max_element(axes.begin(), axes.end());
  return {"ellipsoid", q, r, [axes = std::move(axes)](const double * x) {
            double s = 0.0;
            for (std::size_t i = 0; i < axes.size(); ++i) { s += (x[i] / axes[i]) * (x[i] / axes[i]); }
            return s <= 1.0;
          }};
}

inline ConvexBody metric_ball_body(const HomogeneousDistance & d)
{
  if (!d.convex_ball()) { throw ConfigError("metric ball body needs a distance with convex unit ball"); }
  const int q = d.group()->dim();
  std::vector<int> all(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) { all[static_cast<std::size_t>(i)] = i; }
  const double r = ball_bounding_radius(d, coordinate_subspace(d.group(), all), Vector::Zero(q));
  return {"metric-ball", q, r, [d](const double * x) { return d.within(x, 1.0); }};
}

struct ConcavityReport
{
  std::size_t segments = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst_z = 0.0;
  std::size_t samples_per_section = 0;
  std::uint64_t seed = 0;
  [[nodiscard]] bool passed() const { return violations == 0; }
};

/**
 * @brief Concavity of psi(v) = H^n(C ∩ (v + S))^{1/n} along random segments in S^perp.
 *
 * `basis` spans S (q x n).  The five section areas of a segment are MC estimates on
 * one shared sample stream, and the sigma used is the independent-sample combination,
 * which overstates the spread of their differences.  A check fails when psi at
 * theta v + (1 - theta) w falls more than 3 combined sigma below the chord, theta in
 * {1/4, 1/2, 3/4}.
 */
inline ConcavityReport section_concavity_check(const ConvexBody & body, const Matrix & basis, std::size_t segments, std::size_t samples,
                                               std::uint64_t seed)
{
  const int q = body.dim;
  const auto n = static_cast<int>(basis.cols());
  if (basis.rows() != q || n < 1 || n >= q) { throw BadDimensions("section subspace must have 1 <= n < q"); }
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix full = qr.householderQ();
  const Matrix qs = full.leftCols(n);
  const Matrix qp = full.rightCols(q - n);
  const double volume = detail::ball_volume(n, body.radius);
  const CounterRng rng(seed, 0xc0c);

  // The sections of one segment share a stream (common random numbers).
  auto section = [&](const Vector & v, std::uint64_t stream) {
    const CounterRng srng = rng.substream(stream);
    const Vector base = qp * v;
    const auto hits = detail::chunked_sum_state<1>(
        samples, [&] { return Vector(q); },
        [&](std::size_t i, Vector & x) {
          std::array<double, 8> w{};
          detail::ball_point(srng, i, n, w.data());
          x = base + qs * Eigen::Map<const Vector>(w.data(), n) * body.radius;
          return std::array<double, 1>{body.contains(x.data()) ? 1.0 : 0.0};
        });
    const auto a = detail::binomial(hits[0], samples, volume, seed, "monte-carlo");
    const double psi = std::pow(a.value, 1.0 / n);
    const double sigma = a.value > 0.0 ? a.std_error * std::pow(a.value, 1.0 / n - 1.0) / n : 0.0;
    return std::make_pair(psi, sigma);
  };
  auto body_point = [&](std::size_t idx) {
    Vector x(q);
    std::array<double, 16> w{};
    for (std::size_t t = 0;; ++t) {
      detail::ball_point(rng, idx * 1000003 + t, q, w.data());
      x = Eigen::Map<const Vector>(w.data(), q) * body.radius;
      if (body.contains(x.data())) { break; }
    }
    return Vector(qp.transpose() * x);
  };

  ConcavityReport rep;
  rep.segments = segments;
  rep.samples_per_section = samples;
  rep.seed = seed;
  for (std::size_t sgm = 0; sgm < segments; ++sgm) {
    const Vector v = body_point(2 * sgm);
    const Vector w = body_point(2 * sgm + 1);
    const auto [pv, sv] = section(v, sgm);
    const auto [pw, sw] = section(w, sgm);
    for (double th : {0.25, 0.5, 0.75}) {
      const auto [pm, sm] = section(th * v + (1 - th) * w, sgm);
      const double chord = th * pv + (1 - th) * pw;
      const double sigma = std::sqrt(sm * sm + th * th * sv * sv + (1 - th) * (1 - th) * sw * sw);
      ++rep.checks;
      const double z = sigma > 0.0 ? (chord - pm) / sigma : (chord > pm ? 1e300 : 0.0);
      rep.worst_z = std::max(rep.worst_z, z);
      if (pm < chord - 3.0 * sigma) { ++rep.violations; }
    }
  }
  return rep;
}

struct TranslationReport
{
  Estimate original;
  Estimate translated;
  double z = 0.0;
  [[nodiscard]] bool passed() const { return z <= 3.0; }
};

/**
 * @brief H^n(A) against H^n(p A) for A = {Q a : a in [lo, hi]} in a vertical subgroup N.
 *
 * Q is an orthonormal basis of N.  Since p N = p + N for vertical N, p A is measured in
 * the affine chart c = Q^T (x - p) of the coset.  Both volumes are counted on one
 * stratified sample of a box bounding both chart images, so p = 0 gives exact equality.
 */
inline TranslationReport vertical_translation_check(const Subspace & nsub, const Vector & p, const Vector & lo, const Vector & hi,
                                                    std::size_t samples, std::uint64_t seed)
{
  const auto & g = *nsub.group;
  const int q = g.dim();
  const int n = nsub.dim();
  if (!classify_subspace(nsub).vertical) { throw NotVertical("translation invariance needs a vertical subgroup"); }
  if (lo.size() != n || hi.size() != n || p.size() != q) { throw BadDimensions("box or point has the wrong length"); }
  const Matrix qn = nsub.orthonormal();

  // Bounding box of the chart image of t A.
  auto chart_box = [&](const Vector & t, Vector & bl, Vector & bh) {
    const int per = n <= 2 ? 33 : (n == 3 ? 13 : 7);
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) { total *= static_cast<std::size_t>(per); }
    std::vector<double> work(g.workspace_size());
    Vector x(q);
    for (std::size_t idx = 0; idx < total; ++idx) {
      Vector a(n);
      std::size_t rest = idx;
      for (int i = 0; i < n; ++i) {
        a(i) = lo(i) + (hi(i) - lo(i)) * static_cast<double>(rest % per) / (per - 1);
        rest /= static_cast<std::size_t>(per);
      }
      const Vector m = qn * a;
      g.product(t.data(), m.data(), x.data(), work.data());
      const Vector c = qn.transpose() * (x - t);
      bl = bl.cwiseMin(c);
      bh = bh.cwiseMax(c);
    }
  };
  Vector bl = Vector::Constant(n, std::numeric_limits<double>::infinity());
  Vector bh = -bl;
  chart_box(Vector::Zero(q), bl, bh);
  chart_box(p, bl, bh);
  const Vector pad = 0.1 * (bh - bl) + Vector::Constant(n, 1e-9);
  bl -= pad;
  bh += pad;
  const double vol = (bh - bl).prod();
  const Vector pinv = -p;
  const StratifiedCube cube(n, samples);
  const CounterRng rng(seed, 0x7a);
  // One sample set for both charts: c is in A when Q^T c lies in the box, in pA when
  // Q^T (p^{-1} (p + Q c)) does.
  const auto hits = detail::chunked_sum_state<2>(
      cube.samples(), [&] { return detail::Scratch(g); },
      [&](std::size_t i, detail::Scratch & st) {
        Vector c(n);
        cube.point(rng, i, c);
        c = bl + (bh - bl).cwiseProduct(c);
        auto inside = [&](const Vector & a) {
          for (int k = 0; k < n; ++k) {
            if (a(k) < lo(k) || a(k) > hi(k)) { return false; }
          }
          return true;
        };
        st.a = p + qn * c;
        g.product(pinv.data(), st.a.data(), st.b.data(), st.work.data());
        const Vector moved = qn.transpose() * st.b;
        return std::array<double, 2>{inside(c) ? 1.0 : 0.0, inside(moved) ? 1.0 : 0.0};
      });

  TranslationReport rep;
  rep.original = detail::binomial(hits[0], cube.samples(), vol, seed, "stratified-mc");
  rep.translated = detail::binomial(hits[1], cube.samples(), vol, seed, "stratified-mc");
  // Independent-sample sigma; the shared draws make the actual spread of the difference smaller.
  const double sigma = std::hypot(rep.original.std_error, rep.translated.std_error);
  const double diff = std::abs(rep.original.value - rep.translated.value);
  rep.z = diff == 0.0 ? 0.0 : diff / std::max(sigma, 1e-300);
  return rep;
}

struct ConstancyReport
{
  std::vector<Estimate> betas;
  double spread = 0.0;
  double max_pairwise_z = 0.0;
  [[nodiscard]] bool passed() const { return max_pairwise_z <= 3.0; }
};

/// Spherical factors of a family of same-dimension, same-class subspaces with independent seeds.
inline ConstancyReport beta_constancy_check(const HomogeneousDistance & d, const std::vector<Subspace> & family, const SphericalOptions & opt = {})
{
  if (family.empty()) { throw ConfigError("beta constancy needs a non-empty family"); }
  const auto c0 = classify_subspace(family.front());
  for (const auto & s : family) {
    const auto c = classify_subspace(s);
    if (s.dim() != family.front().dim() || c.vertical != c0.vertical || c.horizontal != c0.horizontal ||
        c.layer_intersection != c0.layer_intersection) {
      throw ConfigError("beta constancy family members must share dimension and class");
    }
  }
  ConstancyReport rep;
  for (std::size_t i = 0; i < family.size(); ++i) {
    SphericalOptions o = opt;
    o.seed = opt.seed + 1000 * i;
    rep.betas.push_back(spherical_factor(d, family[i], o).estimate);
  }
  double lo = rep.betas.front().value;
  double hi = lo;
  for (std::size_t i = 0; i < rep.betas.size(); ++i) {
    lo = std::min(lo, rep.betas[i].value);
    hi = std::max(hi, rep.betas[i].value);
    for (std::size_t j = i + 1; j < rep.betas.size(); ++j) {
      const double diff = std::abs(rep.betas[i].value - rep.betas[j].value);
      const double sigma = std::hypot(rep.betas[i].std_error, rep.betas[j].std_error);
      rep.max_pairwise_z = std::max(rep.max_pairwise_z, diff == 0.0 ? 0.0 : diff / std::max(sigma, 1e-300));
    }
  }
  rep.spread = hi - lo;
  return rep;
}

/// Euclidean unit normal of a hypersurface chart at y.
inline Vector unit_normal(const ParamMap & s, const Vector & y)
{
  if (s.n() != s.q() - 1) { throw BadDimensions("hypersurface density needs n = q - 1"); }
  const Matrix j = s.jacobian(y);
  Eigen::JacobiSVD<Matrix> svd(j, Eigen::ComputeFullU);
  if (svd.singularValues()(s.n() - 1) <= 1e-12 * std::max(1.0, svd.singularValues()(0))) {
    throw DegenerateTangent("hypersurface chart is singular");
  }
  return svd.matrixU().col(s.q() - 1);
}

/// sqrt(sum over first-layer j of <n, X_j(p)>^2).
inline double hypersurface_density(const ParamMap & s, const Vector & y)
{
  const auto & g = *s.group();
  const Vector nu = unit_normal(s, y);
  const Matrix frame = left_invariant_frame(g, s.point(y));
  double sum = 0.0;
  for (int j = 0; j < g.layer_end(1); ++j) {
    const double c = nu.dot(frame.col(j));
    sum += c * c;
  }
  return std::sqrt(sum);
}

/// ||pi_{Q-1}(xi)||_g divided by the Euclidean norm of the tangent n-vector.
inline double hypersurface_density_multivector(const ParamMap & s, const Vector & y)
{
  const auto & g = *s.group();
  if (s.n() != s.q() - 1) { throw BadDimensions("hypersurface density needs n = q - 1"); }
  const Matrix j = s.jacobian(y);
  const auto xi = wedge_columns(s.group(), solve_frame(g, left_invariant_frame(g, s.point(y)), j));
  const double euclid = std::sqrt((j.transpose() * j).determinant());
  if (euclid <= 0.0) { throw DegenerateTangent("hypersurface chart is singular"); }
  return project_degree(xi, g.homogeneous_dimension() - 1).norm() / euclid;
}

struct CoareaOptions
{
  /// Grid points per axis of the fine tensor grids.
  int resolution = 48;
  int t_slices = 48;
  double tolerance = 0.02;
};

struct CoareaReport
{
  Estimate lhs;
  Estimate rhs;
  int graph_variable = 0;
  Verdict verdict;
};

/**
 * @brief Coarea balance for f = x_j - h(other coordinates) on a box of G.
 *
 * LHS: midpoint rule for the integral of u * |first-layer frame components of grad f|.
 * RHS: midpoint rule in t of the intrinsic measure (degree Q - 1) of the level set
 * {x_j = t + h}, weighted by u and restricted to x_j inside the box.
 */
inline CoareaReport coarea_check(const GroupPtr & gp, const std::string & f_src, const std::string & u_src, const Box & box,
                                 const CoareaOptions & opt = {})
{
  const auto & g = *gp;
  const int q = g.dim();
  if (static_cast<int>(box.size()) != q) { throw BadDimensions("coarea box needs q intervals"); }
  const auto vars = expr::numbered("x", q);
  const auto f = expr::parse(f_src, vars);
  const auto u = expr::parse(u_src, vars);
  int j = -1;
  expr::NodePtr h;
  for (int i = 0; i < q && j < 0; ++i) {
    const expr::Program di(expr::derivative(f, i));
    if (!di.is_constant() || di.constant_value() != 1.0) { continue; }
    auto rest = expr::make(expr::Op::Sub, expr::variable(i), f);
    const expr::Program dr(expr::derivative(rest, i));
    if (dr.is_constant() && dr.constant_value() == 0.0) {
      j = i;
      h = rest;
    }
  }
  if (j < 0) { throw LevelSetNotGraph("f must have the form x_j - h(other coordinates)"); }
  CoareaReport rep;
  rep.graph_variable = j;

  const expr::Program fp(f);
  const expr::Program up(u);
  std::vector<expr::Program> grad;
  for (int i = 0; i < q; ++i) { grad.emplace_back(expr::derivative(f, i)); }

  double volume = 1.0;
  for (const auto & [lo, hi] : box) {
    if (!(hi > lo)) { throw BadDimensions("coarea box intervals must satisfy lo < hi"); }
    volume *= hi - lo;
  }
  auto lhs_grid = [&](int k) {
    std::size_t total = 1;
    for (int i = 0; i < q; ++i) { total *= static_cast<std::size_t>(k); }
    const auto sums = detail::chunked_sum_state<1>(
        total, [&] { return std::make_pair(Vector(q), Vector(q)); },
        [&](std::size_t idx, std::pair<Vector, Vector> & st) {
          auto & [x, gr] = st;
          std::size_t rest = idx;
          for (int i = 0; i < q; ++i) {
            const auto & [lo, hi] = box[static_cast<std::size_t>(i)];
            x(i) = lo + (hi - lo) * (static_cast<double>(rest % static_cast<std::size_t>(k)) + 0.5) / k;
            rest /= static_cast<std::size_t>(k);
          }
          for (int i = 0; i < q; ++i) { gr(i) = grad[static_cast<std::size_t>(i)](x.data()); }
          const Matrix frame = g.frame(x);
          double jac = 0.0;
          for (int c = 0; c < g.layer_end(1); ++c) {
            const double v = gr.dot(frame.col(c));
            jac += v * v;
          }
          return std::array<double, 1>{up(x.data()) * std::sqrt(jac)};
        });
    return volume * sums[0] / static_cast<double>(total);
  };
  const double lhs_fine = lhs_grid(opt.resolution);
  const double lhs_coarse = lhs_grid(std::max(1, opt.resolution / 2));
  std::size_t lhs_count = 1;
  for (int i = 0; i < q; ++i) { lhs_count *= static_cast<std::size_t>(opt.resolution); }
  rep.lhs = {lhs_fine, 0.0, lhs_count, 0, "midpoint-grid", std::abs(lhs_fine - lhs_coarse) / 3.0};

  // Range of t over the box from corner and grid values of f.
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -tmin;
  {
    const int k = std::max(9, opt.resolution);
    std::size_t total = 1;
    for (int i = 0; i < q; ++i) { total *= static_cast<std::size_t>(k); }
    Vector x(q);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (int i = 0; i < q; ++i) {
        const auto & [lo, hi] = box[static_cast<std::size_t>(i)];
        x(i) = lo + (hi - lo) * static_cast<double>(rest % static_cast<std::size_t>(k)) / (k - 1);
        rest /= static_cast<std::size_t>(k);
      }
      const double v = fp(x.data());
      tmin = std::min(tmin, v);
      tmax = std::max(tmax, v);
    }
  }
  const double pad = 1e-3 * std::max(1e-12, tmax - tmin);
  tmin -= pad;
  tmax += pad;

  // Level set chart: y = the coordinates other than j.
  Box rest_box;
  std::vector<expr::NodePtr> to_y(static_cast<std::size_t>(q));
  int k = 0;
  for (int i = 0; i < q; ++i) {
    if (i == j) { continue; }
    rest_box.push_back(box[static_cast<std::size_t>(i)]);
    to_y[static_cast<std::size_t>(i)] = expr::variable(k++);
  }
  to_y[static_cast<std::size_t>(j)] = expr::constant(0.0);
  const auto h_y = expr::substitute(h, to_y);
  const auto & [jlo, jhi] = box[static_cast<std::size_t>(j)];
  const int degree = g.homogeneous_dimension() - 1;
  Quadrature quad;
  quad.resolution = opt.resolution;
  const double dt = (tmax - tmin) / opt.t_slices;
  double rhs_fine = 0.0;
  double rhs_err = 0.0;
  std::size_t rhs_count = 0;
  for (int sl = 0; sl < opt.t_slices; ++sl) {
    const double t = tmin + (sl + 0.5) * dt;
    std::vector<expr::NodePtr> exprs;
    for (int i = 0; i < q; ++i) {
      exprs.push_back(i == j ? expr::make(expr::Op::Add, expr::constant(t), h_y) : to_y[static_cast<std::size_t>(i)]);
    }
    const ParamMap level(gp, q - 1, exprs, rest_box);
    const auto e = integrate_density(level, rest_box, degree, quad, [&](const Vector &, const Vector & p) {
      return p(j) >= jlo && p(j) <= jhi ? up(p.data()) : 0.0;
    });
    rhs_fine += e.value * dt;
    rhs_err += e.quad_error * dt;
    rhs_count += e.samples;
  }
  rep.rhs = {rhs_fine, 0.0, rhs_count, 0, "midpoint-grid", rhs_err};
  rep.verdict.name = "coarea";
  rep.verdict.lhs = rep.lhs.value;
  rep.verdict.rhs = rep.rhs.value;
  rep.verdict.tolerance = opt.tolerance;
  const double scale = std::max(std::abs(rep.lhs.value), std::abs(rep.rhs.value));
  rep.verdict.pass = std::abs(rep.lhs.value - rep.rhs.value) <= opt.tolerance * scale + 1e-12;
  return rep;
}

}  // namespace nilarea
