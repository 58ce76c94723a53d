#pragma once

/**
 * @file
 * @brief Parametrized submanifolds Psi: U -> G and their pointwise algebraic data.
 */

#include "nilarea/exterior.hpp"
#include "nilarea/expression.hpp"
#include "nilarea/rng.hpp"

#include <optional>

namespace nilarea {

using Box = std::vector<std::pair<double, double>>;

/// Psi with symbolic Jacobian, compiled once.
class ParamMap
{
public:
  ParamMap(GroupPtr g, int n, std::vector<expr::NodePtr> exprs, Box domain, std::string source = {})
      : group_(std::move(g)), n_(n), exprs_(std::move(exprs)), domain_(std::move(domain)), source_(std::move(source))
  {
    const int q = group_->dim();
    if (n_ < 1 || n_ > q) { throw BadDimensions("parameter dimension must satisfy 1 <= n <= q"); }
    if (static_cast<int>(exprs_.size()) != q) {
      throw ArityError("expected " + std::to_string(q) + " expressions, got " + std::to_string(exprs_.size()));
    }
    if (static_cast<int>(domain_.size()) != n_) { throw BadDimensions("domain needs one interval per parameter"); }
    for (const auto & [lo, hi] : domain_) {
      if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) { throw BadDimensions("domain intervals must satisfy lo < hi"); }
    }
    for (int i = 0; i < q; ++i) {
      value_.emplace_back(exprs_[static_cast<std::size_t>(i)]);
      for (int j = 0; j < n_; ++j) { deriv_.emplace_back(expr::derivative(exprs_[static_cast<std::size_t>(i)], j)); }
    }
  }

  [[nodiscard]] const GroupPtr & group() const { return group_; }
  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int q() const { return group_->dim(); }
  [[nodiscard]] const Box & domain() const { return domain_; }
  [[nodiscard]] const std::string & source() const { return source_; }
  [[nodiscard]] const std::vector<expr::NodePtr> & expressions() const { return exprs_; }

  [[nodiscard]] bool contains(const double * y, double slack = 0.0) const
  {
    for (int i = 0; i < n_; ++i) {
      const auto & [lo, hi] = domain_[static_cast<std::size_t>(i)];
      const double s = slack * (hi - lo);
      if (y[i] < lo - s || y[i] > hi + s) { return false; }
    }
    return true;
  }

  [[nodiscard]] Vector center() const
  {
    Vector c(n_);
    for (int i = 0; i < n_; ++i) { c(i) = 0.5 * (domain_[static_cast<std::size_t>(i)].first + domain_[static_cast<std::size_t>(i)].second); }
    return c;
  }

  /// Psi(y) without domain or finiteness checks.
  void eval(const double * y, double * out) const
  {
    for (std::size_t i = 0; i < value_.size(); ++i) { out[i] = value_[i](y); }
  }

  void jacobian(const double * y, Matrix & out) const
  {
    out.resize(q(), n_);
    for (int i = 0; i < q(); ++i) {
      for (int j = 0; j < n_; ++j) { out(i, j) = deriv_[static_cast<std::size_t>(i * n_ + j)](y); }
    }
  }

  [[nodiscard]] Vector point(const Vector & y) const
  {
    check(y);
    Vector p(q());
    eval(y.data(), p.data());
    if (!p.allFinite()) { throw NonFinite("Psi is not finite at the requested parameter"); }
    return p;
  }

  [[nodiscard]] Matrix jacobian(const Vector & y) const
  {
    check(y);
    Matrix j;
    jacobian(y.data(), j);
    if (!j.allFinite()) { throw NonFinite("Jacobian is not finite at the requested parameter"); }
    return j;
  }

private:
  void check(const Vector & y) const
  {
    if (y.size() != n_) { throw BadDimensions("parameter point has wrong length"); }
    if (!contains(y.data(), 1e-12)) { throw DomainViolation("parameter point outside the domain"); }
  }

  GroupPtr group_;
  int n_;
  std::vector<expr::NodePtr> exprs_;
  Box domain_;
  std::string source_;
  std::vector<expr::Program> value_;
  std::vector<expr::Program> deriv_;
};

/// Parses q semicolon-separated expressions in y1..yn.
inline ParamMap parse_parametrization(const GroupPtr & g, const std::string & src, int n, Box domain)
{
  auto exprs = expr::parse_list(src, expr::numbered("y", n));
  ParamMap m(g, n, std::move(exprs), std::move(domain), src);
  // Embedding check at the domain centre.
  const Matrix j = m.jacobian(m.center());
  Matrix unit = j;
  for (Eigen::Index c = 0; c < unit.cols(); ++c) {
    const double len = unit.col(c).norm();
    if (len > 0.0) { unit.col(c) /= len; }
  }
  if (numerical_rank(unit, 1e-10) < n || max_abs(unit) == 0.0) {
    throw DegenerateTangent("Jacobian is rank deficient at the domain centre");
  }
  return m;
}

/// Frame coefficients of the tangent vectors at y: columns of A(Psi(y))^{-1} J(y).
inline Matrix tangent_coefficients(const ParamMap & s, const Vector & y)
{
  const Vector p = s.point(y);
  return solve_frame(*s.group(), left_invariant_frame(*s.group(), p), s.jacobian(y));
}

inline Multivector tangent_lift(const ParamMap & s, const Vector & y, const NumericPolicy & policy = {})
{
  return lift_tangent(s.group(), s.point(y), s.jacobian(y), policy);
}

/// max{M : ||pi_M(xi)|| > rel_tol ||xi||}.
inline int degree_of(const Multivector & xi, const NumericPolicy & policy)
{
  const double total = xi.norm();
  int best = 0;
  const int top = xi.group()->homogeneous_dimension();
  for (int m = 1; m <= top; ++m) {
    if (project_degree(xi, m).norm() > policy.rel_tol * total) { best = m; }
  }
  return best;
}

inline int pointwise_degree(const ParamMap & s, const Vector & y, const NumericPolicy & policy = {})
{
  return degree_of(tangent_lift(s, y, policy), policy);
}

struct HTangent
{
  std::optional<Subspace> space;
  bool regular = false;
  int kernel_dim = 0;
};

/// A = {X : X ^ pi_N(xi) = 0} from the SVD of the linear map X -> X ^ pi_N(xi).
inline HTangent homogeneous_tangent_of(const Multivector & xi, int degree, const NumericPolicy & policy)
{
  const GroupPtr & g = xi.group();
  const int q = g->dim();
  const int n = xi.grade();
  HTangent out;
  Multivector pi = project_degree(xi, degree);
  const double scale = pi.norm();
  if (scale == 0.0) { throw NonSimpleProjection("pi_N(xi) vanishes"); }
  pi = (1.0 / scale) * pi;
  if (n == q) {
    out.space = Subspace(g, Matrix::Identity(q, q));
    out.kernel_dim = q;
    out.regular = true;
    return out;
  }
  std::map<Key, int> rows;
  std::vector<Multivector> images;
  for (int i = 0; i < q; ++i) {
    images.push_back(wedge(Multivector::basis(g, {i}), pi));
    for (const auto & [k, c] : images.back().terms()) { rows.emplace(k, 0); }
  }
  int r = 0;
  for (auto & [k, idx] : rows) { idx = r++; }
  Matrix m = Matrix::Zero(std::max(1, r), q);
  for (int i = 0; i < q; ++i) {
    for (const auto & [k, c] : images[static_cast<std::size_t>(i)].terms()) { m(rows.at(k), i) = c; }
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto & sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double threshold = std::max(1e-12, 1e3 * policy.rel_tol) * std::max(smax, 1.0);
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > threshold) { ++rank; }
  }
  out.kernel_dim = q - rank;
  if (out.kernel_dim != n) {
    throw NonSimpleProjection("kernel of X -> X ^ pi_N(xi) has dimension " + std::to_string(out.kernel_dim) + ", expected " +
                              std::to_string(n));
  }
  Matrix basis = svd.matrixV().rightCols(n);
  // Clean round-off so exact layer containment is visible to the classifier.
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    if (std::abs(basis.data()[i]) < 1e-13) { basis.data()[i] = 0.0; }
  }
  out.space = Subspace(g, basis);
  out.regular = classify_subspace(*out.space, std::max(policy.rel_tol, 1e-9)).subalgebra;
  return out;
}

inline HTangent homogeneous_tangent(const ParamMap & s, const Vector & y, const NumericPolicy & policy = {})
{
  const auto xi = tangent_lift(s, y, policy);
  return homogeneous_tangent_of(xi, degree_of(xi, policy), policy);
}

/**
 * @brief alpha_j = rank(rows of degree >= j) - rank(rows of degree >= j + 1) of the frame
 * coefficients, i.e. the number of echelon pivots in layer j when reducing from the top layer.
 */
inline std::vector<int> alpha_from_coefficients(const GradedGroup & g, const Matrix & c)
{
  Matrix unit = c;
  for (Eigen::Index j = 0; j < unit.cols(); ++j) { unit.col(j) /= unit.col(j).norm(); }
  const int step = g.step();
  std::vector<int> ranks(static_cast<std::size_t>(step) + 2, 0);
  for (int j = step; j >= 1; --j) {
    const int begin = g.layer_begin(j);
    const Matrix rows = unit.bottomRows(g.dim() - begin);
    int rank = 0;
    if (rows.rows() > 0) {
      Eigen::JacobiSVD<Matrix> svd(rows);
      for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
        if (svd.singularValues()(k) > 1e-9) { ++rank; }
      }
    }
    ranks[static_cast<std::size_t>(j)] = rank;
  }
  std::vector<int> alpha(static_cast<std::size_t>(step));
  for (int j = 1; j <= step; ++j) {
    alpha[static_cast<std::size_t>(j - 1)] = ranks[static_cast<std::size_t>(j)] - ranks[static_cast<std::size_t>(j + 1)];
  }
  return alpha;
}

inline std::vector<int> alpha_profile(const ParamMap & s, const Vector & y, const NumericPolicy & policy = {})
{
  const Matrix c = tangent_coefficients(s, y);
  const auto alpha = alpha_from_coefficients(*s.group(), c);
  int weighted = 0;
  for (std::size_t j = 0; j < alpha.size(); ++j) { weighted += static_cast<int>(j + 1) * alpha[j]; }
  const int degree = pointwise_degree(s, y, policy);
  if (weighted != degree) {
    throw InconsistentDegree("echelon profile gives degree " + std::to_string(weighted) + ", multivector gives " + std::to_string(degree));
  }
  return alpha;
}

enum class PointClass
{
  Horizontal,
  Transversal,
  VerticalRegular,
  Regular,
  LowDegree,
  Irregular,
};

inline std::string to_string(PointClass c)
{
  switch (c) {
    case PointClass::Horizontal: return "horizontal";
    case PointClass::Transversal: return "transversal";
    case PointClass::VerticalRegular: return "vertical_regular";
    case PointClass::Regular: return "regular";
    case PointClass::LowDegree: return "low_degree";
    case PointClass::Irregular: return "irregular";
  }
  return "?";
}

struct PointAnalysis
{
  Vector y;
  Vector p;
  int degree = 0;
  std::optional<Subspace> htangent;
  bool regular = false;
  PointClass classification = PointClass::Irregular;
  std::vector<int> alpha;
  /// Degree below the sampled degree of the submanifold.
  bool characteristic = false;
  /// All tangent frame coefficients vanish above layer 1.
  bool frame_horizontal = false;
  bool htangent_horizontal = false;
  bool htangent_vertical = false;
  int q_n = 0;
  int sampled_max_degree = 0;
  std::string note;
};

/// Grid points at cell centres of the domain, `per_axis` per coordinate.
inline std::vector<Vector> grid_points(const ParamMap & s, const std::vector<int> & per_axis)
{
  const int n = s.n();
  std::size_t total = 1;
  for (int c : per_axis) { total *= static_cast<std::size_t>(std::max(1, c)); }
  std::vector<Vector> pts;
  pts.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vector y(n);
    std::size_t rest = idx;
    for (int i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(std::max(1, per_axis[static_cast<std::size_t>(i)]));
      const std::size_t k = rest % c;
      rest /= c;
      const auto & [lo, hi] = s.domain()[static_cast<std::size_t>(i)];
      y(i) = lo + (hi - lo) * (static_cast<double>(k) + 0.5) / static_cast<double>(c);
    }
    pts.push_back(y);
  }
  return pts;
}

/// Default coarse grid with at most ~4096 points.
inline std::vector<int> default_grid(int n)
{
  const int per = std::max(2, static_cast<int>(std::floor(std::pow(4096.0, 1.0 / n))));
  return std::vector<int>(static_cast<std::size_t>(n), std::min(per, 15));
}

/// Largest pointwise degree over a grid; degenerate grid points are skipped.
inline int sampled_max_degree(const ParamMap & s, const std::vector<int> & grid, const NumericPolicy & policy = {})
{
  int best = 0;
  for (const auto & y : grid_points(s, grid)) {
    try {
      best = std::max(best, pointwise_degree(s, y, policy));
    } catch (const DegenerateTangent &) {
    } catch (const NonFinite &) {
    }
  }
  return best;
}

inline PointAnalysis classify_point(const ParamMap & s, const Vector & y, const NumericPolicy & policy = {},
                                    std::optional<int> max_degree = std::nullopt)
{
  const auto & g = *s.group();
  PointAnalysis a;
  a.y = y;
  a.p = s.point(y);
  const Matrix c = solve_frame(g, left_invariant_frame(g, a.p), s.jacobian(y));
  const auto xi = lift_tangent(s.group(), a.p, s.jacobian(y), policy);
  a.degree = degree_of(xi, policy);
  a.q_n = q_n_max_degree(g, s.n());
  a.sampled_max_degree = max_degree ? *max_degree : sampled_max_degree(s, default_grid(s.n()), policy);
  a.sampled_max_degree = std::max(a.sampled_max_degree, a.degree);
  a.characteristic = a.degree < a.sampled_max_degree;

  a.alpha = alpha_from_coefficients(g, c);
  int weighted = 0;
  for (std::size_t j = 0; j < a.alpha.size(); ++j) { weighted += static_cast<int>(j + 1) * a.alpha[j]; }
  if (weighted != a.degree) {
    throw InconsistentDegree("echelon profile gives degree " + std::to_string(weighted) + ", multivector gives " +
                             std::to_string(a.degree));
  }

  const double cscale = max_abs(c);
  a.frame_horizontal = true;
  for (int i = g.layer_end(1); i < g.dim(); ++i) {
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      if (!policy.is_zero(c(i, k), cscale)) { a.frame_horizontal = false; }
    }
  }

  try {
    const auto h = homogeneous_tangent_of(xi, a.degree, policy);
    a.htangent = h.space;
    a.regular = h.regular;
    const auto cls = classify_subspace(*h.space, std::max(policy.rel_tol, 1e-9));
    a.htangent_horizontal = cls.horizontal;
    a.htangent_vertical = cls.vertical;
  } catch (const NonSimpleProjection & e) {
    a.regular = false;
    a.note = e.what();
  }

  if (!a.regular) {
    a.classification = PointClass::Irregular;
  } else if (a.characteristic) {
    a.classification = PointClass::LowDegree;
  } else if (a.htangent_horizontal) {
    a.classification = PointClass::Horizontal;
  } else if (a.degree == a.q_n) {
    a.classification = PointClass::Transversal;
    if (!a.htangent_vertical) { a.note = "degree equals Q_n but the homogeneous tangent is not vertical"; }
  } else if (a.htangent_vertical) {
    a.classification = PointClass::VerticalRegular;
  } else {
    a.classification = PointClass::Regular;
  }
  return a;
}

struct DegreeMapResult
{
  std::vector<Vector> points;
  std::vector<int> degrees;
  std::vector<std::string> classes;
  int max_degree = 0;
  double low_degree_fraction = 0.0;
};

/// Per-cell degree and class; cells are analysed in parallel and stored in cell order.
inline DegreeMapResult degree_map(const ParamMap & s, const std::vector<int> & grid, const NumericPolicy & policy = {})
{
  DegreeMapResult out;
  out.points = grid_points(s, grid);
  const std::size_t total = out.points.size();
  out.degrees.assign(total, 0);
  out.classes.assign(total, "");
  for_each_chunk(total, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        out.degrees[i] = pointwise_degree(s, out.points[i], policy);
      } catch (const Error &) {
        out.degrees[i] = 0;
        out.classes[i] = "degenerate";
      }
    }
  });
  for (int d : out.degrees) { out.max_degree = std::max(out.max_degree, d); }
  std::size_t low = 0;
  for_each_chunk(total, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      if (!out.classes[i].empty()) { continue; }
      try {
        out.classes[i] = to_string(classify_point(s, out.points[i], policy, out.max_degree).classification);
      } catch (const Error & err) {
        out.classes[i] = err.kind();
      }
    }
  });
  for (std::size_t i = 0; i < total; ++i) {
    if (out.degrees[i] > 0 && out.degrees[i] < out.max_degree) { ++low; }
  }
  out.low_degree_fraction = total == 0 ? 0.0 : static_cast<double>(low) / static_cast<double>(total);
  return out;
}

struct BlowupCoordinate
{
  int index = 0;
  int degree = 0;
  bool in_tangent = false;
  double slope = 0.0;
  std::vector<double> ratios;
  bool identically_zero = false;
  bool pass = false;
};

struct BlowupResult
{
  bool covered = false;
  std::string advisory;
  std::vector<double> scales;
  std::vector<BlowupCoordinate> coords;
  bool pass = false;
};

/**
 * @brief Orthonormal basis adapted to the grading and to a homogeneous subspace A.
 *
 * Within each layer the basis of A ∩ H^j comes first, then its orthogonal complement in
 * H^j.  Returns the basis (columns) and the in-A flags.
 */
inline std::pair<Matrix, std::vector<bool>> adapted_basis(const Subspace & a)
{
  const auto & g = *a.group;
  const int q = g.dim();
  Matrix basis = Matrix::Zero(q, q);
  std::vector<bool> in_a(static_cast<std::size_t>(q), false);
  const Matrix qa = a.orthonormal();
  int col = 0;
  for (int j = 1; j <= g.step(); ++j) {
    const int b = g.layer_begin(j);
    const int h = g.layer_end(j) - b;
    // A ∩ H^j: vectors of A with no components outside layer j.
    Matrix outside(q - h, qa.cols());
    Eigen::Index r = 0;
    for (int i = 0; i < q; ++i) {
      if (g.degree(i) != j) { outside.row(r++) = qa.row(i); }
    }
    Matrix kernel;
    if (outside.rows() == 0) {
      kernel = Matrix::Identity(qa.cols(), qa.cols());
    } else {
      Eigen::JacobiSVD<Matrix> svd(outside, Eigen::ComputeFullV);
      int rank = 0;
      for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
        if (svd.singularValues()(k) > 1e-9) { ++rank; }
      }
      kernel = svd.matrixV().rightCols(qa.cols() - rank);
    }
    Matrix inter = (qa * kernel).middleRows(b, h);
    Matrix full = Matrix::Zero(h, h);
    int k = 0;
    if (inter.cols() > 0) {
      Eigen::HouseholderQR<Matrix> qr(inter);
      const Matrix qfull = qr.householderQ();
      full = qfull;
      k = static_cast<int>(inter.cols());
    } else {
      full = Matrix::Identity(h, h);
    }
    for (int t = 0; t < h; ++t) {
      basis.block(b, col, h, 1) = full.col(t);
      in_a[static_cast<std::size_t>(col)] = t < k;
      ++col;
    }
  }
  return {basis, in_a};
}

/**
 * @brief Numerical check of the local expansion of p^{-1} Sigma in graph form over A.
 *
 * In coordinates of `adapted_basis(A)`, points of p^{-1}Sigma near 0 are solved by
 * Newton so that their A-coordinates equal t^{d_i} ray_i.  The A-coordinates then
 * scale with slope d_i in log-log; every other coordinate s must satisfy
 * |Gamma_s(t)| / t^{d_s} -> 0, checked as "identically zero" or as a non-increasing
 * ratio over the last two decades that at least halves.
 */
inline BlowupResult blowup_rates(const ParamMap & s, const Vector & y0, const Vector & ray, const NumericPolicy & policy = {},
                                 int levels = 13)
{
  const auto & g = *s.group();
  const int q = g.dim();
  const int n = s.n();
  BlowupResult out;
  const auto pa = classify_point(s, y0, policy);
  const bool hyp = pa.regular && (pa.htangent_horizontal || g.step() == 2 || n == 1 || pa.degree == pa.q_n);
  out.covered = hyp;
  if (!pa.regular) {
    out.advisory = "CaseNotCovered: point is not algebraically regular";
  } else if (!hyp) {
    out.advisory = "CaseNotCovered: none of the horizontal, step-two, curve or transversal cases applies";
  }
  if (!pa.htangent) {
    out.advisory = "CaseNotCovered: no homogeneous tangent space";
    return out;
  }
  if (ray.size() != n) { throw BadDimensions("ray must have n components"); }
  const auto [basis, in_a] = adapted_basis(*pa.htangent);
  std::vector<int> idx_a;
  for (int i = 0; i < q; ++i) {
    if (in_a[static_cast<std::size_t>(i)]) { idx_a.push_back(i); }
  }
  const Vector p = pa.p;
  const Vector pinv = -p;
  std::vector<double> work(g.workspace_size());

  auto gamma = [&](const Vector & y) {
    Vector w(q);
    s.eval(y.data(), w.data());
    Vector z(q);
    g.product(pinv.data(), w.data(), z.data(), work.data());
    return Vector(basis.transpose() * z);
  };
  auto gamma_jac = [&](const Vector & y) {
    Vector w(q);
    s.eval(y.data(), w.data());
    Vector z(q);
    g.product(pinv.data(), w.data(), z.data(), work.data());
    Matrix j;
    s.jacobian(y.data(), j);
    const Matrix d = left_invariant_frame(g, z) * solve_frame(g, left_invariant_frame(g, w), j);
    return Matrix(basis.transpose() * d);
  };
  auto restrict_rows = [&](const Matrix & m) {
    Matrix r(n, m.cols());
    for (int k = 0; k < n; ++k) { r.row(k) = m.row(idx_a[static_cast<std::size_t>(k)]); }
    return r;
  };

  const Vector dir = ray.normalized();
  auto solve = [&](double t, Vector & y_out) {
    Vector target(n);
    for (int k = 0; k < n; ++k) { target(k) = std::pow(t, g.degree(idx_a[static_cast<std::size_t>(k)])) * dir(k); }
    const Matrix j0 = restrict_rows(gamma_jac(y0));
    Vector y = y0 + j0.fullPivLu().solve(target);
    for (int it = 0; it < 50; ++it) {
      if (!s.contains(y.data())) { return false; }
      const Vector gv = gamma(y);
      Vector res(n);
      for (int k = 0; k < n; ++k) { res(k) = gv(idx_a[static_cast<std::size_t>(k)]) - target(k); }
      if (res.norm() <= 1e-15 * std::max(target.norm(), 1e-300) + 1e-300) { break; }
      const Vector step = restrict_rows(gamma_jac(y)).fullPivLu().solve(res);
      y -= step;
      if (step.norm() <= 1e-16 * std::max(1.0, y.norm())) { break; }
    }
    if (!s.contains(y.data())) { return false; }
    y_out = y;
    return true;
  };

  // Largest t0 <= 0.5 whose whole dyadic sequence stays inside the chart.
  double t0 = 0.5;
  std::vector<Vector> ys;
  for (int attempt = 0; attempt < 30; ++attempt, t0 *= 0.5) {
    ys.clear();
    bool ok = true;
    for (int k = 0; k < levels && ok; ++k) {
      Vector y;
      ok = solve(t0 * std::pow(2.0, -k), y);
      ys.push_back(y);
    }
    if (ok) { break; }
    ys.clear();
  }
  if (ys.empty()) { throw BoundaryTooClose("no blow-up scale keeps the graph points inside the domain"); }
  for (int k = 0; k < levels; ++k) { out.scales.push_back(t0 * std::pow(2.0, -k)); }

  std::vector<Vector> gammas;
  for (const auto & y : ys) { gammas.push_back(gamma(y)); }
  double gscale = 0.0;
  for (const auto & gv : gammas) { gscale = std::max(gscale, max_abs(gv)); }

  // Last two decades: scales within a factor 100 of the smallest.
  int first_tail = 0;
  while (first_tail < levels - 1 && out.scales[static_cast<std::size_t>(first_tail)] > 100.0 * out.scales.back()) { ++first_tail; }

  out.pass = true;
  for (int i = 0; i < q; ++i) {
    BlowupCoordinate c;
    c.index = i;
    c.degree = g.degree(i);
    c.in_tangent = in_a[static_cast<std::size_t>(i)];
    double max_abs_val = 0.0;
    for (int k = 0; k < levels; ++k) {
      const double v = std::abs(gammas[static_cast<std::size_t>(k)](i));
      max_abs_val = std::max(max_abs_val, v);
      c.ratios.push_back(v / std::pow(out.scales[static_cast<std::size_t>(k)], c.degree));
    }
    // Least-squares slope of log|Gamma_i| against log t over nonzero values.
    double sx = 0;
    double sy = 0;
    double sxx = 0;
    double sxy = 0;
    int cnt = 0;
    for (int k = 0; k < levels; ++k) {
      const double v = std::abs(gammas[static_cast<std::size_t>(k)](i));
      if (v <= 0.0) { continue; }
      const double lx = std::log(out.scales[static_cast<std::size_t>(k)]);
      const double ly = std::log(v);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++cnt;
    }
    c.slope = cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
    c.identically_zero = max_abs_val <= 1e-12 * std::max(gscale, 1e-300) || max_abs_val == 0.0;
    if (c.in_tangent) {
      const int k = static_cast<int>(std::find(idx_a.begin(), idx_a.end(), i) - idx_a.begin());
      c.pass = std::abs(dir(k)) < 1e-12 || std::abs(c.slope - c.degree) <= 0.1;
    } else if (c.identically_zero) {
      c.pass = true;
    } else {
      bool monotone = true;
      for (int k = first_tail + 1; k < levels; ++k) {
        if (c.ratios[static_cast<std::size_t>(k)] > c.ratios[static_cast<std::size_t>(k - 1)] * (1.0 + 1e-9) + 1e-14) {
          monotone = false;
        }
      }
      const double first = c.ratios[static_cast<std::size_t>(first_tail)];
      c.pass = monotone && c.ratios.back() <= 0.5 * first;
    }
    out.pass = out.pass && c.pass;
    out.coords.push_back(std::move(c));
  }
  return out;
}

}  // namespace nilarea
