#pragma once

/**
 * @file
 * @brief Sparse k-vectors over the left-invariant frame X_1..X_q.
 *
 * A key is a bitmask of the indices in X_I = X_{i_1} ^ ... ^ X_{i_k} with i_1 < ... < i_k,
 * so iteration over the map visits terms in a fixed order.
 */

#include "nilarea/algebra.hpp"

#include <bit>
#include <map>

namespace nilarea {

using Key = std::uint64_t;

inline int key_degree(const GradedGroup & g, Key key)
{
  int d = 0;
  while (key != 0) {
    d += g.degree(std::countr_zero(key));
    key &= key - 1;
  }
  return d;
}

inline std::vector<int> key_indices(Key key)
{
  std::vector<int> out;
  while (key != 0) {
    out.push_back(std::countr_zero(key));
    key &= key - 1;
  }
  return out;
}

inline Key make_key(const std::vector<int> & indices)
{
  Key k = 0;
  for (int i : indices) { k |= Key{1} << static_cast<unsigned>(i); }
  return k;
}

/// Sign of X_A ^ X_B relative to X_{A ∪ B}: parity of pairs (i in A, j in B) with i > j.
inline int wedge_sign(Key a, Key b)
{
  int inversions = 0;
  while (b != 0) {
    const int j = std::countr_zero(b);
    inversions += std::popcount(a >> static_cast<unsigned>(j + 1));
    b &= b - 1;
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

class Multivector
{
public:
  Multivector(GroupPtr g, int grade) : group_(std::move(g)), grade_(grade) {}

  static Multivector basis(const GroupPtr & g, const std::vector<int> & indices, double coef = 1.0)
  {
    Multivector m(g, static_cast<int>(indices.size()));
    std::vector<int> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) { return m; }
    // Sign of the permutation sorting `indices`.
    int sign = 1;
    for (std::size_t a = 0; a < indices.size(); ++a) {
      for (std::size_t b = a + 1; b < indices.size(); ++b) {
        if (indices[a] > indices[b]) { sign = -sign; }
      }
    }
    m.set(make_key(sorted), sign * coef);
    return m;
  }

  /// The 1-vector sum_i v_i X_i.
  static Multivector from_vector(const GroupPtr & g, const Vector & v)
  {
    Multivector m(g, 1);
    for (int i = 0; i < v.size(); ++i) {
      if (v(i) != 0.0) { m.terms_[Key{1} << static_cast<unsigned>(i)] = v(i); }
    }
    return m;
  }

  [[nodiscard]] const GroupPtr & group() const { return group_; }
  [[nodiscard]] int grade() const { return grade_; }
  [[nodiscard]] const std::map<Key, double> & terms() const { return terms_; }
  [[nodiscard]] bool empty() const { return terms_.empty(); }

  [[nodiscard]] double coefficient(Key k) const
  {
    auto it = terms_.find(k);
    return it == terms_.end() ? 0.0 : it->second;
  }

  void set(Key k, double c)
  {
    if (c == 0.0) {
      terms_.erase(k);
    } else {
      terms_[k] = c;
    }
  }

  void add(Key k, double c)
  {
    const double v = coefficient(k) + c;
    set(k, v);
  }

  /// Euclidean norm of the coefficients; the X_I are orthonormal.
  [[nodiscard]] double norm() const
  {
    double s = 0.0;
    for (const auto & [k, c] : terms_) { s += c * c; }
    return std::sqrt(s);
  }

  [[nodiscard]] double max_coefficient() const
  {
    double m = 0.0;
    for (const auto & [k, c] : terms_) { m = std::max(m, std::abs(c)); }
    return m;
  }

  /// Drops coefficients at or below policy.rel_tol times the largest one.
  [[nodiscard]] Multivector pruned(const NumericPolicy & policy) const
  {
    Multivector out(group_, grade_);
    const double scale = max_coefficient();
    for (const auto & [k, c] : terms_) {
      if (!policy.is_zero(c, scale)) { out.terms_.emplace(k, c); }
    }
    return out;
  }

  /// Largest d(X_I) among stored terms, 0 if empty.
  [[nodiscard]] int max_degree() const
  {
    int d = 0;
    for (const auto & [k, c] : terms_) { d = std::max(d, key_degree(*group_, k)); }
    return d;
  }

  friend Multivector operator+(const Multivector & a, const Multivector & b)
  {
    Multivector out = a;
    for (const auto & [k, c] : b.terms_) { out.add(k, c); }
    return out;
  }

  friend Multivector operator*(double s, const Multivector & a)
  {
    Multivector out(a.group_, a.grade_);
    if (s == 0.0) { return out; }
    for (const auto & [k, c] : a.terms_) { out.terms_.emplace(k, s * c); }
    return out;
  }

private:
  GroupPtr group_;
  int grade_;
  std::map<Key, double> terms_;
};

inline Multivector wedge(const Multivector & a, const Multivector & b)
{
  const int q = a.group()->dim();
  if (a.grade() + b.grade() > q) {
    throw GradeOverflow("wedge of grades " + std::to_string(a.grade()) + " and " + std::to_string(b.grade()) + " exceeds q = " +
                        std::to_string(q));
  }
  Multivector out(a.group(), a.grade() + b.grade());
  for (const auto & [ka, ca] : a.terms()) {
    for (const auto & [kb, cb] : b.terms()) {
      if ((ka & kb) != 0) { continue; }
      out.add(ka | kb, wedge_sign(ka, kb) * ca * cb);
    }
  }
  return out;
}

/// pi_M: keeps the terms with d(X_I) = M.
inline Multivector project_degree(const Multivector & v, int m)
{
  Multivector out(v.group(), v.grade());
  for (const auto & [k, c] : v.terms()) {
    if (key_degree(*v.group(), k) == m) { out.set(k, c); }
  }
  return out;
}

inline double g_norm(const Multivector & v) { return v.norm(); }

/// Wedge of the columns of a q x n coefficient matrix, computed by minors.
inline Multivector wedge_columns(const GroupPtr & g, const Matrix & c)
{
  const int q = g->dim();
  const int n = static_cast<int>(c.cols());
  Multivector out(g, n);
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::vector<bool> pick(static_cast<std::size_t>(q), false);
  std::fill(pick.begin(), pick.begin() + n, true);
  Matrix sub(n, n);
  do {
    int r = 0;
    for (int i = 0; i < q; ++i) {
      if (pick[static_cast<std::size_t>(i)]) { rows[static_cast<std::size_t>(r++)] = i; }
    }
    for (int a = 0; a < n; ++a) { sub.row(a) = c.row(rows[static_cast<std::size_t>(a)]); }
    const double det = n == 1 ? sub(0, 0) : sub.determinant();
    if (det != 0.0) { out.set(make_key(rows), det); }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

/**
 * @brief Left-invariant n-vector whose value at p is the tangent n-vector.
 *
 * Each column is rewritten in the frame at p, then the columns are wedged.
 */
inline Multivector lift_tangent(const GroupPtr & g, const Vector & p, const Matrix & tangent, const NumericPolicy & policy = {})
{
  if (tangent.rows() != g->dim()) { throw BadDimensions("tangent basis must have q rows"); }
  const Matrix c = solve_frame(*g, left_invariant_frame(*g, p), tangent);
  Matrix unit = c;
  for (Eigen::Index j = 0; j < unit.cols(); ++j) {
    const double len = unit.col(j).norm();
    if (len == 0.0) { throw DegenerateTangent("tangent column " + std::to_string(j + 1) + " vanishes"); }
    unit.col(j) /= len;
  }
  if (Eigen::JacobiSVD<Matrix>(unit).singularValues().minCoeff() <= 1e-10) {
    throw DegenerateTangent("tangent vectors are linearly dependent");
  }
  return wedge_columns(g, c).pruned(policy);
}

/**
 * @brief Index sets I with |I| = n and d(X_I) = N, for fast ||pi_N(wedge C)|| evaluation.
 */
class DegreeMinors
{
public:
  DegreeMinors(const GradedGroup & g, int n, int degree) : n_(n)
  {
    const int q = g.dim();
    std::vector<bool> pick(static_cast<std::size_t>(q), false);
    std::fill(pick.begin(), pick.begin() + n, true);
    do {
      std::vector<int> rows;
      int d = 0;
      for (int i = 0; i < q; ++i) {
        if (pick[static_cast<std::size_t>(i)]) {
          rows.push_back(i);
          d += g.degree(i);
        }
      }
      if (d == degree) { sets_.push_back(rows); }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }

  /// sqrt of the sum of squared n x n minors of `c` over the stored row sets.
  [[nodiscard]] double norm(const Matrix & c) const
  {
    double s = 0.0;
    if (n_ == 1) {
      for (const auto & rows : sets_) { s += c(rows[0], 0) * c(rows[0], 0); }
      return std::sqrt(s);
    }
    Matrix sub(n_, n_);
    for (const auto & rows : sets_) {
      for (int a = 0; a < n_; ++a) { sub.row(a) = c.row(rows[static_cast<std::size_t>(a)]); }
      const double det = n_ == 2 ? sub(0, 0) * sub(1, 1) - sub(0, 1) * sub(1, 0) : sub.determinant();
      s += det * det;
    }
    return std::sqrt(s);
  }

  [[nodiscard]] std::size_t size() const { return sets_.size(); }

private:
  int n_;
  std::vector<std::vector<int>> sets_;
};

}  // namespace nilarea
