#pragma once

/**
 * @file
 * @brief Graded nilpotent Lie algebras in exponential coordinates.
 *
 * A group is described by its layer dimensions h_1..h_iota and sparse structure
 * constants [e_i, e_j] = sum_k c_ij^k e_k.  The product is the truncated
 * Baker-Campbell-Hausdorff series, evaluated from a plan of right-nested
 * brackets whose coefficients are computed once in exact rational arithmetic.
 */

#include "nilarea/numeric.hpp"

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace nilarea {

/// One nonzero structure constant, stored with i < j (0-based).
struct BracketEntry
{
  int i;
  int j;
  int k;
  double c;
};

/// Truncated BCH series as right-nested brackets [w_1,[w_2,[...,[w_{m-1},w_m]]]].
struct BchPlan
{
  /// Node 0 is x, node 1 is y; node t >= 2 is [letter, child] with letter 0 (x) or 1 (y).
  struct Node
  {
    int letter;
    int child;
    int y_count;
  };
  struct Term
  {
    double coef;
    int node;
  };
  std::vector<Node> nodes;
  std::vector<Term> terms;

  /// Coefficients of log(e^x e^y) as words over {x, y}, truncated at `max_len`.
  static std::map<std::string, Rational> log_series(int max_len)
  {
    using Poly = std::map<std::string, Rational>;
    auto mul = [max_len](const Poly & a, const Poly & b) {
      Poly out;
      for (const auto & [wa, ca] : a) {
        for (const auto & [wb, cb] : b) {
          if (static_cast<int>(wa.size() + wb.size()) > max_len) { continue; }
          out[wa + wb] += ca * cb;
        }
      }
      return out;
    };
    std::vector<std::int64_t> fact(static_cast<std::size_t>(max_len) + 1, 1);
    for (int i = 1; i <= max_len; ++i) { fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i; }

    Poly w;  // e^x e^y - 1
    for (int a = 0; a <= max_len; ++a) {
      for (int b = 0; a + b <= max_len; ++b) {
        if (a + b == 0) { continue; }
        w[std::string(static_cast<std::size_t>(a), 'x') + std::string(static_cast<std::size_t>(b), 'y')] =
          Rational(1, fact[static_cast<std::size_t>(a)] * fact[static_cast<std::size_t>(b)]);
      }
    }
    Poly result;
    Poly power = w;
    for (int k = 1; k <= max_len; ++k) {
      const Rational scale((k % 2 == 1) ? 1 : -1, k);
      for (const auto & [word, c] : power) { result[word] += scale * c; }
      power = mul(power, w);
    }
    std::erase_if(result, [](const auto & kv) { return kv.second.is_zero(); });
    return result;
  }

  /// Dynkin-Specht-Wever: the degree-m Lie part equals (1/m) sum_w c_w [w].
  static BchPlan build(int step)
  {
    BchPlan plan;
    plan.nodes = {{0, -1, 0}, {1, -1, 1}};
    std::map<std::string, int> index{{"x", 0}, {"y", 1}};
    auto node_for = [&](const std::string & word, auto && self) -> int {
      if (auto it = index.find(word); it != index.end()) { return it->second; }
      const int child = self(word.substr(1), self);
      const int letter = word[0] == 'x' ? 0 : 1;
      plan.nodes.push_back({letter, child, plan.nodes[static_cast<std::size_t>(child)].y_count + letter});
      const int id = static_cast<int>(plan.nodes.size()) - 1;
      index.emplace(word, id);
      return id;
    };
    for (const auto & [word, c] : log_series(step)) {
      const auto m = word.size();
      if (m < 2 || word[m - 1] == word[m - 2]) { continue; }
      const int node = node_for(word, node_for);
      plan.terms.push_back({(c / Rational(static_cast<std::int64_t>(m))).to_double(), node});
    }
    return plan;
  }
};

class GradedGroup;
using GroupPtr = std::shared_ptr<const GradedGroup>;

/**
 * @brief Immutable graded group with validated structure constants.
 *
 * Construct through `GradedGroup::create`, which checks antisymmetry, grading and
 * the Jacobi identity and throws the matching error.
 */
class GradedGroup
{
public:
  static GroupPtr create(std::string name, std::vector<int> layer_dims, const std::vector<BracketEntry> & raw)
  {
    return std::shared_ptr<const GradedGroup>(new GradedGroup(std::move(name), std::move(layer_dims), raw));
  }

  [[nodiscard]] const std::string & name() const { return name_; }
  [[nodiscard]] int dim() const { return q_; }
  [[nodiscard]] int step() const { return static_cast<int>(layers_.size()); }
  [[nodiscard]] const std::vector<int> & layer_dims() const { return layers_; }
  [[nodiscard]] const std::vector<int> & degrees() const { return degrees_; }
  [[nodiscard]] int degree(int i) const { return degrees_[static_cast<std::size_t>(i)]; }
  /// First coordinate index of layer j (1-based layer, 0-based index).
  [[nodiscard]] int layer_begin(int j) const { return offsets_[static_cast<std::size_t>(j - 1)]; }
  [[nodiscard]] int layer_end(int j) const { return offsets_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] int homogeneous_dimension() const
  {
    int total = 0;
    for (int d : degrees_) { total += d; }
    return total;
  }
  [[nodiscard]] const std::vector<BracketEntry> & brackets() const { return entries_; }
  [[nodiscard]] const BchPlan & plan() const { return plan_; }

  /// out = [x, y]; out must not alias x or y.
  void bracket(const double * x, const double * y, double * out) const
  {
    std::fill(out, out + q_, 0.0);
    for (const auto & e : entries_) { out[e.k] += e.c * (x[e.i] * y[e.j] - x[e.j] * y[e.i]); }
  }

  [[nodiscard]] Vector bracket(const Vector & x, const Vector & y) const
  {
    Vector out(q_);
    bracket(x.data(), y.data(), out.data());
    return out;
  }

  /// Scratch doubles needed by `product`.
  [[nodiscard]] std::size_t workspace_size() const { return plan_.nodes.size() * static_cast<std::size_t>(q_); }

  /// out = x·y via the BCH plan. `work` holds workspace_size() doubles.
  void product(const double * x, const double * y, double * out, double * work) const
  {
    evaluate_nodes(x, y, work, 99);
    for (int i = 0; i < q_; ++i) { out[i] = x[i] + y[i]; }
    for (const auto & t : plan_.terms) {
      const double * v = work + static_cast<std::size_t>(t.node) * static_cast<std::size_t>(q_);
      for (int i = 0; i < q_; ++i) { out[i] += t.coef * v[i]; }
    }
  }

  /// A(x) with columns X_i(x) = d/dt x·(t e_i) at t = 0.
  [[nodiscard]] Matrix frame(const Vector & x) const
  {
    Matrix a = Matrix::Identity(q_, q_);
    if (entries_.empty()) { return a; }
    std::vector<double> work(workspace_size());
    Vector e = Vector::Zero(q_);
    for (int i = 0; i < q_; ++i) {
      e.setZero();
      e(i) = 1.0;
      evaluate_nodes(x.data(), e.data(), work.data(), 1);
      for (const auto & t : plan_.terms) {
        if (plan_.nodes[static_cast<std::size_t>(t.node)].y_count != 1) { continue; }
        const double * v = work.data() + static_cast<std::size_t>(t.node) * static_cast<std::size_t>(q_);
        for (int l = 0; l < q_; ++l) { a(l, i) += t.coef * v[l]; }
      }
    }
    return a;
  }

private:
  GradedGroup(std::string name, std::vector<int> layer_dims, const std::vector<BracketEntry> & raw)
      : name_(std::move(name)), layers_(std::move(layer_dims))
  {
    if (layers_.empty()) { throw BadDimensions("group needs at least one layer"); }
    if (layers_.size() > 6) { throw BadDimensions("step above 6 is not supported"); }
    offsets_.push_back(0);
    for (std::size_t j = 0; j < layers_.size(); ++j) {
      if (layers_[j] <= 0) { throw BadDimensions("layer " + std::to_string(j + 1) + " has nonpositive dimension"); }
      for (int t = 0; t < layers_[j]; ++t) { degrees_.push_back(static_cast<int>(j) + 1); }
      offsets_.push_back(offsets_.back() + layers_[j]);
    }
    q_ = offsets_.back();
    if (q_ > 64) { throw BadDimensions("dimension above 64 is not supported"); }

    std::map<std::tuple<int, int, int>, double> table;
    for (const auto & b : raw) {
      if (b.i < 0 || b.j < 0 || b.k < 0 || b.i >= q_ || b.j >= q_ || b.k >= q_) {
        throw BadDimensions("bracket index out of range");
      }
      if (b.c == 0.0) { continue; }
      if (b.i == b.j) { throw GradingViolation("[e_i, e_i] must vanish (i = " + std::to_string(b.i + 1) + ")"); }
      if (degrees_[static_cast<std::size_t>(b.k)] != degrees_[static_cast<std::size_t>(b.i)] + degrees_[static_cast<std::size_t>(b.j)]) {
        throw GradingViolation("[e_" + std::to_string(b.i + 1) + ", e_" + std::to_string(b.j + 1) + "] has a component on e_" +
                               std::to_string(b.k + 1) + " outside layer " +
                               std::to_string(degrees_[static_cast<std::size_t>(b.i)] + degrees_[static_cast<std::size_t>(b.j)]));
      }
      const bool swapped = b.i > b.j;
      const auto key = std::make_tuple(std::min(b.i, b.j), std::max(b.i, b.j), b.k);
      const double c = swapped ? -b.c : b.c;
      if (auto it = table.find(key); it != table.end()) {
        if (std::abs(it->second - c) > 1e-12 * std::max(1.0, std::abs(c))) {
          throw GradingViolation("structure constants are not antisymmetric");
        }
      } else {
        table.emplace(key, c);
      }
    }
    for (const auto & [key, c] : table) { entries_.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), c}); }
    check_jacobi();
    plan_ = BchPlan::build(step());
  }

  void check_jacobi() const
  {
    if (entries_.empty()) { return; }
    std::vector<double> ei(q_, 0.0);
    std::vector<double> ej(q_, 0.0);
    std::vector<double> ek(q_, 0.0);
    std::vector<double> t1(q_);
    std::vector<double> t2(q_);
    std::vector<double> sum(q_);
    auto add_cyclic = [&](const std::vector<double> & a, const std::vector<double> & b, const std::vector<double> & c) {
      bracket(b.data(), c.data(), t1.data());
      bracket(a.data(), t1.data(), t2.data());
      for (int l = 0; l < q_; ++l) { sum[static_cast<std::size_t>(l)] += t2[static_cast<std::size_t>(l)]; }
    };
    double scale = 0.0;
    for (const auto & e : entries_) { scale = std::max(scale, std::abs(e.c)); }
    for (int i = 0; i < q_; ++i) {
      for (int j = i + 1; j < q_; ++j) {
        for (int k = j + 1; k < q_; ++k) {
          if (degrees_[static_cast<std::size_t>(i)] + degrees_[static_cast<std::size_t>(j)] + degrees_[static_cast<std::size_t>(k)] > step()) {
            continue;
          }
          std::fill(ei.begin(), ei.end(), 0.0);
          std::fill(ej.begin(), ej.end(), 0.0);
          std::fill(ek.begin(), ek.end(), 0.0);
          ei[static_cast<std::size_t>(i)] = ej[static_cast<std::size_t>(j)] = ek[static_cast<std::size_t>(k)] = 1.0;
          std::fill(sum.begin(), sum.end(), 0.0);
          add_cyclic(ei, ej, ek);
          add_cyclic(ej, ek, ei);
          add_cyclic(ek, ei, ej);
          for (double s : sum) {
            if (std::abs(s) > 1e-12 * std::max(1.0, scale * scale)) {
              throw JacobiViolation("Jacobi identity fails on (e_" + std::to_string(i + 1) + ", e_" + std::to_string(j + 1) + ", e_" +
                                    std::to_string(k + 1) + "), residual " + std::to_string(std::abs(s)));
            }
          }
        }
      }
    }
  }

  /// Fills node values; nodes with more than `max_y` copies of y are skipped.
  void evaluate_nodes(const double * x, const double * y, double * work, int max_y) const
  {
    const auto q = static_cast<std::size_t>(q_);
    std::copy(x, x + q_, work);
    std::copy(y, y + q_, work + q);
    for (std::size_t t = 2; t < plan_.nodes.size(); ++t) {
      const auto & nd = plan_.nodes[t];
      if (nd.y_count > max_y) { continue; }
      bracket(nd.letter == 0 ? x : y, work + static_cast<std::size_t>(nd.child) * q, work + t * q);
    }
  }

  std::string name_;
  std::vector<int> layers_;
  std::vector<int> offsets_;
  std::vector<int> degrees_;
  int q_ = 0;
  std::vector<BracketEntry> entries_;
  BchPlan plan_;
};

inline void check_point(const GradedGroup & g, const Vector & x)
{
  if (x.size() != g.dim()) {
    throw BadDimensions("point has " + std::to_string(x.size()) + " coordinates, group dimension is " + std::to_string(g.dim()));
  }
}

inline Vector bch_product(const GradedGroup & g, const Vector & x, const Vector & y)
{
  check_point(g, x);
  check_point(g, y);
  std::vector<double> work(g.workspace_size());
  Vector out(g.dim());
  g.product(x.data(), y.data(), out.data(), work.data());
  return out;
}

/// In exponential coordinates x^{-1} = -x.
inline Vector inverse(const GradedGroup & g, const Vector & x)
{
  check_point(g, x);
  return -x;
}

inline Vector dilate(const GradedGroup & g, double r, const Vector & x)
{
  check_point(g, x);
  if (!(r > 0.0)) { throw NonPositiveScale("dilation factor must be positive, got " + std::to_string(r)); }
  Vector out = x;
  for (int i = 0; i < g.dim(); ++i) { out(i) *= std::pow(r, g.degree(i)); }
  return out;
}

inline Matrix left_invariant_frame(const GradedGroup & g, const Vector & x)
{
  check_point(g, x);
  return g.frame(x);
}

/// Solves A(x) c = v by forward substitution; A(x) - Id is strictly lower in degree.
inline Vector solve_frame(const GradedGroup & g, const Matrix & frame, const Vector & v)
{
  Vector c = v;
  for (int l = 0; l < g.dim(); ++l) {
    for (int i = 0; i < g.layer_begin(g.degree(l)); ++i) { c(l) -= frame(l, i) * c(i); }
  }
  return c;
}

inline Vector frame_coefficients(const GradedGroup & g, const Vector & x, const Vector & v)
{
  check_point(g, v);
  return solve_frame(g, left_invariant_frame(g, x), v);
}

/// Column-wise frame coefficients of a q×n matrix of tangent vectors.
inline Matrix solve_frame(const GradedGroup & g, const Matrix & frame, const Matrix & tangents)
{
  Matrix c(tangents.rows(), tangents.cols());
  for (Eigen::Index j = 0; j < tangents.cols(); ++j) { c.col(j) = solve_frame(g, frame, Vector(tangents.col(j))); }
  return c;
}

/// Linear subspace of the Lie algebra given by a spanning basis.
struct Subspace
{
  Subspace(GroupPtr g, Matrix b) : group(std::move(g)), basis(std::move(b))
  {
    if (basis.rows() != group->dim() || basis.cols() < 1 || basis.cols() > group->dim()) {
      throw BadDimensions("subspace basis must be q x n with 1 <= n <= q");
    }
    Matrix normalized = basis;
    for (Eigen::Index j = 0; j < normalized.cols(); ++j) {
      const double len = normalized.col(j).norm();
      if (len == 0.0) { throw DegenerateTangent("subspace basis has a zero column"); }
      normalized.col(j) /= len;
    }
    Eigen::JacobiSVD<Matrix> svd(normalized);
    if (svd.singularValues().minCoeff() <= 1e-10) { throw DegenerateTangent("subspace basis columns are linearly dependent"); }
  }

  [[nodiscard]] int dim() const { return static_cast<int>(basis.cols()); }

  /// Orthonormal basis of the span.
  [[nodiscard]] Matrix orthonormal() const
  {
    Eigen::HouseholderQR<Matrix> qr(basis);
    return qr.householderQ() * Matrix::Identity(basis.rows(), basis.cols());
  }

  GroupPtr group;
  Matrix basis;
};

inline Subspace coordinate_subspace(const GroupPtr & g, const std::vector<int> & indices)
{
  Matrix b = Matrix::Zero(g->dim(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) { b(indices[c], static_cast<Eigen::Index>(c)) = 1.0; }
  return {g, b};
}

struct SubspaceClass
{
  bool homogeneous = false;
  bool subalgebra = false;
  bool horizontal = false;
  bool vertical = false;
  /// dim(S ∩ H^j) for j = 1..iota.
  std::vector<int> layer_intersection;
};

/// dim(S ∩ H^j) = n - rank(rows of the basis outside layer j).
inline std::vector<int> layer_intersections(const Subspace & s, double tol)
{
  const auto & g = *s.group;
  std::vector<int> dims;
  for (int j = 1; j <= g.step(); ++j) {
    Matrix outside(g.dim() - g.layer_dims()[static_cast<std::size_t>(j - 1)], s.dim());
    Eigen::Index r = 0;
    for (int i = 0; i < g.dim(); ++i) {
      if (g.degree(i) != j) { outside.row(r++) = s.basis.row(i); }
    }
    for (Eigen::Index c = 0; c < outside.cols(); ++c) { outside.col(c) /= s.basis.col(c).norm(); }
    int eff_rank = 0;
    if (outside.rows() > 0) {
      Eigen::JacobiSVD<Matrix> svd(outside);
      for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
        if (svd.singularValues()(k) > tol) { ++eff_rank; }
      }
    }
    dims.push_back(s.dim() - eff_rank);
  }
  return dims;
}

inline SubspaceClass classify_subspace(const Subspace & s, double tol = 1e-9)
{
  const auto & g = *s.group;
  SubspaceClass out;
  out.layer_intersection = layer_intersections(s, tol);
  int total = 0;
  for (int d : out.layer_intersection) { total += d; }
  out.homogeneous = total == s.dim();

  const Matrix q = s.orthonormal();
  out.subalgebra = true;
  for (int a = 0; a < s.dim() && out.subalgebra; ++a) {
    for (int b = a + 1; b < s.dim(); ++b) {
      const Vector u = s.basis.col(a) / s.basis.col(a).norm();
      const Vector v = s.basis.col(b) / s.basis.col(b).norm();
      const Vector br = g.bracket(u, v);
      const Vector residual = br - q * (q.transpose() * br);
      if (residual.norm() > tol * std::max(1.0, br.norm())) {
        out.subalgebra = false;
        break;
      }
    }
  }

  out.horizontal = out.layer_intersection[0] == s.dim();
  if (out.homogeneous) {
    int first = 0;
    while (first < g.step() && out.layer_intersection[static_cast<std::size_t>(first)] == 0) { ++first; }
    out.vertical = true;
    for (int j = first + 1; j < g.step(); ++j) {
      if (out.layer_intersection[static_cast<std::size_t>(j)] != g.layer_dims()[static_cast<std::size_t>(j)]) { out.vertical = false; }
    }
  }
  return out;
}

/// Largest degree of an n-vector: ell_n r_n + sum_{j > ell_n} j h_j.
inline int q_n_max_degree(const GradedGroup & g, int n)
{
  if (n < 1 || n > g.dim()) { throw BadDimensions("n must satisfy 1 <= n <= q"); }
  int above = 0;
  int weighted = 0;
  for (int j = g.step(); j >= 1; --j) {
    const int h = g.layer_dims()[static_cast<std::size_t>(j - 1)];
    if (above + h >= n) { return j * (n - above) + weighted; }
    above += h;
    weighted += j * h;
  }
  return weighted;
}

}  // namespace nilarea
