#pragma once

/**
 * @file
 * @brief Error types, numeric tolerance policy and exact rationals shared by all modules.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nilarea {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of every error raised by the library. `kind()` is the stable tag
/// written into reports ("GradingViolation", "ParseError", ...).
class Error : public std::runtime_error
{
public:
  Error(std::string kind, const std::string & what) : std::runtime_error(what), kind_(std::move(kind)) {}
  [[nodiscard]] const std::string & kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define NILAREA_ERROR(Name)                                                                        \
  struct Name : Error                                                                              \
  {                                                                                                \
    explicit Name(const std::string & what) : Error(#Name, what) {}                                \
  }

NILAREA_ERROR(GradingViolation);
NILAREA_ERROR(JacobiViolation);
NILAREA_ERROR(BadDimensions);
NILAREA_ERROR(NonPositiveScale);
NILAREA_ERROR(GradeOverflow);
NILAREA_ERROR(DegenerateTangent);
NILAREA_ERROR(NonSimpleProjection);
NILAREA_ERROR(InconsistentDegree);
NILAREA_ERROR(ArityError);
NILAREA_ERROR(DomainViolation);
NILAREA_ERROR(NonFinite);
NILAREA_ERROR(EmptySection);
NILAREA_ERROR(CalibrationFailed);
NILAREA_ERROR(RadiusTooSmall);
NILAREA_ERROR(BoundaryTooClose);
NILAREA_ERROR(CloudTooSparse);
NILAREA_ERROR(NotVertical);
NILAREA_ERROR(LevelSetNotGraph);
NILAREA_ERROR(ConfigError);

#undef NILAREA_ERROR

/// Syntax error in an expression, with the 0-based character offset in the source.
struct ParseError : Error
{
  ParseError(std::size_t pos, const std::string & msg)
      : Error("ParseError", "at position " + std::to_string(pos) + ": " + msg), position(pos), message(msg)
  {}
  std::size_t position;
  std::string message;
};

/**
 * @brief Tolerance policy for every "is this zero" decision.
 *
 * A quantity counts as zero when its magnitude is at most `rel_tol` times the
 * largest magnitude of the object it belongs to.
 */
struct NumericPolicy
{
  double rel_tol = 1e-9;

  [[nodiscard]] bool is_zero(double value, double scale) const
  {
    return std::abs(value) <= rel_tol * std::max(scale, std::numeric_limits<double>::min());
  }
};

/// Exact rational with 64-bit parts; only used for precomputed series coefficients.
class Rational
{
public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den)  // NOLINT
  {
    if (den_ == 0) { throw std::domain_error("Rational: zero denominator"); }
    normalize();
  }

  [[nodiscard]] std::int64_t num() const { return num_; }
  [[nodiscard]] std::int64_t den() const { return den_; }
  [[nodiscard]] double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  [[nodiscard]] bool is_zero() const { return num_ == 0; }

  friend Rational operator+(const Rational & a, const Rational & b)
  {
    const std::int64_t g = std::gcd(a.den_, b.den_);
    return {a.num_ * (b.den_ / g) + b.num_ * (a.den_ / g), a.den_ / g * b.den_};
  }
  friend Rational operator-(const Rational & a) { return {-a.num_, a.den_}; }
  friend Rational operator-(const Rational & a, const Rational & b) { return a + (-b); }
  friend Rational operator*(const Rational & a, const Rational & b)
  {
    const std::int64_t g1 = std::gcd(a.num_, b.den_);
    const std::int64_t g2 = std::gcd(b.num_, a.den_);
    const std::int64_t d1 = g1 == 0 ? 1 : g1;
    const std::int64_t d2 = g2 == 0 ? 1 : g2;
    return {(a.num_ / d1) * (b.num_ / d2), (a.den_ / d2) * (b.den_ / d1)};
  }
  friend Rational operator/(const Rational & a, const Rational & b) { return a * Rational(b.den_, b.num_); }
  Rational & operator+=(const Rational & o) { return *this = *this + o; }
  friend bool operator==(const Rational & a, const Rational & b) = default;

private:
  void normalize()
  {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Largest absolute entry, 0 for empty objects.
template<typename Derived>
double max_abs(const Eigen::MatrixBase<Derived> & m)
{
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Numerical rank using singular values relative to the largest one.
inline int numerical_rank(const Matrix & m, double rel_tol)
{
  if (m.size() == 0) { return 0; }
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto & s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) { return 0; }
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) { ++rank; }
  }
  return rank;
}

}  // namespace nilarea
