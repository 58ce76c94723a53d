#pragma once

/**
 * @file
 * @brief Derivative-free maximization: Nelder-Mead simplex.
 */

#include "nilarea/numeric.hpp"

#include <functional>

namespace nilarea {

struct SimplexResult
{
  Vector x;
  double value = 0.0;
  int evaluations = 0;
};

/// Maximizes f starting from x0 with initial edge length `step`.
inline SimplexResult nelder_mead_max(const std::function<double(const Vector &)> & f, const Vector & x0, double step, int max_iter,
                                     double ftol = 1e-10)
{
  const auto n = x0.size();
  std::vector<Vector> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> val(static_cast<std::size_t>(n + 1));
  int evals = 0;
  auto eval = [&](const Vector & x) {
    ++evals;
    return f(x);
  };
  for (Eigen::Index i = 0; i < n; ++i) { pts[static_cast<std::size_t>(i + 1)](i) += step; }
  for (std::size_t i = 0; i < pts.size(); ++i) { val[i] = eval(pts[i]); }

  std::vector<std::size_t> order(pts.size());
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < order.size(); ++i) { order[i] = i; }
    // Best first; ties keep index order.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (std::abs(val[best] - val[worst]) <= ftol * (std::abs(val[best]) + ftol)) { break; }

    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) { centroid += pts[order[i]]; }
    centroid /= static_cast<double>(n);

    const Vector xr = centroid + (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr > val[best]) {
      const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(xe);
      if (fe > fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
    } else if (fr > val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
    } else {
      const Vector xc = centroid + 0.5 * (pts[worst] - centroid);
      const double fc = eval(xc);
      if (fc > val[worst]) {
        pts[worst] = xc;
        val[worst] = fc;
      } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i == best) { continue; }
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          val[i] = eval(pts[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (val[i] > val[best]) { best = i; }
  }
  return {pts[best], val[best], evals};
}

}  // namespace nilarea
