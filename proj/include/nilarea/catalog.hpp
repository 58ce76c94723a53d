#pragma once

/**
 * @file
 * @brief Built-in groups and loading of group-definition documents.
 *
 * Document form: {"name": ..., "layers": [h_1, ...], "brackets": [[i, j, k, c], ...]}
 * with 1-based indices.  A bare string names a catalog group, e.g. "heisenberg(2)".
 */

#include "nilarea/algebra.hpp"

#include <json.hpp>

#include <regex>

namespace nilarea {

/// H^n with [e_i, e_{n+i}] = 2 e_{2n+1}, so the third coordinate of x·x' picks up x_1x_2' - x_2x_1' in H^1.
inline GroupPtr heisenberg(int n)
{
  if (n < 1) { throw BadDimensions("heisenberg(n) needs n >= 1"); }
  std::vector<BracketEntry> b;
  for (int i = 0; i < n; ++i) { b.push_back({i, n + i, 2 * n, 2.0}); }
  return GradedGroup::create("heisenberg(" + std::to_string(n) + ")", {2 * n, 1}, b);
}

inline GroupPtr abelian(int n)
{
  if (n < 1) { throw BadDimensions("abelian(n) needs n >= 1"); }
  return GradedGroup::create("abelian(" + std::to_string(n) + ")", {n}, {});
}

/// Filiform step-3 group: [e_1, e_2] = e_3, [e_1, e_3] = e_4.
inline GroupPtr engel()
{
  return GradedGroup::create("engel", {2, 1, 1}, {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}});
}

/// Free step-2 group on m generators; [e_i, e_j] = e_{m + pair(i, j)} with pairs in lexicographic order.
inline GroupPtr free2(int m)
{
  if (m < 2) { throw BadDimensions("free2(m) needs m >= 2"); }
  std::vector<BracketEntry> b;
  int k = m;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) { b.push_back({i, j, k++, 1.0}); }
  }
  return GradedGroup::create("free2(" + std::to_string(m) + ")", {m, m * (m - 1) / 2}, b);
}

namespace detail {

/// Product of Cayley-Dickson basis units e_a e_b = sign * e_c, for algebras of dimension n (power of two).
inline std::pair<int, int> cayley_dickson(int a, int b, int n)
{
  if (n == 1) { return {1, 0}; }
  const int half = n / 2;
  auto conj_sign = [](int c) { return c == 0 ? 1 : -1; };
  if (a < half && b < half) { return cayley_dickson(a, b, half); }
  if (a < half) {
    // (p, 0)(0, s) = (0, s p)
    auto r = cayley_dickson(b - half, a, half);
    return {r.first, r.second + half};
  }
  if (b < half) {
    // (0, q)(r, 0) = (0, q conj(r))
    auto r = cayley_dickson(a - half, b, half);
    return {r.first * conj_sign(b), r.second + half};
  }
  // (0, q)(0, s) = (-conj(s) q, 0)
  auto r = cayley_dickson(b - half, a - half, half);
  return {-r.first * conj_sign(b - half), r.second};
}

}  // namespace detail

/**
 * @brief H-type group with first layer R^k (k in {2, 4, 8}) and centre R^{k-1}.
 *
 * [x, y]_l = <u_l x, y> where u_l is left multiplication by the l-th imaginary
 * unit of the complex numbers, quaternions or octonions; [e_1, e_2] = e_{k+1}.
 */
inline GroupPtr h_type(int k)
{
  if (k != 2 && k != 4 && k != 8) { throw BadDimensions("h_type(k) needs k in {2, 4, 8}"); }
  std::vector<BracketEntry> b;
  for (int l = 1; l < k; ++l) {
    for (int a = 0; a < k; ++a) {
      const auto [sign, c] = detail::cayley_dickson(l, a, k);
      if (a < c) { b.push_back({a, c, k + l - 1, static_cast<double>(sign)}); }
    }
  }
  return GradedGroup::create("h_type(" + std::to_string(k) + ")", {k, k - 1}, b);
}

/// Names accepted by `catalog_group`, in listing order.
inline std::vector<std::string> catalog_names()
{
  return {"abelian(1)", "abelian(2)", "abelian(3)", "heisenberg(1)", "heisenberg(2)", "heisenberg(3)", "h_type(2)",
          "h_type(4)",  "h_type(8)",  "engel",      "free2(2)",      "free2(3)",      "free2(4)"};
}

inline GroupPtr catalog_group(const std::string & name)
{
  static const std::regex pattern(R"(\s*([a-z_0-9]+?)\s*(?:\(\s*(\d+)\s*\))?\s*)");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) { throw ConfigError("unknown catalog group '" + name + "'"); }
  const std::string base = m[1];
  const bool has_arg = m[2].matched;
  const int arg = has_arg ? std::stoi(m[2]) : 1;
  if (base == "abelian") { return abelian(has_arg ? arg : 1); }
  if (base == "heisenberg") { return heisenberg(arg); }
  if (base == "h_type") { return h_type(has_arg ? arg : 4); }
  if (base == "engel" && !has_arg) { return engel(); }
  if (base == "free2") { return free2(has_arg ? arg : 2); }
  throw ConfigError("unknown catalog group '" + name + "'");
}

/// Builds a group from a catalog name or a {name, layers, brackets} document.
inline GroupPtr load_group(const nlohmann::json & spec)
{
  if (spec.is_string()) { return catalog_group(spec.get<std::string>()); }
  if (!spec.is_object()) { throw ConfigError("group must be a catalog name or an object"); }
  for (const auto & [key, value] : spec.items()) {
    if (key != "name" && key != "layers" && key != "brackets") { throw ConfigError("unknown group key '" + key + "'"); }
  }
  if (!spec.contains("layers") || !spec["layers"].is_array()) { throw BadDimensions("group needs a 'layers' array"); }
  std::vector<int> layers;
  for (const auto & h : spec["layers"]) {
    if (!h.is_number_integer()) { throw BadDimensions("layer dimensions must be integers"); }
    layers.push_back(h.get<int>());
  }
  std::vector<BracketEntry> entries;
  if (spec.contains("brackets")) {
    for (const auto & row : spec["brackets"]) {
      if (!row.is_array() || row.size() != 4 || !row[0].is_number_integer() || !row[1].is_number_integer() ||
          !row[2].is_number_integer() || !row[3].is_number()) {
        throw BadDimensions("each bracket must be [i, j, k, c] with 1-based integer indices");
      }
      entries.push_back({row[0].get<int>() - 1, row[1].get<int>() - 1, row[2].get<int>() - 1, row[3].get<double>()});
    }
  }
  return GradedGroup::create(spec.value("name", std::string("custom")), layers, entries);
}

}  // namespace nilarea
