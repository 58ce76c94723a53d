#pragma once

/**
 * @file
 * @brief Configuration-driven task runner behind the `nilarea` command.
 *
 * A run reads one JSON document, validates it completely, executes the selected tasks
 * in order and produces report.json (schema 1), per-task CSV traces and a text summary.
 * Nothing that depends on the clock or the worker count enters the report.
 */

#include "nilarea/catalog.hpp"
#include "nilarea/measure.hpp"
#include "nilarea/properties.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace nilarea::runner {

using json = nlohmann::ordered_json;

inline constexpr int kSchema = 1;

struct RunOptions
{
  /// Task name to run, or "run" for every task in the document.
  std::string command = "run";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
};

struct CsvFile
{
  std::string name;
  std::string content;
};

struct RunOutput
{
  json report;
  std::vector<CsvFile> csv;
  std::string summary;
  int exit_code = 0;
};

inline const std::map<std::string, std::set<std::string>> & task_keys()
{
  static const std::map<std::string, std::set<std::string>> keys = {
      {"validate-group", {}},
      {"catalog", {}},
      {"analyze-point", {"point", "points"}},
      {"degree-map", {"grid"}},
      {"spherical-factor", {"point", "subspace", "coordinates", "starts", "refine_iters", "search_samples", "force_search"}},
      {"federer-density", {"point", "radii", "centers", "min_hits", "flat_rel", "tolerance", "beta_samples"}},
      {"area-check",
       {"region", "probes", "quadrature", "tolerance", "radii", "centers", "min_hits", "beta_samples", "covering_delta", "cloud_grid"}},
      {"coarea-check", {"f", "u", "box", "resolution", "t_slices", "tolerance"}},
      {"blowup-check", {"point", "ray", "levels"}},
      {"prop-suite", {"groups", "axioms"}},
      {"concavity-check", {"body", "axes", "dim", "coordinates", "subspace", "segments"}},
      {"translation-check", {"coordinates", "subspace", "pairs", "spread"}},
      {"beta-constancy", {"count", "dim", "starts", "search_samples"}},
  };
  return keys;
}

namespace detail {

inline void check_keys(const json & obj, const std::set<std::string> & allowed, const std::string & where)
{
  if (!obj.is_object()) { throw ConfigError(where + " must be an object"); }
  for (const auto & [key, value] : obj.items()) {
    if (allowed.count(key) == 0) { throw ConfigError("unknown key '" + key + "' in " + where); }
  }
}

inline double number(const json & v, const std::string & what)
{
  if (!v.is_number()) { throw ConfigError(what + " must be a number"); }
  return v.get<double>();
}

inline Vector vector_of(const json & v, const std::string & what)
{
  if (!v.is_array()) { throw ConfigError(what + " must be an array of numbers"); }
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) { out(static_cast<Eigen::Index>(i)) = number(v[i], what); }
  return out;
}

inline std::vector<int> ints_of(const json & v, const std::string & what)
{
  if (!v.is_array()) { throw ConfigError(what + " must be an array of integers"); }
  std::vector<int> out;
  for (const auto & e : v) {
    if (!e.is_number_integer()) { throw ConfigError(what + " must be an array of integers"); }
    out.push_back(e.get<int>());
  }
  return out;
}

inline Box box_of(const json & v, const std::string & what)
{
  if (!v.is_array()) { throw ConfigError(what + " must be an array of [lo, hi] pairs"); }
  Box out;
  for (const auto & e : v) {
    if (!e.is_array() || e.size() != 2) { throw ConfigError(what + " must be an array of [lo, hi] pairs"); }
    out.emplace_back(number(e[0], what), number(e[1], what));
  }
  return out;
}

inline json to_json(const Vector & v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) { a.push_back(v(i)); }
  return a;
}

inline json columns_json(const Matrix & m)
{
  json a = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) { a.push_back(to_json(Vector(m.col(c)))); }
  return a;
}

inline json to_json(const Estimate & e)
{
  json j;
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["samples"] = e.samples;
  j["seed"] = e.seed;
  j["method"] = e.method;
  if (e.quad_error != 0.0) { j["quad_error"] = e.quad_error; }
  return j;
}

inline json to_json(const Verdict & v)
{
  json j;
  j["name"] = v.name;
  j["pass"] = v.pass;
  j["advisory"] = v.advisory;
  j["lhs"] = v.lhs;
  j["rhs"] = v.rhs;
  j["tolerance"] = v.tolerance;
  j["note"] = v.note;
  return j;
}

inline json to_json(const SphericalResult & r)
{
  json j;
  j["estimate"] = to_json(r.estimate);
  j["at_origin"] = to_json(r.at_origin);
  if (r.searched) { j["searched"] = to_json(*r.searched); }
  j["best_u"] = to_json(r.best_u);
  j["shortcut"] = r.shortcut;
  j["evaluations"] = r.evaluations;
  return j;
}

inline json to_json(const FedererResult & r)
{
  json j;
  j["estimate"] = to_json(r.estimate);
  j["degree"] = r.degree;
  j["chosen_radius"] = r.chosen_radius;
  j["trend_flat"] = r.trend_flat;
  j["trend"] = r.trend;
  j["trend_std_error"] = r.trend_std_error;
  j["density_factor"] = r.density_factor;
  json tr = json::array();
  for (const auto & t : r.trace) {
    json row;
    row["radius"] = t.radius;
    row["ratio"] = t.ratio;
    row["std_error"] = t.std_error;
    row["hits"] = t.hits;
    row["best_candidate"] = t.best_candidate;
    row["center_offset"] = t.center_offset;
    row["search_ratio"] = t.search_ratio;
    tr.push_back(row);
  }
  j["trace"] = tr;
  return j;
}

inline json to_json(const PointAnalysis & a)
{
  json j;
  j["y"] = to_json(a.y);
  j["p"] = to_json(a.p);
  j["degree"] = a.degree;
  j["q_n"] = a.q_n;
  j["sampled_max_degree"] = a.sampled_max_degree;
  j["regular"] = a.regular;
  j["characteristic"] = a.characteristic;
  j["class"] = to_string(a.classification);
  j["alpha"] = a.alpha;
  j["frame_horizontal"] = a.frame_horizontal;
  j["htangent_horizontal"] = a.htangent_horizontal;
  j["htangent_vertical"] = a.htangent_vertical;
  if (a.htangent) {
    j["htangent"] = columns_json(a.htangent->basis);
  } else {
    j["htangent"] = nullptr;
  }
  j["note"] = a.note;
  return j;
}

inline std::string fmt(double v)
{
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string short_fmt(double v)
{
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline std::string trace_csv(const FedererResult & r, const std::string & prefix_header = {}, const std::string & prefix = {})
{
  std::ostringstream os;
  if (!prefix_header.empty() || prefix.empty()) {
    os << prefix_header << "radius,ratio,std_error,hits,best_candidate,center_offset,search_ratio\n";
  }
  for (const auto & t : r.trace) {
    os << prefix << fmt(t.radius) << ',' << fmt(t.ratio) << ',' << fmt(t.std_error) << ',' << t.hits << ',' << t.best_candidate << ','
       << fmt(t.center_offset) << ',' << fmt(t.search_ratio) << '\n';
  }
  return os.str();
}

}  // namespace detail

/// One row per catalog group plus the distance kinds it supports.
inline json catalog_listing()
{
  json groups = json::array();
  for (const auto & name : catalog_names()) {
    const auto g = catalog_group(name);
    json row;
    row["name"] = name;
    row["q"] = g->dim();
    row["step"] = g->step();
    row["layers"] = g->layer_dims();
    row["Q"] = g->homogeneous_dimension();
    std::vector<int> qn;
    for (int n = 1; n <= g->dim(); ++n) { qn.push_back(q_n_max_degree(*g, n)); }
    row["Q_n"] = qn;
    std::vector<std::string> kinds = {"box", "euclidean_ball", "multiradial"};
    if (g->step() == 2) {
      try {
        (void)HomogeneousDistance::h_type_scale(*g);
        kinds.insert(kinds.begin() + 1, "cygan_koranyi");
      } catch (const ConfigError &) {
      }
    }
    row["distances"] = kinds;
    groups.push_back(row);
  }
  json dists = json::array();
  auto add = [&](const char * kind, const char * params, const char * convex) {
    json d;
    d["kind"] = kind;
    d["params"] = params;
    d["convex_ball"] = convex;
    dists.push_back(d);
  };
  add("box", "eps_1..eps_iota", "true");
  add("cygan_koranyi", "none (step two, H-type table)", "true");
  add("euclidean_ball", "r0", "true");
  add("multiradial", "phi_expr over r1..r_iota", "unknown");
  json out;
  out["groups"] = groups;
  out["distances"] = dists;
  return out;
}

inline std::string catalog_table()
{
  std::ostringstream os;
  os << std::left << std::setw(15) << "group" << std::setw(4) << "q" << std::setw(6) << "step" << std::setw(4) << "Q"
     << "Q_1..Q_q\n";
  const json listing = catalog_listing();
  for (const auto & row : listing["groups"]) {
    os << std::setw(15) << row["name"].get<std::string>() << std::setw(4) << row["q"].get<int>() << std::setw(6) << row["step"].get<int>()
       << std::setw(4) << row["Q"].get<int>();
    bool first = true;
    for (const auto & v : row["Q_n"]) {
      os << (first ? "" : " ") << v.get<int>();
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

/// Parsed document plus lazily built group, distance and submanifold.
class Context
{
public:
  explicit Context(json config) : config_(std::move(config))
  {
    if (config_.contains("policy")) {
      detail::check_keys(config_["policy"], {"rel_tol"}, "policy");
      if (config_["policy"].contains("rel_tol")) { policy_.rel_tol = detail::number(config_["policy"]["rel_tol"], "policy.rel_tol"); }
    }
  }

  [[nodiscard]] const json & config() const { return config_; }
  [[nodiscard]] const NumericPolicy & policy() const { return policy_; }
  [[nodiscard]] bool has(const char * key) const { return config_.contains(key); }

  GroupPtr group()
  {
    if (!group_) {
      if (!config_.contains("group")) { throw ConfigError("this task needs a 'group'"); }
      group_ = load_group(nlohmann::json::parse(config_["group"].dump()));
    }
    return group_;
  }

  const HomogeneousDistance & distance()
  {
    if (!distance_) {
      if (!config_.contains("distance")) { throw ConfigError("this task needs a 'distance'"); }
      const auto & d = config_["distance"];
      const auto kind = d["kind"].get<std::string>();
      std::vector<double> params;
      if (d.contains("params")) {
        const Vector v = detail::vector_of(d["params"], "distance.params");
        params.assign(v.data(), v.data() + v.size());
      }
      const auto g = group();
      if (kind == "box") {
        if (params.empty()) { params.assign(static_cast<std::size_t>(g->step()), 1.0); }
        distance_ = HomogeneousDistance::box(g, params);
      } else if (kind == "cygan_koranyi") {
        distance_ = HomogeneousDistance::cygan_koranyi(g);
      } else if (kind == "euclidean_ball") {
        distance_ = HomogeneousDistance::euclidean_ball(g, params.empty() ? 1.0 : params[0]);
      } else {
        if (!d.contains("phi_expr")) { throw ConfigError("multiradial distance needs 'phi_expr'"); }
        distance_ = HomogeneousDistance::multiradial(g, d["phi_expr"].get<std::string>());
      }
    }
    return *distance_;
  }

  const ParamMap & submanifold()
  {
    if (!submanifold_) {
      if (!config_.contains("submanifold")) { throw ConfigError("this task needs a 'submanifold'"); }
      const auto & s = config_["submanifold"];
      const int n = s["n"].get<int>();
      Box domain = s.contains("domain") ? detail::box_of(s["domain"], "submanifold.domain") : Box(static_cast<std::size_t>(n), {-1.0, 1.0});
      submanifold_ = parse_parametrization(group(), s["exprs"].get<std::string>(), n, std::move(domain));
    }
    return *submanifold_;
  }

private:
  json config_;
  NumericPolicy policy_;
  GroupPtr group_;
  std::optional<HomogeneousDistance> distance_;
  std::optional<ParamMap> submanifold_;
};

/**
 * @brief Structural validation of the whole document, before any computation.
 *
 * Returns the task list: `tasks` entries, or the `task` / `opts` shorthand.
 */
inline std::vector<json> validate(const json & config)
{
  detail::check_keys(config, {"description", "group", "distance", "submanifold", "tasks", "task", "opts", "seed", "policy"}, "config");
  if (config.contains("seed") && !config["seed"].is_number_unsigned()) { throw ConfigError("seed must be a nonnegative integer"); }
  if (config.contains("group")) {
    const auto & g = config["group"];
    if (g.is_object()) {
      detail::check_keys(g, {"name", "layers", "brackets"}, "group");
    } else if (!g.is_string()) {
      throw ConfigError("group must be a catalog name or an object");
    }
  }
  if (config.contains("distance")) {
    const auto & d = config["distance"];
    detail::check_keys(d, {"kind", "params", "phi_expr"}, "distance");
    static const std::set<std::string> kinds = {"box", "cygan_koranyi", "euclidean_ball", "multiradial"};
    if (!d.contains("kind") || !d["kind"].is_string() || kinds.count(d["kind"].get<std::string>()) == 0) {
      throw ConfigError("distance.kind must be one of box, cygan_koranyi, euclidean_ball, multiradial");
    }
    if (d.contains("phi_expr") && !d["phi_expr"].is_string()) { throw ConfigError("distance.phi_expr must be a string"); }
  }
  if (config.contains("submanifold")) {
    const auto & s = config["submanifold"];
    detail::check_keys(s, {"n", "exprs", "domain"}, "submanifold");
    if (!s.contains("n") || !s["n"].is_number_integer()) { throw ConfigError("submanifold.n must be an integer"); }
    if (!s.contains("exprs") || !s["exprs"].is_string()) { throw ConfigError("submanifold.exprs must be a string"); }
    if (s.contains("domain")) { (void)detail::box_of(s["domain"], "submanifold.domain"); }
  }
  if (config.contains("policy")) { detail::check_keys(config["policy"], {"rel_tol"}, "policy"); }
  if (config.contains("tasks") && (config.contains("task") || config.contains("opts"))) {
    throw ConfigError("use either 'tasks' or 'task'/'opts', not both");
  }
  std::vector<json> tasks;
  if (config.contains("tasks")) {
    if (!config["tasks"].is_array()) { throw ConfigError("tasks must be an array"); }
    for (const auto & t : config["tasks"]) { tasks.push_back(t); }
  } else if (config.contains("task")) {
    json t = config.contains("opts") ? config["opts"] : json::object();
    if (!t.is_object()) { throw ConfigError("opts must be an object"); }
    t["task"] = config["task"];
    tasks.push_back(t);
  } else if (config.contains("opts")) {
    throw ConfigError("'opts' needs a 'task'");
  }
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto where = "task " + std::to_string(k);
    const auto & t = tasks[k];
    if (!t.is_object() || !t.contains("task") || !t["task"].is_string()) { throw ConfigError(where + " needs a 'task' name"); }
    const auto name = t["task"].get<std::string>();
    const auto it = task_keys().find(name);
    if (it == task_keys().end()) { throw ConfigError(where + ": unknown task '" + name + "'"); }
    auto allowed = it->second;
    allowed.insert({"task", "seed", "samples"});
    detail::check_keys(t, allowed, where + " (" + name + ")");
    if (t.contains("seed") && !t["seed"].is_number_unsigned()) { throw ConfigError(where + ": seed must be a nonnegative integer"); }
    if (t.contains("samples") && !t["samples"].is_number_unsigned()) { throw ConfigError(where + ": samples must be a positive integer"); }
  }
  return tasks;
}

struct TaskResult
{
  json result = json::object();
  std::vector<Verdict> verdicts;
  std::string csv;
  std::string headline;
};

namespace detail {

struct TaskEnv
{
  Context & ctx;
  const json & opts;
  std::uint64_t seed;
  std::optional<std::size_t> samples_override;

  [[nodiscard]] std::size_t samples(std::size_t fallback) const
  {
    if (samples_override) { return *samples_override; }
    return opts.contains("samples") ? opts["samples"].get<std::size_t>() : fallback;
  }
  template<typename T>
  T get(const char * key, T fallback) const
  {
    if (!opts.contains(key)) { return fallback; }
    try {
      return opts[key].get<T>();
    } catch (const nlohmann::json::exception &) {
      throw ConfigError(std::string("option '") + key + "' has the wrong type");
    }
  }
};

inline Vector point_option(TaskEnv & env, const ParamMap & s, const char * key = "point")
{
  if (!env.opts.contains(key)) {
    Vector c(s.n());
    for (int i = 0; i < s.n(); ++i) { c(i) = 0.5 * (s.domain()[static_cast<std::size_t>(i)].first + s.domain()[static_cast<std::size_t>(i)].second); }
    return c;
  }
  const Vector y = vector_of(env.opts[key], key);
  if (y.size() != s.n()) { throw BadDimensions(std::string(key) + " needs " + std::to_string(s.n()) + " coordinates"); }
  return y;
}

inline std::optional<Subspace> subspace_option(TaskEnv & env, const GroupPtr & g)
{
  if (env.opts.contains("subspace")) {
    const auto & cols = env.opts["subspace"];
    if (!cols.is_array() || cols.empty()) { throw ConfigError("subspace must be a non-empty list of column vectors"); }
    Matrix b(g->dim(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const Vector v = vector_of(cols[c], "subspace column");
      if (v.size() != g->dim()) { throw BadDimensions("subspace columns need q entries"); }
      b.col(static_cast<Eigen::Index>(c)) = v;
    }
    return Subspace(g, b);
  }
  if (env.opts.contains("coordinates")) {
    auto idx = ints_of(env.opts["coordinates"], "coordinates");
    for (int & i : idx) {
      if (i < 1 || i > g->dim()) { throw BadDimensions("coordinates are 1-based indices up to q"); }
      --i;
    }
    return coordinate_subspace(g, idx);
  }
  return std::nullopt;
}

inline Subspace tangent_at(const ParamMap & s, const Vector & y, const NumericPolicy & policy)
{
  const auto pa = classify_point(s, y, policy);
  if (!pa.htangent) { throw NonSimpleProjection("no homogeneous tangent space at the point"); }
  return *pa.htangent;
}

inline SphericalOptions spherical_options(const TaskEnv & env, std::size_t default_samples)
{
  SphericalOptions so;
  so.samples = env.samples(default_samples);
  so.seed = env.seed;
  so.starts = env.get<int>("starts", so.starts);
  so.refine_iters = env.get<int>("refine_iters", so.refine_iters);
  so.search_samples = env.get<std::size_t>("search_samples", so.search_samples);
  so.force_search = env.get<bool>("force_search", false);
  return so;
}

inline FedererOptions federer_options(const TaskEnv & env)
{
  FedererOptions fo;
  fo.samples = env.samples(fo.samples);
  fo.seed = env.seed;
  if (env.opts.contains("radii")) {
    const Vector r = vector_of(env.opts["radii"], "radii");
    fo.radii.assign(r.data(), r.data() + r.size());
  }
  fo.centers_per_radius = env.get<int>("centers", fo.centers_per_radius);
  fo.min_hits = env.get<std::size_t>("min_hits", fo.min_hits);
  fo.flat_rel = env.get<double>("flat_rel", fo.flat_rel);
  return fo;
}

/// CaseNotCovered style advisory for a probe, or "" when the theorem applies.
inline std::string probe_advisory(const ParamMap & s, const PointAnalysis & pa)
{
  if (!pa.regular) { return "point is not algebraically regular"; }
  if (pa.characteristic) { return "point has degree below the degree of the submanifold"; }
  const bool covered = pa.htangent_horizontal || s.group()->step() == 2 || s.n() == 1 || pa.degree == pa.q_n;
  if (!covered) { return "CaseNotCovered: none of the horizontal, step-two, curve or transversal cases applies"; }
  return {};
}

inline TaskResult run_validate_group(TaskEnv & env)
{
  TaskResult out;
  const auto g = env.ctx.group();
  json & r = out.result;
  r["name"] = g->name();
  r["q"] = g->dim();
  r["step"] = g->step();
  r["layers"] = g->layer_dims();
  r["degrees"] = g->degrees();
  r["Q"] = g->homogeneous_dimension();
  std::vector<int> qn;
  for (int n = 1; n <= g->dim(); ++n) { qn.push_back(q_n_max_degree(*g, n)); }
  r["Q_n"] = qn;
  r["brackets"] = g->brackets().size();
  r["bch_terms"] = g->plan().terms.size();
  out.headline = g->name() + ": q=" + std::to_string(g->dim()) + " step=" + std::to_string(g->step()) +
                 " Q=" + std::to_string(g->homogeneous_dimension());
  return out;
}

inline TaskResult run_catalog(TaskEnv &)
{
  TaskResult out;
  out.result = catalog_listing();
  out.headline = std::to_string(out.result["groups"].size()) + " groups";
  return out;
}

inline TaskResult run_analyze_point(TaskEnv & env)
{
  TaskResult out;
  const auto & s = env.ctx.submanifold();
  std::vector<Vector> pts;
  if (env.opts.contains("points")) {
    for (const auto & p : env.opts["points"]) {
      const Vector y = vector_of(p, "points");
      if (y.size() != s.n()) { throw BadDimensions("points need " + std::to_string(s.n()) + " coordinates"); }
      pts.push_back(y);
    }
  } else {
    pts.push_back(point_option(env, s));
  }
  json arr = json::array();
  std::ostringstream head;
  for (const auto & y : pts) {
    const auto pa = classify_point(s, y, env.ctx.policy());
    arr.push_back(to_json(pa));
    head << (arr.size() > 1 ? ", " : "") << to_string(pa.classification) << "(degree " << pa.degree << ")";
  }
  out.result["points"] = arr;
  out.headline = head.str();
  return out;
}

inline TaskResult run_degree_map(TaskEnv & env)
{
  TaskResult out;
  const auto & s = env.ctx.submanifold();
  const auto grid = env.opts.contains("grid") ? ints_of(env.opts["grid"], "grid") : default_grid(s.n());
  if (static_cast<int>(grid.size()) != s.n()) { throw BadDimensions("grid needs one count per parameter"); }
  const auto dm = degree_map(s, grid, env.ctx.policy());
  std::map<std::string, std::size_t> counts;
  for (const auto & c : dm.classes) { ++counts[c]; }
  out.result["grid"] = grid;
  out.result["cells"] = dm.points.size();
  out.result["max_degree"] = dm.max_degree;
  out.result["low_degree_fraction"] = dm.low_degree_fraction;
  json cj = json::object();
  for (const auto & [k, v] : counts) { cj[k] = v; }
  out.result["class_counts"] = cj;
  std::ostringstream os;
  for (int i = 0; i < s.n(); ++i) { os << 'y' << (i + 1) << ','; }
  os << "degree,class\n";
  for (std::size_t i = 0; i < dm.points.size(); ++i) {
    for (int k = 0; k < s.n(); ++k) { os << fmt(dm.points[i](k)) << ','; }
    os << dm.degrees[i] << ',' << dm.classes[i] << '\n';
  }
  out.csv = os.str();
  out.headline = "max degree " + std::to_string(dm.max_degree) + ", low-degree fraction " + short_fmt(dm.low_degree_fraction);
  return out;
}

inline TaskResult run_spherical_factor(TaskEnv & env)
{
  TaskResult out;
  const auto & d = env.ctx.distance();
  const auto g = env.ctx.group();
  auto sub = subspace_option(env, g);
  if (!sub) {
    const auto & s = env.ctx.submanifold();
    sub = tangent_at(s, point_option(env, s), env.ctx.policy());
  }
  const auto cls = classify_subspace(*sub);
  const auto so = spherical_options(env, 200000);
  const auto res = spherical_factor(d, *sub, so);
  out.result["subspace"] = columns_json(sub->basis);
  out.result["vertical"] = cls.vertical;
  out.result["horizontal"] = cls.horizontal;
  out.result["distance"] = to_string(d.kind());
  out.result["beta"] = to_json(res);
  if (res.searched && res.shortcut == "convex-ball") {
    Verdict v;
    v.name = "searched<=origin+3sigma";
    v.lhs = res.searched->value;
    v.rhs = res.at_origin.value;
    v.tolerance = 3.0 * std::hypot(res.searched->std_error, res.at_origin.std_error);
    v.pass = v.lhs <= v.rhs + v.tolerance;
    v.note = "convex ball with vertical section: the maximizing centre is the origin";
    out.verdicts.push_back(v);
  }
  out.headline = "beta = " + short_fmt(res.estimate.value) + " +- " + short_fmt(res.estimate.std_error) +
                 (res.shortcut.empty() ? std::string(" (searched)") : " (" + res.shortcut + ")");
  return out;
}

inline TaskResult run_federer_density(TaskEnv & env)
{
  TaskResult out;
  const auto & s = env.ctx.submanifold();
  const auto & d = env.ctx.distance();
  const Vector y = point_option(env, s);
  const auto pa = classify_point(s, y, env.ctx.policy());
  const auto advisory = probe_advisory(s, pa);
  out.result["point"] = to_json(pa);
  if (!pa.htangent) { throw NonSimpleProjection("no homogeneous tangent space at the point"); }
  SphericalOptions so = spherical_options(env, 200000);
  so.samples = env.get<std::size_t>("beta_samples", so.samples);
  const auto beta = spherical_factor(d, *pa.htangent, so);
  const auto theta = federer_density(s, d, y, federer_options(env), env.ctx.policy());
  out.result["beta"] = to_json(beta);
  out.result["theta"] = to_json(theta);
  const double tol = env.get<double>("tolerance", 0.05);
  Verdict v;
  v.name = "theta=beta";
  v.lhs = theta.estimate.value;
  v.rhs = beta.estimate.value * theta.density_factor;
  v.tolerance = tol;
  v.pass = std::abs(v.lhs - v.rhs) <= tol * std::abs(v.rhs);
  v.advisory = !advisory.empty();
  v.note = advisory.empty() ? "relative tolerance" : advisory;
  out.verdicts.push_back(v);
  Verdict f;
  f.name = "trace-flat";
  f.lhs = theta.trend;
  f.rhs = theta.trend_std_error;
  f.tolerance = 3.0;
  f.pass = theta.trend_flat;
  f.advisory = !advisory.empty();
  f.note = "linear trend over the chosen two-decade window within 3 sigma plus flat_rel";
  out.verdicts.push_back(f);
  out.csv = trace_csv(theta);
  out.headline = "theta = " + short_fmt(v.lhs) + ", beta = " + short_fmt(v.rhs);
  return out;
}

inline TaskResult run_area_check(TaskEnv & env)
{
  TaskResult out;
  const auto & s = env.ctx.submanifold();
  const auto & d = env.ctx.distance();
  const Box region = env.opts.contains("region") ? box_of(env.opts["region"], "region") : s.domain();
  std::vector<Vector> probes;
  if (env.opts.contains("probes")) {
    for (const auto & p : env.opts["probes"]) {
      const Vector y = vector_of(p, "probes");
      if (y.size() != s.n()) { throw BadDimensions("probes need " + std::to_string(s.n()) + " coordinates"); }
      probes.push_back(y);
    }
  } else {
    probes.push_back(point_option(env, s));
  }
  AreaOptions ao;
  if (env.opts.contains("quadrature")) {
    const auto & qj = env.opts["quadrature"];
    check_keys(qj, {"kind", "resolution", "samples"}, "quadrature");
    const auto kind = qj.value("kind", std::string("grid"));
    if (kind != "grid" && kind != "monte-carlo") { throw ConfigError("quadrature.kind must be grid or monte-carlo"); }
    ao.quad.kind = kind == "grid" ? Quadrature::Kind::Grid : Quadrature::Kind::MonteCarlo;
    ao.quad.resolution = qj.value("resolution", 0);
    ao.quad.samples = qj.value("samples", ao.quad.samples);
  }
  ao.quad.seed = env.seed;
  ao.spherical = spherical_options(env, 200000);
  ao.spherical.samples = env.get<std::size_t>("beta_samples", ao.spherical.samples);
  ao.federer = federer_options(env);
  ao.tolerance = env.get<double>("tolerance", ao.tolerance);
  ao.covering_delta = env.get<double>("covering_delta", 0.0);
  if (env.opts.contains("cloud_grid")) { ao.cloud_grid = ints_of(env.opts["cloud_grid"], "cloud_grid"); }
  const auto rep = area_check(s, d, region, probes, ao, env.ctx.policy());
  out.result["mu"] = to_json(rep.mu);
  out.result["degree"] = rep.degree;
  json pj = json::array();
  std::ostringstream csv;
  csv << "probe,radius,ratio,std_error,hits,best_candidate,center_offset,search_ratio\n";
  for (std::size_t k = 0; k < rep.probes.size(); ++k) {
    const auto & pr = rep.probes[k];
    json p;
    p["y"] = to_json(pr.y);
    p["class"] = pr.classification;
    p["covered"] = pr.covered;
    p["advisory"] = pr.advisory;
    if (pr.beta) { p["beta"] = to_json(*pr.beta); }
    if (pr.theta) {
      p["theta"] = to_json(*pr.theta);
      csv << trace_csv(*pr.theta, "", std::to_string(k) + ",");
    }
    pj.push_back(p);
  }
  out.result["probes"] = pj;
  if (rep.covering) { out.result["covering"] = to_json(*rep.covering); }
  out.verdicts = rep.verdicts;
  out.csv = csv.str();
  out.headline = "mu = " + short_fmt(rep.mu.value) + " (degree " + std::to_string(rep.degree) + ")";
  return out;
}

inline TaskResult run_coarea_check(TaskEnv & env)
{
  TaskResult out;
  const auto g = env.ctx.group();
  if (!env.opts.contains("f") || !env.opts["f"].is_string()) { throw ConfigError("coarea-check needs 'f'"); }
  if (!env.opts.contains("box")) { throw ConfigError("coarea-check needs 'box'"); }
  const auto f = env.opts["f"].get<std::string>();
  const Box box = box_of(env.opts["box"], "box");
  std::vector<std::string> us;
  if (!env.opts.contains("u")) {
    us.emplace_back("1");
  } else if (env.opts["u"].is_string()) {
    us.push_back(env.opts["u"].get<std::string>());
  } else {
    for (const auto & u : env.opts["u"]) {
      if (!u.is_string()) { throw ConfigError("u must be a string or a list of strings"); }
      us.push_back(u.get<std::string>());
    }
  }
  CoareaOptions co;
  co.resolution = env.get<int>("resolution", co.resolution);
  co.t_slices = env.get<int>("t_slices", co.t_slices);
  co.tolerance = env.get<double>("tolerance", co.tolerance);
  json arr = json::array();
  std::ostringstream head;
  for (const auto & u : us) {
    const auto rep = coarea_check(g, f, u, box, co);
    json r;
    r["u"] = u;
    r["graph_variable"] = rep.graph_variable + 1;
    r["lhs"] = to_json(rep.lhs);
    r["rhs"] = to_json(rep.rhs);
    arr.push_back(r);
    Verdict v = rep.verdict;
    v.name = "coarea[u=" + u + "]";
    out.verdicts.push_back(v);
    head << (arr.size() > 1 ? ", " : "") << "u=" << u << ": " << short_fmt(rep.lhs.value) << " vs " << short_fmt(rep.rhs.value);
  }
  out.result["f"] = f;
  out.result["runs"] = arr;
  out.headline = head.str();
  return out;
}

inline TaskResult run_blowup_check(TaskEnv & env)
{
  TaskResult out;
  const auto & s = env.ctx.submanifold();
  const Vector y = point_option(env, s);
  Vector ray = Vector::Ones(s.n());
  if (env.opts.contains("ray")) {
    ray = vector_of(env.opts["ray"], "ray");
    if (ray.size() != s.n()) { throw BadDimensions("ray needs " + std::to_string(s.n()) + " coordinates"); }
  }
  const auto res = blowup_rates(s, y, ray, env.ctx.policy(), env.get<int>("levels", 13));
  out.result["covered"] = res.covered;
  out.result["advisory"] = res.advisory;
  out.result["scales"] = res.scales;
  json cj = json::array();
  for (const auto & c : res.coords) {
    json r;
    r["index"] = c.index + 1;
    r["degree"] = c.degree;
    r["in_tangent"] = c.in_tangent;
    r["slope"] = c.slope;
    r["identically_zero"] = c.identically_zero;
    r["pass"] = c.pass;
    r["ratios"] = c.ratios;
    cj.push_back(r);
  }
  out.result["coords"] = cj;
  Verdict v;
  v.name = "blowup-rates";
  v.pass = res.pass;
  v.advisory = !res.covered;
  v.note = res.covered ? "in-tangent slopes 1 within 0.1, other coordinates decay" : res.advisory;
  out.verdicts.push_back(v);
  std::ostringstream os;
  os << "scale";
  for (const auto & c : res.coords) { os << ",c" << (c.index + 1); }
  os << '\n';
  for (std::size_t l = 0; l < res.scales.size(); ++l) {
    os << fmt(res.scales[l]);
    for (const auto & c : res.coords) { os << ',' << (l < c.ratios.size() ? fmt(c.ratios[l]) : std::string()); }
    os << '\n';
  }
  out.csv = os.str();
  out.headline = res.pass ? "rates confirmed" : "rates not confirmed";
  return out;
}

inline TaskResult run_prop_suite(TaskEnv & env)
{
  TaskResult out;
  std::vector<GroupPtr> groups;
  if (env.opts.contains("groups")) {
    for (const auto & gj : env.opts["groups"]) { groups.push_back(load_group(nlohmann::json::parse(gj.dump()))); }
  } else if (env.ctx.has("group")) {
    groups.push_back(env.ctx.group());
  } else {
    groups = {abelian(3), heisenberg(1), heisenberg(2), engel(), free2(3)};
  }
  const std::size_t samples = env.samples(10000);
  json arr = json::array();
  for (const auto & g : groups) {
    const auto res = group_law_residuals(g, samples, env.seed);
    int mismatches = 0;
    for (int n = 1; n <= g->dim(); ++n) { mismatches += q_n_max_degree(*g, n) != q_n_brute_force(*g, n) ? 1 : 0; }
    json r;
    r["group"] = g->name();
    r["samples"] = samples;
    r["associativity"] = res.associativity;
    r["inverse"] = res.inverse;
    r["dilation"] = res.dilation;
    r["frame_homogeneity"] = res.frame_homogeneity;
    r["q_n_mismatches"] = mismatches;
    arr.push_back(r);
    Verdict v;
    v.name = "group-law@" + g->name();
    v.lhs = res.worst();
    v.rhs = 1e-9;
    v.tolerance = 1e-9;
    v.pass = res.worst() < 1e-9;
    v.note = "max relative residual of associativity, inverse, dilation and frame homogeneity";
    out.verdicts.push_back(v);
    Verdict qv;
    qv.name = "q_n@" + g->name();
    qv.lhs = mismatches;
    qv.pass = mismatches == 0;
    qv.note = "closed form against brute force over index tuples";
    out.verdicts.push_back(qv);
  }
  out.result["groups"] = arr;
  if (env.ctx.has("distance") && env.get<bool>("axioms", true)) {
    const auto & d = env.ctx.distance();
    const auto ax = verify_distance_axioms(d, samples, env.seed);
    json a;
    a["distance"] = to_string(d.kind());
    a["samples"] = ax.samples;
    a["triangle_violations"] = ax.triangle_violations;
    a["worst_ratio"] = ax.worst_ratio;
    out.result["axioms"] = a;
    Verdict v;
    v.name = "triangle@" + to_string(d.kind());
    v.lhs = ax.worst_ratio;
    v.rhs = 1.0 + 1e-12;
    v.pass = ax.passed();
    v.note = "sampled; necessary, not sufficient";
    out.verdicts.push_back(v);
  }
  out.headline = std::to_string(groups.size()) + " groups";
  return out;
}

inline TaskResult run_concavity_check(TaskEnv & env)
{
  TaskResult out;
  const auto body_name = env.get<std::string>("body", "cube");
  ConvexBody body;
  if (body_name == "metric-ball") {
    body = metric_ball_body(env.ctx.distance());
  } else {
    const int q = env.opts.contains("dim") ? env.get<int>("dim", 3) : (env.ctx.has("group") ? env.ctx.group()->dim() : 3);
    if (body_name == "cube") {
      body = cube_body(q);
    } else if (body_name == "ball") {
      body = ellipsoid_body(std::vector<double>(static_cast<std::size_t>(q), 1.0));
    } else if (body_name == "ellipsoid") {
      const Vector a = vector_of(env.opts.value("axes", json::array()), "axes");
      if (a.size() < 2) { throw ConfigError("ellipsoid needs 'axes'"); }
      body = ellipsoid_body(std::vector<double>(a.data(), a.data() + a.size()));
    } else {
      throw ConfigError("body must be cube, ball, ellipsoid or metric-ball");
    }
  }
  const int q = body.dim;
  Matrix basis;
  if (env.opts.contains("coordinates")) {
    const auto idx = ints_of(env.opts["coordinates"], "coordinates");
    basis = Matrix::Zero(q, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
      if (idx[c] < 1 || idx[c] > q) { throw BadDimensions("coordinates are 1-based indices up to q"); }
      basis(idx[c] - 1, static_cast<Eigen::Index>(c)) = 1.0;
    }
  } else if (env.opts.contains("subspace")) {
    const auto & cols = env.opts["subspace"];
    basis = Matrix(q, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const Vector v = vector_of(cols[c], "subspace column");
      if (v.size() != q) { throw BadDimensions("subspace columns need q entries"); }
      basis.col(static_cast<Eigen::Index>(c)) = v;
    }
  } else {
    basis = Matrix::Identity(q, std::min(2, q - 1));
  }
  const auto rep = section_concavity_check(body, basis, env.get<std::size_t>("segments", 1000), env.samples(20000), env.seed);
  out.result["body"] = body.kind;
  out.result["dim"] = q;
  out.result["section_dim"] = basis.cols();
  out.result["segments"] = rep.segments;
  out.result["checks"] = rep.checks;
  out.result["violations"] = rep.violations;
  out.result["worst_z"] = rep.worst_z;
  out.result["samples_per_section"] = rep.samples_per_section;
  Verdict v;
  v.name = "concavity@" + body.kind;
  v.lhs = static_cast<double>(rep.violations);
  v.rhs = 0.0;
  v.tolerance = 3.0;
  v.pass = rep.passed();
  v.note = "violations beyond 3 sigma below the chord";
  out.verdicts.push_back(v);
  out.headline = body.kind + ": " + std::to_string(rep.violations) + " violations in " + std::to_string(rep.checks) + " checks";
  return out;
}

inline TaskResult run_translation_check(TaskEnv & env)
{
  TaskResult out;
  const auto g = env.ctx.group();
  const int q = g->dim();
  auto sub = subspace_option(env, g);
  const CounterRng rng(env.seed, 0x7e55);
  if (!sub) { sub = random_vertical_subspace(g, q - g->layer_dims()[0] + 1, rng, 0); }
  const int n = sub->dim();
  const auto pairs = env.get<std::size_t>("pairs", 100);
  const double spread = env.get<double>("spread", 1.5);
  const std::size_t samples = env.samples(20000);
  std::ostringstream csv;
  csv << "pair,original,original_std_error,translated,translated_std_error,z\n";
  double worst = 0.0;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    Vector p(q);
    for (int k = 0; k < q; ++k) { p(k) = spread * (2.0 * rng.uniform(i + 1, static_cast<std::uint64_t>(k)) - 1.0); }
    Vector lo(n);
    Vector hi(n);
    for (int k = 0; k < n; ++k) {
      lo(k) = -rng.uniform(i + 1, 100 + static_cast<std::uint64_t>(k));
      hi(k) = lo(k) + 0.25 + 0.75 * rng.uniform(i + 1, 200 + static_cast<std::uint64_t>(k));
    }
    const auto rep = vertical_translation_check(*sub, p, lo, hi, samples, env.seed + i);
    worst = std::max(worst, rep.z);
    failures += rep.passed() ? 0 : 1;
    csv << i << ',' << fmt(rep.original.value) << ',' << fmt(rep.original.std_error) << ',' << fmt(rep.translated.value) << ','
        << fmt(rep.translated.std_error) << ',' << fmt(rep.z) << '\n';
  }
  out.result["subspace"] = columns_json(sub->basis);
  out.result["pairs"] = pairs;
  out.result["samples"] = samples;
  out.result["max_z"] = worst;
  out.result["failures"] = failures;
  Verdict v;
  v.name = "translation@" + g->name();
  v.lhs = worst;
  v.rhs = 3.0;
  v.tolerance = 3.0;
  v.pass = failures == 0;
  v.note = "max z over pairs";
  out.verdicts.push_back(v);
  out.csv = csv.str();
  out.headline = "max z " + short_fmt(worst) + " over " + std::to_string(pairs) + " pairs";
  return out;
}

inline TaskResult run_beta_constancy(TaskEnv & env)
{
  TaskResult out;
  const auto & d = env.ctx.distance();
  const auto g = d.group();
  const int q = g->dim();
  const int dim = env.get<int>("dim", q - g->layer_dims()[0] + 1);
  const auto count = env.get<std::size_t>("count", 8);
  const CounterRng rng(env.seed, 0xbe7a);
  std::vector<Subspace> family;
  for (std::size_t i = 0; i < count; ++i) { family.push_back(random_vertical_subspace(g, dim, rng, i)); }
  const auto rep = beta_constancy_check(d, family, spherical_options(env, 100000));
  json betas = json::array();
  std::ostringstream csv;
  csv << "member,beta,std_error\n";
  for (std::size_t i = 0; i < rep.betas.size(); ++i) {
    betas.push_back(to_json(rep.betas[i]));
    csv << i << ',' << fmt(rep.betas[i].value) << ',' << fmt(rep.betas[i].std_error) << '\n';
  }
  out.result["distance"] = to_string(d.kind());
  out.result["dim"] = dim;
  out.result["betas"] = betas;
  out.result["spread"] = rep.spread;
  out.result["max_pairwise_z"] = rep.max_pairwise_z;
  Verdict v;
  v.name = "beta-constancy";
  v.lhs = rep.max_pairwise_z;
  v.rhs = 3.0;
  v.tolerance = 3.0;
  v.pass = rep.passed();
  v.note = "max pairwise z over the family";
  out.verdicts.push_back(v);
  out.csv = csv.str();
  out.headline = "max pairwise z " + short_fmt(rep.max_pairwise_z);
  return out;
}

inline TaskResult dispatch(const std::string & name, TaskEnv & env)
{
  if (name == "validate-group") { return run_validate_group(env); }
  if (name == "catalog") { return run_catalog(env); }
  if (name == "analyze-point") { return run_analyze_point(env); }
  if (name == "degree-map") { return run_degree_map(env); }
  if (name == "spherical-factor") { return run_spherical_factor(env); }
  if (name == "federer-density") { return run_federer_density(env); }
  if (name == "area-check") { return run_area_check(env); }
  if (name == "coarea-check") { return run_coarea_check(env); }
  if (name == "blowup-check") { return run_blowup_check(env); }
  if (name == "prop-suite") { return run_prop_suite(env); }
  if (name == "concavity-check") { return run_concavity_check(env); }
  if (name == "translation-check") { return run_translation_check(env); }
  if (name == "beta-constancy") { return run_beta_constancy(env); }
  throw ConfigError("unknown task '" + name + "'");
}

}  // namespace detail

/**
 * @brief Runs the tasks of `config` selected by `opt.command`.
 *
 * "run" executes every task; a task name executes the matching tasks, or one task with
 * default options when the document has none of that kind.  Exit code 0 when every
 * non-advisory verdict passes, 1 on a failed verdict or task error, 2 on a config error.
 */
inline RunOutput run(const json & config, const RunOptions & opt)
{
  RunOutput out;
  json & rep = out.report;
  rep["schema"] = kSchema;
  rep["command"] = opt.command;
  std::vector<json> tasks;
  try {
    tasks = validate(config);
    if (opt.command != "run") {
      if (task_keys().count(opt.command) == 0) { throw ConfigError("unknown command '" + opt.command + "'"); }
      std::vector<json> picked;
      for (auto & t : tasks) {
        if (t["task"] == opt.command) { picked.push_back(t); }
      }
      if (picked.empty()) { picked.push_back(json{{"task", opt.command}}); }
      tasks = std::move(picked);
    } else if (tasks.empty()) {
      throw ConfigError("the document has no tasks");
    }
  } catch (const Error & e) {
    rep["status"] = "config-error";
    rep["error"] = {{"kind", e.kind()}, {"message", e.what()}};
    rep["passed"] = false;
    out.summary = std::string("config error (") + e.kind() + "): " + e.what() + "\n";
    out.exit_code = 2;
    return out;
  }

  const std::uint64_t global_seed = opt.seed ? *opt.seed : config.value("seed", std::uint64_t{1});
  rep["seed"] = global_seed;
  if (opt.samples) { rep["samples_override"] = *opt.samples; }
  rep["config"] = config;
  Context ctx(config);
  json results = json::array();
  bool passed = true;
  std::ostringstream summary;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto & t = tasks[k];
    const auto name = t["task"].get<std::string>();
    const std::uint64_t seed = t.contains("seed") ? t["seed"].get<std::uint64_t>() : global_seed;
    json tj;
    tj["index"] = k;
    tj["task"] = name;
    tj["seed"] = seed;
    detail::TaskEnv env{ctx, t, seed, opt.samples};
    try {
      auto tr = detail::dispatch(name, env);
      tj["status"] = "ok";
      tj["result"] = std::move(tr.result);
      json vj = json::array();
      std::size_t failed = 0;
      std::size_t advisory = 0;
      for (const auto & v : tr.verdicts) {
        vj.push_back(detail::to_json(v));
        if (v.advisory) {
          ++advisory;
        } else if (!v.pass) {
          ++failed;
        }
      }
      tj["verdicts"] = vj;
      passed = passed && failed == 0;
      if (!tr.csv.empty()) {
        const auto file = "task" + std::to_string(k) + "_" + name + ".csv";
        tj["csv"] = file;
        out.csv.push_back({file, tr.csv});
      }
      summary << '[' << k << "] " << name << ": " << (failed == 0 ? "ok" : "FAILED") << " - " << tr.headline;
      if (!tr.verdicts.empty()) {
        summary << " (" << tr.verdicts.size() - failed - advisory << " pass, " << failed << " fail, " << advisory << " advisory)";
      }
      summary << '\n';
      for (const auto & v : tr.verdicts) {
        summary << "    " << (v.advisory ? "ADVISORY" : (v.pass ? "PASS" : "FAIL")) << ' ' << v.name << ": " << detail::short_fmt(v.lhs)
                << " vs " << detail::short_fmt(v.rhs);
        if (!v.note.empty()) { summary << " [" << v.note << ']'; }
        summary << '\n';
      }
    } catch (const Error & e) {
      tj["status"] = "error";
      tj["error"] = {{"kind", e.kind()}, {"message", e.what()}};
      passed = false;
      summary << '[' << k << "] " << name << ": ERROR " << e.kind() << ": " << e.what() << '\n';
    } catch (const std::exception & e) {
      tj["status"] = "error";
      tj["error"] = {{"kind", "InternalError"}, {"message", e.what()}};
      passed = false;
      summary << '[' << k << "] " << name << ": ERROR " << e.what() << '\n';
    }
    results.push_back(std::move(tj));
  }
  rep["tasks"] = std::move(results);
  rep["status"] = passed ? "passed" : "failed";
  rep["passed"] = passed;
  summary << (passed ? "all verdicts passed\n" : "some verdicts failed or tasks errored\n");
  out.summary = summary.str();
  out.exit_code = passed ? 0 : 1;
  return out;
}

/// Reads a config file; unreadable or malformed JSON is a ConfigError.
inline json read_config(const std::string & path)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("cannot read config '" + path + "'"); }
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

/// Writes report.json, the CSV traces and summary.txt into `dir`.
inline void write_artifacts(const RunOutput & out, const std::filesystem::path & dir)
{
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "report.json");
    f << out.report.dump(2) << '\n';
  }
  for (const auto & c : out.csv) {
    std::ofstream f(dir / c.name);
    f << c.content;
  }
  std::ofstream f(dir / "summary.txt");
  f << out.summary;
}

}  // namespace nilarea::runner
