#include "nilarea/runner.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <iostream>

namespace {

std::string utc_timestamp()
{
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Flags
{
  std::string config;
  std::string out = "nilarea_out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  unsigned workers = 1;
  bool quiet = false;
};

void add_flags(CLI::App * sub, Flags & f, bool config_required)
{
  auto * c = sub->add_option("--config", f.config, "JSON task document");
  if (config_required) { c->required()->check(CLI::ExistingFile); }
  sub->add_option("--seed", f.seed, "Overrides the document seed");
  sub->add_option("--out", f.out, "Output directory")->capture_default_str();
  sub->add_option("--samples", f.samples, "Overrides every task's Monte-Carlo sample count")->check(CLI::PositiveNumber);
  sub->add_option("--workers", f.workers, "Worker threads, 0 = all cores")->capture_default_str();
  sub->add_flag("--quiet", f.quiet, "Print nothing on success");
}

}  // namespace

int main(int argc, char ** argv)
{
  using nilarea::runner::json;
  CLI::App app{"Calculus on graded nilpotent groups and area-formula checks"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "Run every task in the document"},
      {"validate-group", "Validate a group definition and print its invariants"},
      {"catalog", "List built-in groups, Q_n tables and distances"},
      {"analyze-point", "Degree, homogeneous tangent and class at parameter points"},
      {"degree-map", "Pointwise degree over a parameter grid"},
      {"spherical-factor", "Spherical factor of a subspace or of the tangent at a point"},
      {"federer-density", "Federer density at a point against the spherical factor"},
      {"area-check", "Intrinsic measure, spherical factors and densities at probes"},
      {"coarea-check", "Coarea balance for a graph-type level function"},
      {"blowup-check", "Blow-up rates of the chart at a point"},
      {"prop-suite", "Group-law residuals, Q_n oracle and distance axioms"},
      {"concavity-check", "Concavity of section areas of a convex body"},
      {"translation-check", "Translation invariance of measure in a vertical subgroup"},
      {"beta-constancy", "Spherical factors across random vertical subgroups"},
  };
  for (const auto & [name, help] : commands) {
    add_flags(app.add_subcommand(name, help), flags, name != "catalog" && name != "prop-suite");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  nilarea::worker_count() = flags.workers;
  json config = json::object();
  nilarea::runner::RunOutput out;
  try {
    if (!flags.config.empty()) { config = nilarea::runner::read_config(flags.config); }
  } catch (const nilarea::Error & e) {
    std::cerr << "config error (" << e.kind() << "): " << e.what() << '\n';
    return 2;
  }
  if (command == "catalog" && flags.config.empty() && !flags.quiet) { std::cout << nilarea::runner::catalog_table(); }
  out = nilarea::runner::run(config, {command, flags.seed, flags.samples});

  try {
    nilarea::runner::write_artifacts(out, flags.out);
    json meta;
    meta["timestamp"] = utc_timestamp();
    meta["command"] = command;
    meta["config_path"] = flags.config;
    meta["workers"] = flags.workers;
    meta["report_schema"] = nilarea::runner::kSchema;
    std::ofstream(std::filesystem::path(flags.out) / "metadata.json") << meta.dump(2) << '\n';
  } catch (const std::exception & e) {
    std::cerr << "cannot write output to '" << flags.out << "': " << e.what() << '\n';
    return 2;
  }
  if (out.exit_code != 0 || !flags.quiet) { (out.exit_code == 0 ? std::cout : std::cerr) << out.summary; }
  return out.exit_code;
}
