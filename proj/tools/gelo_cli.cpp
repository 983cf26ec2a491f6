#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gelo/config.hpp"
#include "gelo/errors.hpp"
#include "gelo/pipelines.hpp"

namespace {

using Pipeline = std::function<gelo::Warnings(const gelo::AppConfig&, const std::filesystem::path&)>;

struct Options {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::string out_dir = ".";
};

gelo::AppConfig make_config(const Options& o) {
  if (!o.config.empty() && !o.preset.empty()) {
    throw gelo::ValidationError("give either --config or --preset, not both");
  }
  gelo::AppConfig c;
  if (!o.config.empty()) {
    c = gelo::load_config(o.config);
  } else if (!o.preset.empty()) {
    c = gelo::preset_config(o.preset);
  } else {
    throw gelo::ValidationError("a --config file or a --preset is required");
  }
  if (o.seed) {
    c.seed = *o.seed;
    if (c.simulation) c.simulation->seed = *o.seed;
  }
  if (o.realizations) {
    if (*o.realizations == 0) throw gelo::ValidationError("realizations must be >= 1");
    c.realizations = *o.realizations;
  }
  return c;
}

int run(const Pipeline& pipeline, const Options& o) {
  try {
    const auto config = make_config(o);
    std::filesystem::create_directories(o.out_dir);
    const auto warnings = pipeline(config, o.out_dir);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    if (!warnings.empty()) std::cerr << warnings.size() << " warning(s)\n";
    return 0;
  } catch (const gelo::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elo and G-Elo rating, identification and evaluation"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, Pipeline>> commands{
      {"simulate", {"simulate a league and write matches.csv", gelo::pipeline_simulate}},
      {"rank", {"run the rating engine over a match log", gelo::pipeline_rank}},
      {"identify", {"fit outcome-model parameters on a training window", gelo::pipeline_identify}},
      {"evaluate", {"compare prediction methods on a test window", gelo::pipeline_evaluate}},
      {"convergence", {"per-player convergence diagnostics", gelo::pipeline_convergence}},
      {"convert-scale", {"scale and home-advantage conversions", gelo::pipeline_convert_scale}},
  };

  Options opts;
  std::uint64_t seed = 0;
  std::size_t realizations = 0;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", opts.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--preset", opts.preset, "example1, example2, example4 or fifa");
    sub->add_option("--seed", seed, "override the simulation seed");
    sub->add_option("--realizations", realizations, "override the number of realizations");
    sub->add_option("--out-dir", opts.out_dir, "output directory")->capture_default_str();
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed") > 0) opts.seed = seed;
    if (sub->count("--realizations") > 0) opts.realizations = realizations;
    return run(commands.at(name).second, opts);
  }
  return 1;
}
