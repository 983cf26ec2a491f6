#pragma once

// End-to-end runs behind the command-line subcommands. Each writes its
// outputs into `out_dir` and returns the warnings it collected.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gelo/config.hpp"
#include "gelo/evaluation.hpp"
#include "gelo/identification.hpp"
#include "gelo/rating_engine.hpp"
#include "gelo/simulation.hpp"

namespace gelo {

struct RankedData {
  std::vector<MatchRecord> matches;
  std::vector<Sample> samples;
  std::optional<SimOutput> sim;
  std::optional<SkillState> state;
  std::optional<Trajectory> trajectory;
  std::vector<std::string> warnings;
};

/// Matches from the data file, or one simulated realization when no data
/// file is configured.
RankedData load_matches(const AppConfig& config);
/// Loads the matches and produces z_t, either by running the engine or from
/// the supplied skill columns.
RankedData rank_matches(const AppConfig& config);

/// Evaluation inputs for a single ranked data set. For simulated data this
/// adds the G-Elo reference ranking and the true differences.
EvaluationData evaluation_data(const AppConfig& config, const RankedData& ranked);
/// Resolves open-ended windows against n matches.
EvaluationSpec resolve_spec(EvaluationSpec spec, std::size_t n);

IdentifiedModel identify(const AppConfig& config, const RankedData& ranked,
                         std::optional<OnlineTrace>* trace = nullptr);

using Warnings = std::vector<std::string>;

Warnings pipeline_simulate(const AppConfig& config, const std::filesystem::path& out_dir);
Warnings pipeline_rank(const AppConfig& config, const std::filesystem::path& out_dir);
Warnings pipeline_identify(const AppConfig& config, const std::filesystem::path& out_dir);
Warnings pipeline_evaluate(const AppConfig& config, const std::filesystem::path& out_dir);
Warnings pipeline_convergence(const AppConfig& config, const std::filesystem::path& out_dir);
Warnings pipeline_convert_scale(const AppConfig& config, const std::filesystem::path& out_dir);

}  // namespace gelo
