#pragma once

// Declarative run configuration (JSON). A config names an optional preset
// and overrides any of its sections:
//
//   {
//     "preset": "example4",
//     "seed": 7,
//     "simulation": { ...SimConfig fields... },
//     "engine": { "scale": 174, "hfa": 0, "levels": 3, "rule": "elo",
//                 "expected_score": "logistic", "base": 10, "alpha": [...],
//                 "step": 20, "initial_skill": 0, "trajectory_stride": 0 },
//     "data": { "matches": "games.csv", "cuts": [0, 1],
//               "supplied_skills": false, "initial_skills": "snap.csv" },
//     "evaluation": { "train": [4000, 8000], "test": [8000, null],
//                     "methods": ["conventional", ...], "online_window": 100,
//                     "online_mu": 0.01, "smoothing": 0.5 },
//     "identify": { "method": "fully-adaptive", "window": [0, 2000] },
//     "convergence": { "scale": 260.6, "checkpoints": ["2020-12-31"] },
//     "convert": { "scale": 600, "base": 10, "hfa": 0, "alpha": [0, -0.5, 0] },
//     "realizations": 200,
//     "threads": 0
//   }
//
// Relative paths resolve against the config file's directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelo/evaluation.hpp"
#include "gelo/match_io.hpp"
#include "gelo/rating_engine.hpp"
#include "gelo/simulation.hpp"

namespace gelo {

inline constexpr std::size_t kUntilEnd = static_cast<std::size_t>(-1);

struct DataConfig {
  std::filesystem::path matches;
  std::optional<DiscretizationRule> rule;
  /// Take z_t from the home_skill/away_skill columns instead of ranking.
  bool supplied_skills = false;
  std::optional<std::filesystem::path> initial_skills;
};

struct ConvertConfig {
  double scale = 400.0;
  double base = 10.0;
  double hfa = 0.0;
  std::optional<std::vector<double>> alpha;
};

struct AppConfig {
  std::string preset;
  std::uint64_t seed = 1;
  std::optional<SimConfig> simulation;
  EngineConfig engine;
  std::optional<DataConfig> data;
  /// test.end may be kUntilEnd.
  EvaluationSpec evaluation;
  Method identify_method = Method::fully_adaptive;
  std::optional<Window> identify_window;
  std::optional<double> convergence_scale;
  std::vector<std::string> checkpoints;
  ConvertConfig convert;
  std::size_t realizations = 1;
  std::size_t threads = 0;
};

/// Known presets: example1, example2, example4, fifa.
AppConfig preset_config(const std::string& name);
AppConfig config_from_json(const nlohmann::json& j,
                           const std::filesystem::path& base_dir = std::filesystem::path());
AppConfig load_config(const std::filesystem::path& path);

EngineConfig engine_config_from_json(const nlohmann::json& j, EngineConfig base);
nlohmann::json to_json(const EngineConfig& config);

/// The canonical (natural-base) scale of a base-`base` logistic at `scale`.
double canonical_scale(double scale, double base);

}  // namespace gelo
