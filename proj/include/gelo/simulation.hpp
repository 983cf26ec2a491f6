#pragma once

// Synthetic leagues: Gaussian true skills, random pairing, outcomes drawn
// from an AC model at the generator scale s*, and J-fold replication.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelo/outcome_model.hpp"
#include "gelo/rating_engine.hpp"

namespace gelo {

/// Deterministic generator; (seed, stream) pairs give independent substreams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

class StepPolicy {
 public:
  enum class Kind { constant, uniform_per_match, uniform_per_realization };

  static StepPolicy constant(double step);
  /// A fresh draw from `values` for every match.
  static StepPolicy uniform_per_match(std::vector<double> values);
  /// One draw from `values` per realization, then held fixed.
  static StepPolicy uniform_per_realization(std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  std::span<const double> values() const noexcept { return values_; }
  double mean() const;

 private:
  StepPolicy(Kind kind, std::vector<double> values);
  Kind kind_;
  std::vector<double> values_;
};

struct SimConfig {
  std::size_t players = 30;
  std::size_t matches = 1000;
  /// Variance of the true skills at the generator scale.
  double skill_variance = 0.5;
  /// Generator model; its scale is s* and its hfa is eta*.
  ACParams truth = ACParams(1.0, 0.35, {0.0, 0.0}, OutcomeScale::uniform(2));
  StepPolicy steps = StepPolicy::constant(20.0);
  /// Probability that a match is played at the home venue of the first player.
  double home_fraction = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t skill_seed = 1;

  void validate() const;
};

struct SimOutput {
  std::vector<double> true_skills;
  std::vector<MatchRecord> matches;
  /// theta*_home - theta*_away for each match.
  std::vector<double> true_diff;
};

std::string player_name(std::size_t index);

/// M i.i.d. N(0, v) draws from the skill seed.
std::vector<double> generate_skills(const SimConfig& config);

struct Pairing {
  std::size_t home;
  std::size_t away;
};
Pairing schedule_pair(std::size_t players, Rng& rng);

std::size_t sample_outcome(const ACParams& truth, double true_diff, bool home, Rng& rng);

/// One realization on the given true skills, drawing from substream `stream`.
SimOutput simulate(const SimConfig& config, std::span<const double> true_skills,
                   std::uint64_t stream);
SimOutput simulate(const SimConfig& config);

/// Runs fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = 0);

struct Replication {
  std::size_t index;
  const SimOutput& sim;
  const Trajectory& trajectory;
  const RatingEngine& engine;
};

/// Simulates and ranks J realizations. Realization r uses stream r + 1; the
/// true skills are drawn once unless `redraw_skills` is set. Player m has
/// engine index m. The visitor may be called concurrently.
void run_replications(const SimConfig& config, const EngineConfig& engine, std::size_t realizations,
                      const std::function<void(const Replication&)>& visitor,
                      bool redraw_skills = false, std::size_t threads = 0);

struct ExperimentPreset {
  std::string name;
  SimConfig sim;
  EngineConfig engine;
  std::size_t realizations;
};

/// 30 players, v = 0.5, eta* = 0.35, logistic outcomes, engine at s = 174
/// with eta = eta*. `steps` is K = 60 or K_t in {10, 20, 30}.
ExperimentPreset example1_preset(StepPolicy steps);
/// Same league, 6000 matches so the last 2000 are well past convergence.
ExperimentPreset example2_preset(StepPolicy steps);
/// Ternary outcomes with alpha_1* = -0.4, eta* = 0.35; Elo engine at
/// s = 174, eta = 0, constant K; 12001 matches.
ExperimentPreset example4_preset(double step);

/// True skills of the calibrated league shared by the three presets.
std::uint64_t default_skill_seed();

nlohmann::json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json sim_sidecar_json(const SimConfig& config, const SimOutput& output);

}  // namespace gelo
