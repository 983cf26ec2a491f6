#pragma once

// Stochastic-gradient rating engines: classic Elo with a logistic, base-a
// logistic or Gaussian-CDF expected score, and G-Elo driven by the AC
// expected score. Both apply the zero-sum update
//   theta_home += K (d_y - F(z/s + eta h)),  theta_away -= the same amount.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gelo/outcome_model.hpp"

namespace gelo {

using PlayerId = std::string;

struct MatchRecord {
  std::int64_t t = 0;
  PlayerId home;
  PlayerId away;
  std::size_t outcome = 0;
  bool home_venue = false;
  std::optional<double> step;
  std::optional<std::string> date;
  /// Externally published pre-match skills, when the data come with them.
  std::optional<double> home_skill;
  std::optional<double> away_skill;

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

enum class ExpectedScore { logistic, gaussian_cdf, generalized_logistic };

struct EloRule {
  ExpectedScore kind = ExpectedScore::logistic;
  double base = 10.0;
};

struct GEloRule {
  std::vector<double> alpha;
};

using RatingRule = std::variant<EloRule, GEloRule>;

struct EngineConfig {
  double scale = 1.0;
  double hfa = 0.0;
  OutcomeScale scores = OutcomeScale::uniform(3);
  RatingRule rule = EloRule{};
  double initial_skill = 0.0;
  /// Used when a match carries no step size of its own.
  std::optional<double> default_step;
  /// Full skill snapshots every `trajectory_stride` matches; 0 disables them.
  std::size_t trajectory_stride = 0;

  static EngineConfig elo(double scale, double hfa, OutcomeScale scores,
                          EloRule rule = {}, std::optional<double> step = std::nullopt);
  static EngineConfig gelo(const ACParams& params, std::optional<double> step = std::nullopt);

  void validate() const;
};

/// Player registry plus skills. Unknown players are registered at the
/// initial skill the first time they appear.
class SkillState {
 public:
  explicit SkillState(double initial_skill = 0.0) : initial_skill_(initial_skill) {}

  std::size_t index_of(const PlayerId& id);
  std::optional<std::size_t> find(const PlayerId& id) const;
  void set_skill(const PlayerId& id, double skill);

  std::size_t size() const noexcept { return ids_.size(); }
  const PlayerId& id(std::size_t i) const { return ids_.at(i); }
  double skill(std::size_t i) const { return skill_.at(i); }
  double& skill(std::size_t i) { return skill_.at(i); }
  std::span<const double> skills() const noexcept { return skill_; }
  std::size_t matches(std::size_t i) const { return matches_.at(i); }
  double mean_step(std::size_t i) const;
  double sum_of_skills() const;

  void record_match(std::size_t i, double step);

 private:
  double initial_skill_;
  std::unordered_map<PlayerId, std::size_t> index_;
  std::vector<PlayerId> ids_;
  std::vector<double> skill_;
  std::vector<std::size_t> matches_;
  std::vector<double> step_sum_;
};

struct MatchUpdate {
  std::size_t home_index;
  std::size_t away_index;
  /// Pre-match theta_home - theta_away.
  double z;
  double expected;
  double change;
};

struct TrajectoryPoint {
  std::int64_t t;
  std::uint32_t player;
  double skill;
};

struct Trajectory {
  std::vector<std::int64_t> t;
  std::vector<double> z;
  std::vector<double> expected;
  /// Post-match skill of both participants of every match.
  std::vector<TrajectoryPoint> points;
  std::vector<std::int64_t> snapshot_t;
  std::vector<std::vector<double>> snapshots;
};

class RatingEngine {
 public:
  explicit RatingEngine(EngineConfig config);

  MatchUpdate update(const MatchRecord& match);
  /// Requires strictly increasing match times.
  Trajectory run(std::span<const MatchRecord> matches);

  /// Expected home score at pre-match difference z.
  double expected_score(double z, bool home_venue) const;

  const EngineConfig& config() const noexcept { return config_; }
  const SkillState& state() const noexcept { return state_; }
  SkillState& state() noexcept { return state_; }

 private:
  EngineConfig config_;
  SkillState state_;
  std::optional<std::int64_t> last_t_;
};

double skill_diff(const SkillState& state, const PlayerId& a, const PlayerId& b);

void write_snapshot_csv(const std::filesystem::path& path, const SkillState& state);
SkillState read_snapshot_csv(const std::filesystem::path& path, double initial_skill = 0.0);
nlohmann::json snapshot_json(const SkillState& state);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const SkillState& state);

}  // namespace gelo
