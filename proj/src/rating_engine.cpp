#include "gelo/rating_engine.hpp"

#include <cmath>
#include <sstream>

#include "gelo/csv.hpp"
#include "gelo/errors.hpp"

namespace gelo {

EngineConfig EngineConfig::elo(double scale, double hfa, OutcomeScale scores, EloRule rule,
                               std::optional<double> step) {
  EngineConfig c;
  c.scale = scale;
  c.hfa = hfa;
  c.scores = std::move(scores);
  c.rule = rule;
  c.default_step = step;
  c.validate();
  return c;
}

EngineConfig EngineConfig::gelo(const ACParams& params, std::optional<double> step) {
  EngineConfig c;
  c.scale = params.scale();
  c.hfa = params.hfa();
  c.scores = params.scores();
  const auto a = params.alpha();
  c.rule = GEloRule{std::vector<double>(a.begin(), a.end())};
  c.default_step = step;
  c.validate();
  return c;
}

void EngineConfig::validate() const {
  if (!(std::isfinite(scale) && scale > 0.0)) throw ValidationError("engine scale must be > 0");
  if (!std::isfinite(hfa)) throw ValidationError("engine hfa must be finite");
  if (!std::isfinite(initial_skill)) throw ValidationError("initial skill must be finite");
  if (default_step && !(std::isfinite(*default_step) && *default_step > 0.0)) {
    throw ValidationError("step size must be > 0");
  }
  if (const auto* e = std::get_if<EloRule>(&rule)) {
    if (e->kind == ExpectedScore::generalized_logistic && !(e->base > 1.0)) {
      throw ValidationError("logistic base must be > 1");
    }
  } else {
    const auto& g = std::get<GEloRule>(rule);
    ACParams(scale, hfa, g.alpha, scores);
  }
}

std::size_t SkillState::index_of(const PlayerId& id) {
  const auto [it, inserted] = index_.try_emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
    skill_.push_back(initial_skill_);
    matches_.push_back(0);
    step_sum_.push_back(0.0);
  }
  return it->second;
}

std::optional<std::size_t> SkillState::find(const PlayerId& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void SkillState::set_skill(const PlayerId& id, double skill) {
  if (!std::isfinite(skill)) throw ValidationError("skill must be finite");
  skill_[index_of(id)] = skill;
}

double SkillState::mean_step(std::size_t i) const {
  return matches_.at(i) == 0 ? 0.0 : step_sum_[i] / static_cast<double>(matches_[i]);
}

double SkillState::sum_of_skills() const {
  double s = 0.0;
  for (double v : skill_) s += v;
  return s;
}

void SkillState::record_match(std::size_t i, double step) {
  ++matches_.at(i);
  step_sum_[i] += step;
}

RatingEngine::RatingEngine(EngineConfig config)
    : config_(std::move(config)), state_(config_.initial_skill) {
  config_.validate();
}

double RatingEngine::expected_score(double z, bool home_venue) const {
  const double u = z / config_.scale + (home_venue ? config_.hfa : 0.0);
  if (const auto* e = std::get_if<EloRule>(&config_.rule)) {
    switch (e->kind) {
      case ExpectedScore::logistic:
        return logistic(u);
      case ExpectedScore::gaussian_cdf:
        return gaussian_cdf(u);
      case ExpectedScore::generalized_logistic:
        return generalized_logistic(u, e->base);
    }
  }
  return ac_expected_score_at(std::get<GEloRule>(config_.rule).alpha, config_.scores.scores(), u);
}

MatchUpdate RatingEngine::update(const MatchRecord& match) {
  if (match.home == match.away) throw ValidationError("a player cannot play themselves");
  if (match.outcome >= config_.scores.levels()) {
    throw ValidationError("outcome " + std::to_string(match.outcome) + " outside 0.." +
                          std::to_string(config_.scores.levels() - 1));
  }
  const double k = match.step ? *match.step : config_.default_step.value_or(-1.0);
  if (!(std::isfinite(k) && k > 0.0)) throw ValidationError("match has no valid step size");

  const std::size_t h = state_.index_of(match.home);
  const std::size_t a = state_.index_of(match.away);
  const double z = state_.skill(h) - state_.skill(a);
  const double g = expected_score(z, match.home_venue);
  const double change = k * (config_.scores.score(match.outcome) - g);
  state_.skill(h) += change;
  state_.skill(a) -= change;
  state_.record_match(h, k);
  state_.record_match(a, k);
  last_t_ = match.t;
  return {h, a, z, g, change};
}

Trajectory RatingEngine::run(std::span<const MatchRecord> matches) {
  Trajectory tr;
  tr.t.reserve(matches.size());
  tr.z.reserve(matches.size());
  tr.expected.reserve(matches.size());
  tr.points.reserve(2 * matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto& m = matches[i];
    if (last_t_ && m.t <= *last_t_) {
      throw ValidationError("match times must be strictly increasing (t=" + std::to_string(m.t) +
                            ")");
    }
    const auto u = update(m);
    tr.t.push_back(m.t);
    tr.z.push_back(u.z);
    tr.expected.push_back(u.expected);
    tr.points.push_back({m.t, static_cast<std::uint32_t>(u.home_index), state_.skill(u.home_index)});
    tr.points.push_back({m.t, static_cast<std::uint32_t>(u.away_index), state_.skill(u.away_index)});
    if (config_.trajectory_stride > 0 && (i + 1) % config_.trajectory_stride == 0) {
      tr.snapshot_t.push_back(m.t);
      const auto s = state_.skills();
      tr.snapshots.emplace_back(s.begin(), s.end());
    }
  }
  return tr;
}

double skill_diff(const SkillState& state, const PlayerId& a, const PlayerId& b) {
  const auto ia = state.find(a);
  const auto ib = state.find(b);
  if (!ia || !ib) throw ValidationError("unknown player in skill_diff");
  return state.skill(*ia) - state.skill(*ib);
}

void write_snapshot_csv(const std::filesystem::path& path, const SkillState& state) {
  std::ostringstream out;
  out << csv::header_line("snapshot") << "\nplayer_id,skill,n_matches,mean_step\n";
  for (std::size_t i = 0; i < state.size(); ++i) {
    out << csv::quote(state.id(i)) << ',' << csv::format_double(state.skill(i)) << ','
        << state.matches(i) << ',' << csv::format_double(state.mean_step(i)) << '\n';
  }
  csv::write_atomic(path, out.str());
}

SkillState read_snapshot_csv(const std::filesystem::path& path, double initial_skill) {
  const auto lines = csv::read_lines(path);
  SkillState state(initial_skill);
  std::size_t i = 0;
  if (i < lines.size() && csv::check_header(lines[i], "snapshot")) ++i;
  if (i >= lines.size() || csv::split(lines[i]).at(0) != "player_id") {
    throw ValidationError("snapshot CSV lacks a player_id,skill header");
  }
  for (++i; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split(lines[i]);
    if (f.size() < 2) throw ValidationError("short snapshot row: " + lines[i]);
    state.set_skill(f[0], csv::parse_double(f[1], "skill"));
  }
  return state;
}

nlohmann::json snapshot_json(const SkillState& state) {
  auto players = nlohmann::json::array();
  for (std::size_t i = 0; i < state.size(); ++i) {
    players.push_back({{"player_id", state.id(i)},
                       {"skill", state.skill(i)},
                       {"n_matches", state.matches(i)},
                       {"mean_step", state.mean_step(i)}});
  }
  return {{"schema", "snapshot"}, {"version", "1.0"}, {"players", std::move(players)}};
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const SkillState& state) {
  std::ostringstream out;
  out << csv::header_line("trajectory") << "\nt,player_id,skill\n";
  for (const auto& p : trajectory.points) {
    out << p.t << ',' << csv::quote(state.id(p.player)) << ',' << csv::format_double(p.skill)
        << '\n';
  }
  csv::write_atomic(path, out.str());
}

}  // namespace gelo
