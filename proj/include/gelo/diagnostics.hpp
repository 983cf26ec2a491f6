#pragma once

// Closed-form convergence and noise analysis for Elo-type ratings run at
// scale s with mean step K.

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelo/outcome_model.hpp"
#include "gelo/rating_engine.hpp"

namespace gelo {

/// sK/2, the stationary variance of each skill estimate.
double asymptotic_variance(double scale, double step);
/// 4s/K, in matches played by one player.
double time_constant(double scale, double step);
/// The same time constant counted in matches of the whole league, assuming
/// random pairing among `players` players (each plays 2/M of all matches).
double global_time_constant(double scale, double step, std::size_t players);
double expected_trajectory(double theta0, double theta_inf, double tau, double t);
/// Probability that the true difference is positive given the estimated one.
double superiority_probability(double z, double vbar);
/// a = 1 + vbar / v_theta.
double noise_ratio(double vbar, double vtheta);

/// v_theta at engine scale from a generator variance at scale s*.
double nominal_skill_variance(double generator_variance, double scale, double generator_scale);
/// Population variance of the true skills, rescaled to engine scale.
double empirical_skill_variance(std::span<const double> true_skills, double scale,
                                double generator_scale);

struct NoiseModel {
  double vbar = 0.0;
  double vtheta = 1.0;
  double scale = 1.0;
  double beta_lphi = beta_logistic_to_gaussian().factor;

  void validate() const;
};

struct EffectiveParams {
  double scale;
  double hfa;
  double beta;
};

/// beta_err = a sqrt(1 + 2 vbar / (a (s beta_lphi)^2)), s_hat = s beta_err,
/// eta_hat = eta a / beta_err.
EffectiveParams effective_params(double hfa, const NoiseModel& noise);

struct Gaussian {
  double mean;
  double variance;
};

/// Distribution of the true difference z* given the estimate z.
Gaussian posterior_true_diff(double z, const NoiseModel& noise);

/// int Phi((x + z)/b) N(x; y, q^2) dx = Phi((y + z)/sqrt(b^2 + q^2)).
double gaussian_cdf_expectation(double b, double y, double z, double q);

enum class MarginalPath { closed_form, quadrature };

/// Home win probability with the true difference integrated out. The closed
/// form is logistic(z/s_hat + eta_hat); the quadrature path integrates the
/// logistic against the posterior numerically.
double marginalized_win_prob(double z, double hfa, const NoiseModel& noise,
                             MarginalPath path = MarginalPath::closed_form);

struct PlayerConvergence {
  PlayerId id;
  std::size_t matches = 0;
  double mean_step = 0.0;
  double tau = 0.0;
  double lambda = 0.0;
};

struct ConvergenceReport {
  double scale = 0.0;
  /// Mean over players of s K_m / 2, K_m the player's mean step.
  double vbar = 0.0;
  std::vector<PlayerConvergence> players;
  double fraction_lambda_ge1 = 0.0;
  double fraction_lambda_ge2 = 0.0;

  /// Fraction of players with Lambda_m < lambda.
  double fraction_below(double lambda) const;
};

ConvergenceReport convergence_report(const SkillState& state, double scale);
/// Counts matches (and their steps) whose date is not after `cutoff`
/// (ISO-8601 string compare). Matches without dates are always counted.
ConvergenceReport convergence_report(std::span<const MatchRecord> matches, double scale,
                                     std::optional<std::string> cutoff = std::nullopt);

nlohmann::json to_json(const ConvergenceReport& report);
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report);
/// Rows (Lambda, fraction_of_players): empirical CDF at each distinct Lambda.
void write_lambda_distribution_csv(const std::filesystem::path& path,
                                   const ConvergenceReport& report);

struct TemporalStats {
  double variance;
  double mean;
};

/// Mean and 1/W mean-square deviation of the last W values.
TemporalStats temporal_variance(std::span<const double> series, std::size_t window);
/// Post-match skill values of one player, in match order.
std::vector<double> player_series(const Trajectory& trajectory, std::size_t player);

/// Adaptive Simpson quadrature of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

}  // namespace gelo
