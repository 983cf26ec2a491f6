#include "gelo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "gelo/csv.hpp"
#include "gelo/errors.hpp"

namespace gelo {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw ValidationError(message);
}

void require_scale(double s) { require(std::isfinite(s) && s > 0.0, "scale must be > 0"); }

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb,
               double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

ConvergenceReport summarize(std::vector<PlayerConvergence> players, double scale) {
  ConvergenceReport r;
  r.scale = scale;
  double vsum = 0.0;
  std::size_t active = 0;
  for (const auto& p : players) {
    if (p.matches == 0) continue;
    vsum += asymptotic_variance(scale, p.mean_step);
    ++active;
  }
  r.vbar = active > 0 ? vsum / static_cast<double>(active) : 0.0;
  std::size_t ge1 = 0;
  std::size_t ge2 = 0;
  for (auto& p : players) {
    if (p.matches > 0) {
      p.tau = time_constant(scale, p.mean_step);
      p.lambda = static_cast<double>(p.matches) / p.tau;
    }
    ge1 += p.lambda >= 1.0;
    ge2 += p.lambda >= 2.0;
  }
  if (!players.empty()) {
    r.fraction_lambda_ge1 = static_cast<double>(ge1) / static_cast<double>(players.size());
    r.fraction_lambda_ge2 = static_cast<double>(ge2) / static_cast<double>(players.size());
  }
  r.players = std::move(players);
  return r;
}

}  // namespace

double asymptotic_variance(double scale, double step) {
  require_scale(scale);
  require(std::isfinite(step) && step >= 0.0, "step must be >= 0");
  return scale * step / 2.0;
}

double time_constant(double scale, double step) {
  require_scale(scale);
  require(std::isfinite(step) && step > 0.0, "step must be > 0");
  return 4.0 * scale / step;
}

double global_time_constant(double scale, double step, std::size_t players) {
  require(players >= 2, "need at least two players");
  return time_constant(scale, step) * static_cast<double>(players) / 2.0;
}

double expected_trajectory(double theta0, double theta_inf, double tau, double t) {
  require(tau > 0.0, "time constant must be > 0");
  return std::exp(-t / tau) * (theta0 - theta_inf) + theta_inf;
}

double superiority_probability(double z, double vbar) {
  require(vbar >= 0.0, "variance must be >= 0");
  if (vbar == 0.0) return z > 0.0 ? 1.0 : (z < 0.0 ? 0.0 : 0.5);
  return gaussian_cdf(z / std::sqrt(2.0 * vbar));
}

double noise_ratio(double vbar, double vtheta) {
  require(vbar >= 0.0, "variance must be >= 0");
  require(vtheta > 0.0, "skill variance must be > 0");
  return 1.0 + vbar / vtheta;
}

double nominal_skill_variance(double generator_variance, double scale, double generator_scale) {
  require_scale(scale);
  require_scale(generator_scale);
  const double r = scale / generator_scale;
  return generator_variance * r * r;
}

double empirical_skill_variance(std::span<const double> true_skills, double scale,
                                double generator_scale) {
  require(!true_skills.empty(), "no skills");
  double mean = 0.0;
  for (double v : true_skills) mean += v;
  mean /= static_cast<double>(true_skills.size());
  double ss = 0.0;
  for (double v : true_skills) ss += (v - mean) * (v - mean);
  return nominal_skill_variance(ss / static_cast<double>(true_skills.size()), scale,
                                generator_scale);
}

void NoiseModel::validate() const {
  require(std::isfinite(vbar) && vbar >= 0.0, "vbar must be >= 0");
  require(std::isfinite(vtheta) && vtheta > 0.0, "v_theta must be > 0");
  require_scale(scale);
  require(std::isfinite(beta_lphi) && beta_lphi > 0.0, "beta_lphi must be > 0");
}

EffectiveParams effective_params(double hfa, const NoiseModel& noise) {
  noise.validate();
  const double a = noise_ratio(noise.vbar, noise.vtheta);
  const double sb = noise.scale * noise.beta_lphi;
  const double beta = a * std::sqrt(1.0 + 2.0 * noise.vbar / (a * sb * sb));
  return {noise.scale * beta, hfa * a / beta, beta};
}

Gaussian posterior_true_diff(double z, const NoiseModel& noise) {
  noise.validate();
  const double a = noise_ratio(noise.vbar, noise.vtheta);
  return {z / a, 2.0 * noise.vbar / a};
}

double gaussian_cdf_expectation(double b, double y, double z, double q) {
  require(b > 0.0 && q >= 0.0, "need b > 0 and q >= 0");
  return gaussian_cdf((y + z) / std::sqrt(b * b + q * q));
}

double marginalized_win_prob(double z, double hfa, const NoiseModel& noise, MarginalPath path) {
  if (path == MarginalPath::closed_form) {
    const auto e = effective_params(hfa, noise);
    return logistic(z / e.scale + e.hfa);
  }
  const auto post = posterior_true_diff(z, noise);
  const double s = noise.scale;
  if (post.variance == 0.0) return logistic(z / s + hfa);
  const double sd = std::sqrt(post.variance);
  const double norm = 1.0 / (sd * std::sqrt(2.0 * std::numbers::pi));
  auto f = [&](double x) {
    const double d = (x - post.mean) / sd;
    return logistic(x / s + hfa) * norm * std::exp(-0.5 * d * d);
  };
  return integrate(f, post.mean - 12.0 * sd, post.mean + 12.0 * sd, 1e-12);
}

double ConvergenceReport::fraction_below(double lambda) const {
  if (players.empty()) return 0.0;
  const auto n = std::count_if(players.begin(), players.end(),
                               [&](const PlayerConvergence& p) { return p.lambda < lambda; });
  return static_cast<double>(n) / static_cast<double>(players.size());
}

ConvergenceReport convergence_report(const SkillState& state, double scale) {
  require_scale(scale);
  std::vector<PlayerConvergence> players;
  for (std::size_t i = 0; i < state.size(); ++i) {
    PlayerConvergence p;
    p.id = state.id(i);
    p.matches = state.matches(i);
    p.mean_step = state.mean_step(i);
    players.push_back(std::move(p));
  }
  return summarize(std::move(players), scale);
}

ConvergenceReport convergence_report(std::span<const MatchRecord> matches, double scale,
                                     std::optional<std::string> cutoff) {
  require_scale(scale);
  if (matches.empty()) throw ValidationError("convergence report needs at least one match");
  std::unordered_map<PlayerId, std::size_t> index;
  std::vector<PlayerConvergence> players;
  std::vector<double> step_sum;
  auto touch = [&](const PlayerId& id, double k) {
    const auto [it, inserted] = index.try_emplace(id, players.size());
    if (inserted) {
      players.push_back({id, 0, 0.0, 0.0, 0.0});
      step_sum.push_back(0.0);
    }
    ++players[it->second].matches;
    step_sum[it->second] += k;
  };
  for (const auto& m : matches) {
    if (cutoff && m.date && *m.date > *cutoff) continue;
    if (!m.step || !(*m.step > 0.0)) throw ValidationError("match without a valid step size");
    touch(m.home, *m.step);
    touch(m.away, *m.step);
  }
  for (std::size_t i = 0; i < players.size(); ++i) {
    players[i].mean_step = step_sum[i] / static_cast<double>(players[i].matches);
  }
  return summarize(std::move(players), scale);
}

nlohmann::json to_json(const ConvergenceReport& report) {
  auto players = nlohmann::json::array();
  for (const auto& p : report.players) {
    players.push_back({{"player_id", p.id},
                       {"N", p.matches},
                       {"mean_step", p.mean_step},
                       {"tau", p.tau},
                       {"lambda", p.lambda}});
  }
  return {{"scale", report.scale},
          {"vbar", report.vbar},
          {"fraction_lambda_ge1", report.fraction_lambda_ge1},
          {"fraction_lambda_ge2", report.fraction_lambda_ge2},
          {"players", std::move(players)}};
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report) {
  std::ostringstream out;
  out << csv::header_line("convergence") << "\nplayer_id,N_m,mean_step,tau_m,lambda_m\n";
  for (const auto& p : report.players) {
    out << csv::quote(p.id) << ',' << p.matches << ',' << csv::format_double(p.mean_step) << ','
        << csv::format_double(p.tau) << ',' << csv::format_double(p.lambda) << '\n';
  }
  csv::write_atomic(path, out.str());
}

void write_lambda_distribution_csv(const std::filesystem::path& path,
                                   const ConvergenceReport& report) {
  std::vector<double> lambdas;
  for (const auto& p : report.players) lambdas.push_back(p.lambda);
  std::sort(lambdas.begin(), lambdas.end());
  std::ostringstream out;
  out << csv::header_line("lambda-distribution") << "\nlambda,fraction_of_players\n";
  const double n = static_cast<double>(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (i + 1 < lambdas.size() && lambdas[i + 1] == lambdas[i]) continue;
    out << csv::format_double(lambdas[i]) << ',' << csv::format_double(static_cast<double>(i + 1) / n)
        << '\n';
  }
  csv::write_atomic(path, out.str());
}

TemporalStats temporal_variance(std::span<const double> series, std::size_t window) {
  require(window >= 1, "window must be >= 1");
  require(series.size() >= window, "series shorter than the window");
  const auto tail = series.last(window);
  double mean = 0.0;
  for (double v : tail) mean += v;
  mean /= static_cast<double>(window);
  double ss = 0.0;
  for (double v : tail) ss += (v - mean) * (v - mean);
  return {ss / static_cast<double>(window), mean};
}

std::vector<double> player_series(const Trajectory& trajectory, std::size_t player) {
  std::vector<double> out;
  for (const auto& p : trajectory.points) {
    if (p.player == player) out.push_back(p.skill);
  }
  return out;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  require(std::isfinite(a) && std::isfinite(b), "integration bounds must be finite");
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, fa, b, fb, m, fm, whole, tol, 50);
}

}  // namespace gelo
