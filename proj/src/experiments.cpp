#include "gelo/experiments.hpp"

#include <cmath>
#include <numeric>

#include "gelo/errors.hpp"

namespace gelo {

namespace {

RatingEngine registered_engine(const EngineConfig& config, std::size_t players) {
  RatingEngine eng(config);
  for (std::size_t m = 0; m < players; ++m) eng.state().index_of(player_name(m));
  return eng;
}

std::vector<Sample> window_samples(const Trajectory& tr, std::span<const MatchRecord> matches,
                                   Window w) {
  std::vector<Sample> out;
  out.reserve(w.size());
  for (std::size_t t = w.begin; t < w.end; ++t) {
    out.push_back({tr.z[t], matches[t].outcome, matches[t].home_venue});
  }
  return out;
}

}  // namespace

ConvergenceExperiment run_convergence_experiment(const ExperimentPreset& preset,
                                                 std::size_t realizations, std::int64_t burn_in,
                                                 std::size_t temporal_window, std::size_t threads) {
  if (preset.engine.trajectory_stride == 0) {
    throw ValidationError("convergence experiment needs trajectory snapshots");
  }
  if (realizations < 2) throw ValidationError("need at least two realizations");
  const auto theta = generate_skills(preset.sim);
  const std::size_t players = preset.sim.players;
  const double s = preset.engine.scale;
  const double s_star = preset.sim.truth.scale();
  const double theta0 = preset.engine.initial_skill;

  std::vector<std::vector<std::vector<double>>> snaps(realizations);
  std::vector<std::int64_t> checkpoints;
  std::vector<double> temporal(realizations, 0.0);
  parallel_for(
      realizations,
      [&](std::size_t r) {
        const auto sim = simulate(preset.sim, theta, r + 1);
        auto eng = registered_engine(preset.engine, players);
        const auto tr = eng.run(sim.matches);
        snaps[r] = tr.snapshots;
        if (r == 0) checkpoints = tr.snapshot_t;
        double acc = 0.0;
        std::size_t n = 0;
        for (std::size_t m = 0; m < players; ++m) {
          const auto series = player_series(tr, m);
          if (series.size() < temporal_window) continue;
          acc += temporal_variance(series, temporal_window).variance;
          ++n;
        }
        temporal[r] = n > 0 ? acc / static_cast<double>(n) : 0.0;
      },
      threads);

  ConvergenceExperiment e;
  e.realizations = realizations;
  e.scale = s;
  e.mean_step = preset.sim.steps.mean();
  e.vbar_theory = asymptotic_variance(s, e.mean_step);
  e.tau = time_constant(s, e.mean_step);
  e.checkpoints = checkpoints;
  e.vbar_temporal =
      std::accumulate(temporal.begin(), temporal.end(), 0.0) / static_cast<double>(realizations);

  const double mean_theta = std::accumulate(theta.begin(), theta.end(), 0.0) /
                            static_cast<double>(players);
  e.limit.resize(players);
  for (std::size_t m = 0; m < players; ++m) {
    e.limit[m] = theta0 + (theta[m] - mean_theta) * s / s_star;
  }

  const double band = std::sqrt(e.vbar_theory);
  const double j = static_cast<double>(realizations);
  std::size_t inside = 0;
  std::size_t total = 0;
  double var_acc = 0.0;
  std::size_t var_n = 0;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const double t_player = 2.0 * static_cast<double>(checkpoints[k] + 1) / static_cast<double>(players);
    std::vector<double> mean(players, 0.0);
    std::vector<double> expected(players);
    for (std::size_t m = 0; m < players; ++m) {
      for (std::size_t r = 0; r < realizations; ++r) mean[m] += snaps[r][k][m];
      mean[m] /= j;
      expected[m] = expected_trajectory(theta0, e.limit[m], e.tau, t_player);
      inside += std::abs(mean[m] - expected[m]) <= band;
      ++total;
      if (checkpoints[k] + 1 >= burn_in) {
        double ss = 0.0;
        for (std::size_t r = 0; r < realizations; ++r) {
          const double d = snaps[r][k][m] - mean[m];
          ss += d * d;
        }
        var_acc += ss / (j - 1.0);
        ++var_n;
      }
    }
    e.ensemble_mean.push_back(std::move(mean));
    e.expected.push_back(std::move(expected));
  }
  if (var_n == 0) throw ValidationError("burn-in leaves no checkpoints");
  e.vbar_empirical = var_acc / static_cast<double>(var_n);
  e.fraction_in_band = static_cast<double>(inside) / static_cast<double>(total);
  return e;
}

ScaleFitExperiment run_scale_fit_experiment(const ExperimentPreset& preset, Window window,
                                            std::size_t realizations, std::size_t threads) {
  if (window.size() == 0 || window.end > preset.sim.matches) {
    throw ValidationError("fit window must be non-empty and inside the simulated range");
  }
  if (preset.sim.truth.levels() != 2) throw ValidationError("scale-fit experiment is binary");
  const auto theta = generate_skills(preset.sim);
  const double s = preset.engine.scale;
  const double eta = preset.engine.hfa;
  const auto scores = OutcomeScale::uniform(2);

  NoiseModel nominal;
  nominal.vbar = asymptotic_variance(s, preset.sim.steps.mean());
  nominal.vtheta = nominal_skill_variance(preset.sim.skill_variance, s, preset.sim.truth.scale());
  nominal.scale = s;
  NoiseModel empirical = nominal;
  empirical.vtheta = empirical_skill_variance(theta, s, preset.sim.truth.scale());
  const auto theory = effective_params(eta, nominal);
  const auto theory_emp = effective_params(eta, empirical);

  IdentifiedModel no_error{"no-error", {0.0, 0.0}, eta, 1.0, window, 0, 0.0, 0};
  IdentifiedModel corrected{"theoretical", {0.0, 0.0}, theory.hfa, theory.beta, window, 0, 0.0, 0};

  struct Row {
    bool ok = false;
    double ls0, ls_theory, beta, eta, ls_fit;
  };
  std::vector<Row> rows(realizations);
  parallel_for(
      realizations,
      [&](std::size_t r) {
        const auto sim = simulate(preset.sim, theta, r + 1);
        RatingEngine eng(preset.engine);
        const auto tr = eng.run(sim.matches);
        const auto samples = window_samples(tr, sim.matches, window);
        Row row;
        row.ls0 = log_score(samples, no_error, s, scores);
        row.ls_theory = log_score(samples, corrected, s, scores);
        try {
          const auto fit = fit_binary(samples, s);
          row.beta = fit.beta;
          row.eta = fit.eta;
          row.ls_fit = -fit.loglik / static_cast<double>(samples.size());
          row.ok = true;
        } catch (const NumericalError&) {
          row.ok = false;
        }
        rows[r] = row;
      },
      threads);

  ScaleFitExperiment e;
  e.theory_beta = theory.beta;
  e.theory_eta = theory.hfa;
  e.theory_beta_empirical = theory_emp.beta;
  e.theory_eta_empirical = theory_emp.hfa;
  std::vector<double> ls0, lst, beta, etas, lsf;
  for (const auto& row : rows) {
    ls0.push_back(row.ls0);
    lst.push_back(row.ls_theory);
    if (!row.ok) {
      ++e.failures;
      continue;
    }
    beta.push_back(row.beta);
    etas.push_back(row.eta);
    lsf.push_back(row.ls_fit);
  }
  e.ls_no_error = summarize(ls0);
  e.ls_theory = summarize(lst);
  e.beta_fit = summarize(beta);
  e.eta_fit = summarize(etas);
  e.ls_fit = summarize(lsf);
  return e;
}

nlohmann::json to_json(const ConvergenceExperiment& e) {
  return {{"scale", e.scale},
          {"mean_step", e.mean_step},
          {"vbar_theory", e.vbar_theory},
          {"vbar_empirical", e.vbar_empirical},
          {"vbar_temporal", e.vbar_temporal},
          {"tau", e.tau},
          {"fraction_in_band", e.fraction_in_band},
          {"realizations", e.realizations}};
}

nlohmann::json to_json(const ScaleFitExperiment& e) {
  auto s = [](const Summary& v) { return nlohmann::json{{"mean", v.mean}, {"std", v.std}}; };
  return {{"no_error", {{"beta", 1.0}, {"log_score", s(e.ls_no_error)}}},
          {"theoretical",
           {{"beta", e.theory_beta},
            {"eta", e.theory_eta},
            {"beta_empirical_vtheta", e.theory_beta_empirical},
            {"eta_empirical_vtheta", e.theory_eta_empirical},
            {"log_score", s(e.ls_theory)}}},
          {"data_fit",
           {{"beta", s(e.beta_fit)}, {"eta", s(e.eta_fit)}, {"log_score", s(e.ls_fit)}}},
          {"failures", e.failures}};
}

}  // namespace gelo
