#pragma once

// Monte-Carlo replications of the binary-outcome league: convergence of the
// skill estimates and the noise-corrected scale fit.

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "gelo/diagnostics.hpp"
#include "gelo/evaluation.hpp"
#include "gelo/simulation.hpp"

namespace gelo {

struct ConvergenceExperiment {
  double scale = 0.0;
  double mean_step = 0.0;
  double vbar_theory = 0.0;
  /// Ensemble variance per player and checkpoint after `burn_in`, averaged.
  double vbar_empirical = 0.0;
  /// Per-realization temporal variance, averaged over players and realizations.
  double vbar_temporal = 0.0;
  double tau = 0.0;
  std::vector<std::int64_t> checkpoints;
  /// [checkpoint][player]
  std::vector<std::vector<double>> ensemble_mean;
  std::vector<std::vector<double>> expected;
  std::vector<double> limit;
  /// Fraction of (checkpoint, player) pairs whose ensemble mean lies within
  /// +- sqrt(vbar_theory) of the expected trajectory.
  double fraction_in_band = 0.0;
  std::size_t realizations = 0;
};

/// Requires a preset whose engine records snapshots (trajectory_stride > 0).
/// Expected trajectories start at the initial skill and converge to the
/// centered true skills times s/s*; time is counted in matches per player.
ConvergenceExperiment run_convergence_experiment(const ExperimentPreset& preset,
                                                 std::size_t realizations, std::int64_t burn_in,
                                                 std::size_t temporal_window = 200,
                                                 std::size_t threads = 0);

struct ScaleFitExperiment {
  Summary ls_no_error;
  double theory_beta = 0.0;
  double theory_eta = 0.0;
  /// Same, with v_theta taken from the realized true skills.
  double theory_beta_empirical = 0.0;
  double theory_eta_empirical = 0.0;
  Summary ls_theory;
  Summary beta_fit;
  Summary eta_fit;
  Summary ls_fit;
  std::size_t failures = 0;
};

/// For each realization: rank, fit (gamma, eta) on `window`, and score the
/// same window with the uncorrected, the theoretical and the fitted models.
ScaleFitExperiment run_scale_fit_experiment(const ExperimentPreset& preset, Window window,
                                            std::size_t realizations, std::size_t threads = 0);

nlohmann::json to_json(const ConvergenceExperiment& e);
nlohmann::json to_json(const ScaleFitExperiment& e);

}  // namespace gelo
