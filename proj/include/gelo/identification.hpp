#pragma once

// Prediction-model identification from ranking outputs: the skill
// differences z_t produced by a rating engine are treated as fixed inputs
// and (alpha, eta, beta = 1/gamma) are estimated from observed outcomes.
// The fitted model predicts with ell_y(gamma z/s + eta h; alpha).

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelo/outcome_model.hpp"

namespace gelo {

struct Sample {
  double z;
  std::size_t y;
  bool home;
};

/// Half-open index range [begin, end).
struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
  friend bool operator==(const Window&, const Window&) = default;
};

struct OutcomeFrequencies {
  /// Symmetrized neutral frequencies reweighted with the home-venue ones.
  std::vector<double> overall;
  std::vector<double> neutral;
  std::vector<double> home;
  std::size_t neutral_count = 0;
  std::size_t home_count = 0;
  double home_fraction = 0.0;
  /// Mean score over home-venue matches; empty when there are none.
  std::optional<double> mean_home_score;
};

/// `smoothing` pseudo-counts are added to every cell of each non-empty venue
/// group before normalizing.
OutcomeFrequencies outcome_frequencies(std::span<const Sample> samples, const OutcomeScale& scores,
                                       double smoothing = 0.5);

/// alpha_y = 0.5 log(P_y P_{L-1-y} / (P_0 P_{L-1})).
std::vector<double> simple_alpha(const OutcomeFrequencies& freqs);
/// logit(mean home score) * beta_{AC->L}(alpha).
double simple_eta(const OutcomeFrequencies& freqs, std::span<const double> alpha,
                  const OutcomeScale& scores);
/// Solves G^AC(eta) = mean home score exactly by bisection.
double simple_eta_exact(const OutcomeFrequencies& freqs, std::span<const double> alpha,
                        const OutcomeScale& scores);
/// 1 / beta_{AC->L}(alpha).
double simple_beta(std::span<const double> alpha, const OutcomeScale& scores);

struct IdentifiedModel {
  std::string method;
  std::vector<double> alpha;
  double eta = 0.0;
  double beta = 1.0;
  Window train_window;
  std::size_t training_size = 0;
  double loglik = 0.0;
  std::size_t iterations = 0;

  double gamma() const { return 1.0 / beta; }
  /// AC parameters at the effective scale s * beta.
  ACParams params(double scale, const OutcomeScale& scores) const;
  void validate() const;
};

nlohmann::json to_json(const IdentifiedModel& model);
IdentifiedModel identified_model_from_json(const nlohmann::json& j);

struct FitOptions {
  bool fit_alpha = true;
  bool fit_eta = true;
  bool fit_gamma = true;
  /// Starting (or frozen) values; closed forms are used when empty.
  std::optional<std::vector<double>> alpha;
  std::optional<double> eta;
  std::optional<double> gamma;
  double gradient_tol = 1e-8;
  double improvement_tol = 1e-10;
  std::size_t max_iterations = 500;
};

/// sum_t ell_{y_t}(gamma z_t/s + eta h_t; alpha).
double pseudo_loglik(std::span<const Sample> samples, double scale, std::span<const double> alpha,
                     const OutcomeScale& scores, double eta, double gamma);

/// Gradient with respect to (gamma, eta, alpha_1 .. alpha_F), mirrored
/// alpha entries tied.
std::vector<double> pseudo_loglik_gradient(std::span<const Sample> samples, double scale,
                                           std::span<const double> alpha,
                                           const OutcomeScale& scores, double eta, double gamma);

/// Maximizes the pseudo-likelihood over the free subset of (alpha, eta,
/// gamma) by damped Newton. The objective is jointly concave in these
/// coordinates. Throws NumericalError on non-convergence or when the free
/// parameters are not identifiable from the data.
IdentifiedModel fit_full(std::span<const Sample> samples, double scale, const OutcomeScale& scores,
                         const FitOptions& options = {});

struct BinaryFit {
  double gamma;
  double eta;
  double beta;
  double loglik;
};

/// Binary-outcome (gamma, eta) fit.
BinaryFit fit_binary(std::span<const Sample> samples, double scale);

struct OnlineOptions {
  std::size_t window = 100;
  double mu = 0.01;
  double gamma0 = 1.0;
  double gamma_min = 1e-3;
};

struct OnlineTrace {
  /// gamma[t] is the value in force when sample t is predicted.
  std::vector<double> gamma;
  bool clamped = false;
};

/// Mini-batch stochastic ascent on gamma with alpha and eta held fixed.
/// Updates start once `window` samples have been seen.
OnlineTrace online_gamma(std::span<const Sample> samples, std::span<const double> alpha, double eta,
                         double scale, const OutcomeScale& scores, const OnlineOptions& options = {});

void write_gamma_trace_csv(const std::filesystem::path& path, const OnlineTrace& trace,
                           std::size_t first_index = 0);

}  // namespace gelo
