#pragma once

// Predictive evaluation: log-score on a held-out test window and the
// multi-method comparison harness.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelo/identification.hpp"
#include "gelo/outcome_model.hpp"
#include "gelo/simulation.hpp"

namespace gelo {

/// -mean ell_{y_t}(z_t/(s beta) + eta h_t; alpha), natural-log units.
double log_score(std::span<const Sample> test, const IdentifiedModel& model, double scale,
                 const OutcomeScale& scores);
/// Log-score with a per-sample gamma_t (gamma.size() == test.size()).
double log_score(std::span<const Sample> test, std::span<const double> alpha, double eta,
                 std::span<const double> gamma, double scale, const OutcomeScale& scores);
/// Per-sample log-likelihoods, for plotting.
std::vector<double> log_likelihoods(std::span<const Sample> test, const IdentifiedModel& model,
                                    double scale, const OutcomeScale& scores);

/// The model implied by the ranking itself: binomial alpha, beta = 1/(L-1), eta = 0.
IdentifiedModel conventional_model(const OutcomeScale& scores);

enum class Method {
  conventional,
  simple_no_hfa,
  simple_with_hfa,
  optimal_scaling,
  online_adaptive,
  fully_adaptive,
  gelo_reference,
  ground_truth,
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);
std::vector<Method> all_methods();

/// Parameters of `method` identified from `train` alone. Methods needing
/// other inputs (online-adaptive, gelo-reference, ground-truth) are rejected.
IdentifiedModel identify_on_window(Method method, std::span<const Sample> train, double scale,
                                   const OutcomeScale& scores, double smoothing = 0.5);

struct EvaluationSpec {
  Window train;
  Window test;
  std::vector<Method> methods = all_methods();
  OnlineOptions online;
  double smoothing = 0.5;

  /// Windows non-empty, disjoint, test after train, both within n samples.
  void validate(std::size_t n) const;
};

struct EvaluationData {
  double scale = 1.0;
  OutcomeScale scores = OutcomeScale::uniform(3);
  /// Samples from the ranking under evaluation, indexed by match.
  std::vector<Sample> ranked;
  /// Samples from a G-Elo ranking run with the true AC parameters.
  std::optional<std::vector<Sample>> gelo;
  /// True differences and the generator model.
  std::optional<std::vector<Sample>> truth_samples;
  std::optional<ACParams> truth;
};

struct MethodResult {
  Method method;
  std::optional<IdentifiedModel> model;
  std::optional<double> log_score;
  std::optional<OnlineTrace> trace;
  std::string error;
};

/// Every method in `spec`; failures become rows with an error and no values.
std::vector<MethodResult> evaluate_methods(const EvaluationSpec& spec, const EvaluationData& data);

struct Summary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct MethodSummary {
  Method method;
  std::vector<Summary> alpha;
  Summary beta;
  Summary eta;
  Summary log_score;
  std::size_t failures = 0;
  std::string first_error;
};

struct EvaluationReport {
  std::size_t realizations = 0;
  std::vector<MethodSummary> methods;

  const MethodSummary& at(Method m) const;
  std::size_t warnings() const;
};

EvaluationReport aggregate(std::span<const std::vector<MethodResult>> realizations,
                           std::span<const Method> methods);

/// Simulates and ranks J realizations of `preset` (Elo engine for the
/// ranked samples, G-Elo with the generator's alpha* and eta* for the
/// reference) and evaluates every method on each.
EvaluationReport run_comparison(const EvaluationSpec& spec, const ExperimentPreset& preset,
                                std::size_t realizations, std::size_t threads = 0);

/// Train {4000..7999}, test {8000..12000}.
EvaluationSpec example4_spec();

nlohmann::json to_json(const EvaluationReport& report);
nlohmann::json to_json(const std::vector<MethodResult>& results);
std::string format_table(const EvaluationReport& report);

}  // namespace gelo
