#pragma once

// Probability models linking a skill difference to a match outcome: the
// logistic and Gaussian-CDF expected scores, the adjacent-categories (AC)
// ordinal model, and the scale conversions between them.
//
// Conventions: z is a skill difference in skill points, s > 0 is the scale,
// eta is the scale-free home-field advantage and h flags a home-venue match.
// AC quantities are evaluated at the canonical argument u = z/s + eta*h.

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace gelo {

/// AC evaluation rejects |u| above this bound.
inline constexpr double kMaxCanonicalArgument = 700.0;

double logistic(double z);
double logit(double p);
double gaussian_cdf(double z);
/// 1 / (1 + base^{-z}).
double generalized_logistic(double z, double base);

/// Ordered outcome space {0, ..., L-1} with scores 0 = d_0 < ... < d_{L-1} = 1.
class OutcomeScale {
 public:
  explicit OutcomeScale(std::vector<double> scores);

  /// Scores y/(L-1).
  static OutcomeScale uniform(std::size_t levels);

  std::size_t levels() const noexcept { return scores_.size(); }
  double score(std::size_t y) const;
  std::span<const double> scores() const noexcept { return scores_; }
  /// d_y == 1 - d_{L-1-y} for every y.
  bool is_symmetric(double tol = 1e-12) const noexcept;

  friend bool operator==(const OutcomeScale&, const OutcomeScale&) = default;

 private:
  std::vector<double> scores_;
};

/// Parameters of the AC model
///   P_y(u) = exp(alpha_y + d_y u) / sum_l exp(alpha_l + d_l u).
/// alpha_0 = alpha_{L-1} = 0 is enforced. Interior entries may be
/// asymmetric; is_symmetric() reports whether the outcome-swap identity
/// P_y(u) = P_{L-1-y}(-u) holds.
class ACParams {
 public:
  ACParams(double scale, double hfa, std::vector<double> alpha, OutcomeScale scores);

  /// Builds the symmetric alpha vector from its free half
  /// alpha_1 .. alpha_{ceil((L-2)/2)}.
  static ACParams symmetric(double scale, double hfa, std::span<const double> free_alpha,
                            OutcomeScale scores);

  double scale() const noexcept { return scale_; }
  double hfa() const noexcept { return hfa_; }
  std::size_t levels() const noexcept { return alpha_.size(); }
  std::span<const double> alpha() const noexcept { return alpha_; }
  const OutcomeScale& scores() const noexcept { return scores_; }
  bool is_symmetric() const noexcept { return symmetric_; }

  /// z/s + eta*h.
  double argument(double z, bool home) const;

  ACParams with_scale(double scale) const;
  ACParams with_hfa(double hfa) const;

 private:
  double scale_;
  double hfa_;
  std::vector<double> alpha_;
  OutcomeScale scores_;
  bool symmetric_;
};

/// Number of free alpha parameters under symmetry: ceil((L-2)/2).
std::size_t free_alpha_count(std::size_t levels);
/// Expands alpha_1..alpha_F to the full symmetric vector of length L.
std::vector<double> expand_symmetric_alpha(std::span<const double> free_alpha, std::size_t levels);

// ---------------------------------------------------------------------------
// Kernels at the canonical argument u. These are what the engine and the
// identification layer use directly; the ACParams overloads below wrap them.

/// Writes P_0..P_{L-1} into `probs` and returns log sum_l exp(alpha_l + d_l u).
/// Uses max-subtraction, so nothing overflows for |u| <= kMaxCanonicalArgument.
double ac_distribution(std::span<const double> alpha, std::span<const double> scores, double u,
                       std::span<double> probs);
double ac_log_prob_at(std::span<const double> alpha, std::span<const double> scores,
                      std::size_t y, double u);
/// G(u) = sum_y d_y P_y(u).
double ac_expected_score_at(std::span<const double> alpha, std::span<const double> scores,
                            double u);
/// dG/du = Var_P(d).
double ac_score_variance_at(std::span<const double> alpha, std::span<const double> scores,
                            double u);

// ---------------------------------------------------------------------------

double ac_prob(const ACParams& params, std::size_t y, double z, bool home);
double ac_expected_score(const ACParams& params, double z, bool home);
double ac_log_likelihood(const ACParams& params, std::size_t y, double z, bool home);
/// d_y - G(u): the derivative of the log-likelihood with respect to u.
double ac_score_residual(const ACParams& params, std::size_t y, double z, bool home);

/// alpha_y = log C(L-1, y), d_y = y/(L-1): the AC model whose expected score
/// equals logistic(u/(L-1)) exactly.
ACParams binomial_ac_params(std::size_t levels, double scale, double hfa);

enum class ConversionKind {
  base_change,
  logistic_to_gaussian_derivative,
  logistic_to_gaussian_moment,
  ac_to_logistic,
  error_correction,
};

/// Multiplicative scale factor: a model at scale s is approximated by the
/// target model at scale s * factor.
struct ScaleConversion {
  double factor;
  ConversionKind kind;

  ScaleConversion(double factor, ConversionKind kind);
  ScaleConversion inverse() const { return {1.0 / factor, kind}; }
  double apply(double scale) const { return scale * factor; }
};

/// [4 E_0[d^2] - 1]^{-1} with E_0 taken under the AC model at u = 0.
/// Matches the slopes of G^AC(z/s) and logistic(z/(s*beta)) at z = 0.
ScaleConversion beta_ac_to_logistic(std::span<const double> alpha, const OutcomeScale& scores);
ScaleConversion beta_ac_to_logistic(const ACParams& params);

/// ln(a): logistic(z/s) == generalized_logistic(z/(s ln a), a).
ScaleConversion beta_base_change(double base);

enum class GaussianMatching { derivative, moment };
/// 4/sqrt(2 pi) (slopes equal at 0) or pi/sqrt(3) (variances equal).
ScaleConversion beta_logistic_to_gaussian(GaussianMatching method = GaussianMatching::derivative);

/// HFA after moving to scale s*beta. eta*s is preserved.
struct HfaRescaling {
  double hfa;
  double beta;
  double scale(double s) const { return s * beta; }
};
HfaRescaling rescale_hfa(double hfa, double beta);

nlohmann::json to_json(const ACParams& params);
ACParams ac_params_from_json(const nlohmann::json& j);

}  // namespace gelo
