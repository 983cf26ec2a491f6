#include "gelo/outcome_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gelo/errors.hpp"

namespace gelo {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

void check_argument(double u) {
  if (!std::isfinite(u) || std::abs(u) > kMaxCanonicalArgument) {
    throw NumericalError("AC argument out of range: " + std::to_string(u));
  }
}

void check_shapes(std::span<const double> alpha, std::span<const double> scores) {
  require(alpha.size() == scores.size() && alpha.size() >= 2,
          "alpha and scores must have the same length >= 2");
}

double max_exponent(std::span<const double> alpha, std::span<const double> scores, double u) {
  double m = alpha[0] + scores[0] * u;
  for (std::size_t l = 1; l < alpha.size(); ++l) m = std::max(m, alpha[l] + scores[l] * u);
  return m;
}

}  // namespace

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) {
  require(p > 0.0 && p < 1.0, "logit requires p in (0, 1)");
  return std::log(p / (1.0 - p));
}

double gaussian_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double generalized_logistic(double z, double base) {
  require(base > 1.0 && std::isfinite(base), "logistic base must be > 1");
  return logistic(z * std::log(base));
}

OutcomeScale::OutcomeScale(std::vector<double> scores) : scores_(std::move(scores)) {
  require(scores_.size() >= 2, "an outcome scale needs at least two levels");
  require(scores_.front() == 0.0 && scores_.back() == 1.0, "scores must start at 0 and end at 1");
  for (std::size_t y = 1; y < scores_.size(); ++y) {
    require(std::isfinite(scores_[y]) && scores_[y] > scores_[y - 1],
            "scores must be strictly increasing");
  }
}

OutcomeScale OutcomeScale::uniform(std::size_t levels) {
  require(levels >= 2, "an outcome scale needs at least two levels");
  std::vector<double> d(levels);
  for (std::size_t y = 0; y < levels; ++y) {
    d[y] = static_cast<double>(y) / static_cast<double>(levels - 1);
  }
  return OutcomeScale(std::move(d));
}

double OutcomeScale::score(std::size_t y) const {
  require(y < scores_.size(), "outcome index out of range");
  return scores_[y];
}

bool OutcomeScale::is_symmetric(double tol) const noexcept {
  const std::size_t n = scores_.size();
  for (std::size_t y = 0; y < n; ++y) {
    if (std::abs(scores_[y] + scores_[n - 1 - y] - 1.0) > tol) return false;
  }
  return true;
}

ACParams::ACParams(double scale, double hfa, std::vector<double> alpha, OutcomeScale scores)
    : scale_(scale), hfa_(hfa), alpha_(std::move(alpha)), scores_(std::move(scores)) {
  require(std::isfinite(scale_) && scale_ > 0.0, "scale must be positive and finite");
  require(std::isfinite(hfa_), "home-field advantage must be finite");
  require(alpha_.size() == scores_.levels(), "alpha length must equal the number of levels");
  require(alpha_.front() == 0.0 && alpha_.back() == 0.0, "alpha_0 and alpha_{L-1} must be 0");
  for (double a : alpha_) require(std::isfinite(a), "alpha entries must be finite");
  const std::size_t n = alpha_.size();
  symmetric_ = scores_.is_symmetric();
  for (std::size_t y = 0; y < n && symmetric_; ++y) {
    if (std::abs(alpha_[y] - alpha_[n - 1 - y]) > 1e-12) symmetric_ = false;
  }
}

ACParams ACParams::symmetric(double scale, double hfa, std::span<const double> free_alpha,
                             OutcomeScale scores) {
  auto alpha = expand_symmetric_alpha(free_alpha, scores.levels());
  return ACParams(scale, hfa, std::move(alpha), std::move(scores));
}

double ACParams::argument(double z, bool home) const {
  return z / scale_ + (home ? hfa_ : 0.0);
}

ACParams ACParams::with_scale(double scale) const {
  return ACParams(scale, hfa_, alpha_, scores_);
}

ACParams ACParams::with_hfa(double hfa) const { return ACParams(scale_, hfa, alpha_, scores_); }

std::size_t free_alpha_count(std::size_t levels) {
  require(levels >= 2, "an outcome scale needs at least two levels");
  return (levels - 1) / 2;
}

std::vector<double> expand_symmetric_alpha(std::span<const double> free_alpha,
                                           std::size_t levels) {
  require(free_alpha.size() == free_alpha_count(levels),
          "expected ceil((L-2)/2) free alpha values");
  std::vector<double> alpha(levels, 0.0);
  for (std::size_t k = 0; k < free_alpha.size(); ++k) {
    alpha[k + 1] = free_alpha[k];
    alpha[levels - 2 - k] = free_alpha[k];
  }
  return alpha;
}

double ac_distribution(std::span<const double> alpha, std::span<const double> scores, double u,
                       std::span<double> probs) {
  check_shapes(alpha, scores);
  require(probs.size() == alpha.size(), "output span has the wrong length");
  check_argument(u);
  const double m = max_exponent(alpha, scores, u);
  double sum = 0.0;
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    probs[l] = std::exp(alpha[l] + scores[l] * u - m);
    sum += probs[l];
  }
  for (double& p : probs) p /= sum;
  return m + std::log(sum);
}

double ac_log_prob_at(std::span<const double> alpha, std::span<const double> scores,
                      std::size_t y, double u) {
  check_shapes(alpha, scores);
  require(y < alpha.size(), "outcome index out of range");
  check_argument(u);
  const double m = max_exponent(alpha, scores, u);
  double sum = 0.0;
  for (std::size_t l = 0; l < alpha.size(); ++l) sum += std::exp(alpha[l] + scores[l] * u - m);
  return alpha[y] + scores[y] * u - m - std::log(sum);
}

double ac_expected_score_at(std::span<const double> alpha, std::span<const double> scores,
                            double u) {
  check_shapes(alpha, scores);
  check_argument(u);
  const double m = max_exponent(alpha, scores, u);
  double sum = 0.0;
  double weighted = 0.0;
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    const double w = std::exp(alpha[l] + scores[l] * u - m);
    sum += w;
    weighted += scores[l] * w;
  }
  return weighted / sum;
}

double ac_score_variance_at(std::span<const double> alpha, std::span<const double> scores,
                            double u) {
  std::vector<double> p(alpha.size());
  ac_distribution(alpha, scores, u, p);
  double mean = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) mean += scores[l] * p[l];
  double var = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) var += p[l] * (scores[l] - mean) * (scores[l] - mean);
  return var;
}

double ac_prob(const ACParams& params, std::size_t y, double z, bool home) {
  return std::exp(ac_log_likelihood(params, y, z, home));
}

double ac_expected_score(const ACParams& params, double z, bool home) {
  return ac_expected_score_at(params.alpha(), params.scores().scores(), params.argument(z, home));
}

double ac_log_likelihood(const ACParams& params, std::size_t y, double z, bool home) {
  return ac_log_prob_at(params.alpha(), params.scores().scores(), y, params.argument(z, home));
}

double ac_score_residual(const ACParams& params, std::size_t y, double z, bool home) {
  return params.scores().score(y) - ac_expected_score(params, z, home);
}

ACParams binomial_ac_params(std::size_t levels, double scale, double hfa) {
  require(levels >= 2, "an outcome scale needs at least two levels");
  const double n = static_cast<double>(levels - 1);
  std::vector<double> alpha(levels);
  for (std::size_t y = 0; y < levels; ++y) {
    const double k = static_cast<double>(y);
    alpha[y] = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  }
  alpha.front() = 0.0;
  alpha.back() = 0.0;
  return ACParams(scale, hfa, std::move(alpha), OutcomeScale::uniform(levels));
}

ScaleConversion::ScaleConversion(double f, ConversionKind k) : factor(f), kind(k) {
  require(std::isfinite(factor) && factor > 0.0, "scale conversion factor must be positive");
}

ScaleConversion beta_ac_to_logistic(std::span<const double> alpha, const OutcomeScale& scores) {
  check_shapes(alpha, scores.scores());
  double num = 0.0;
  double den = 0.0;
  const double m = *std::max_element(alpha.begin(), alpha.end());
  for (std::size_t l = 0; l < alpha.size(); ++l) {
    const double w = std::exp(alpha[l] - m);
    const double d = scores.score(l);
    num += d * d * w;
    den += w;
  }
  const double denom = 4.0 * num / den - 1.0;
  if (!(denom > 0.0)) {
    throw NumericalError("AC model has no logistic-equivalent scale (4 E[d^2] <= 1)");
  }
  return {1.0 / denom, ConversionKind::ac_to_logistic};
}

ScaleConversion beta_ac_to_logistic(const ACParams& params) {
  return beta_ac_to_logistic(params.alpha(), params.scores());
}

ScaleConversion beta_base_change(double base) {
  require(base > 1.0 && std::isfinite(base), "logistic base must be > 1");
  return {std::log(base), ConversionKind::base_change};
}

ScaleConversion beta_logistic_to_gaussian(GaussianMatching method) {
  if (method == GaussianMatching::moment) {
    return {std::numbers::pi / std::numbers::sqrt3, ConversionKind::logistic_to_gaussian_moment};
  }
  return {4.0 / std::sqrt(2.0 * std::numbers::pi), ConversionKind::logistic_to_gaussian_derivative};
}

HfaRescaling rescale_hfa(double hfa, double beta) {
  require(std::isfinite(hfa), "home-field advantage must be finite");
  require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
  return {hfa / beta, beta};
}

nlohmann::json to_json(const ACParams& params) {
  const auto a = params.alpha();
  const auto d = params.scores().scores();
  return {{"L", params.levels()},
          {"s", params.scale()},
          {"eta", params.hfa()},
          {"alpha", std::vector<double>(a.begin(), a.end())},
          {"delta", std::vector<double>(d.begin(), d.end())}};
}

ACParams ac_params_from_json(const nlohmann::json& j) {
  try {
    const auto levels = j.at("L").get<std::size_t>();
    auto alpha = j.at("alpha").get<std::vector<double>>();
    std::vector<double> delta;
    if (j.contains("delta")) {
      delta = j.at("delta").get<std::vector<double>>();
    } else {
      const auto d = OutcomeScale::uniform(levels).scores();
      delta.assign(d.begin(), d.end());
    }
    require(alpha.size() == levels && delta.size() == levels, "L disagrees with alpha/delta length");
    return ACParams(j.at("s").get<double>(), j.value("eta", 0.0), std::move(alpha),
                    OutcomeScale(std::move(delta)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed ACParams JSON: ") + e.what());
  }
}

}  // namespace gelo
