#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gelo/errors.hpp"
#include "gelo/outcome_model.hpp"

using namespace gelo;

namespace {

// Reference values computed at 40 significant digits with mpmath.
constexpr double kP3[] = {0.20036869558630369148, 0.22704747744663785288, 0.57258382696705845563};
constexpr double kG3 = 0.68610756569037738208;
constexpr double kP5[] = {0.30745900997502853425, 0.32000665020453465496, 0.1314125718254996939,
                          0.15732941272198022394, 0.083792355272956892948};
constexpr double kG5 = 0.35509644267639587948;

ACParams random_params(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> levels(2, 7);
  std::uniform_real_distribution<double> a(-2.0, 2.0);
  const std::size_t L = levels(rng);
  std::vector<double> alpha(L, 0.0);
  for (std::size_t y = 1; y + 1 < L; ++y) alpha[y] = a(rng);
  return ACParams(std::exp(a(rng)), a(rng) / 4.0, alpha, OutcomeScale::uniform(L));
}

}  // namespace

TEST(Logistic, StableInBothTails) {
  EXPECT_DOUBLE_EQ(logistic(0.0), 0.5);
  EXPECT_NEAR(logistic(-800.0), 0.0, 1e-300);
  EXPECT_EQ(logistic(800.0), 1.0);
  EXPECT_NEAR(logistic(2.0) + logistic(-2.0), 1.0, 1e-15);
  EXPECT_NEAR(logit(logistic(1.7)), 1.7, 1e-14);
}

TEST(Logistic, GeneralizedBaseMatchesRescaledLogistic) {
  for (double z : {-3.0, -0.4, 0.0, 0.9, 5.0}) {
    EXPECT_NEAR(generalized_logistic(z, 10.0), logistic(z * std::log(10.0)), 1e-15);
  }
  EXPECT_THROW(generalized_logistic(1.0, 1.0), ValidationError);
}

TEST(GaussianCdf, ReferenceValues) {
  EXPECT_NEAR(gaussian_cdf(0.3), 0.61791142218895263731, 1e-15);
  EXPECT_NEAR(gaussian_cdf(-2.5), 0.006209665325776135167, 1e-16);
  EXPECT_DOUBLE_EQ(gaussian_cdf(0.0), 0.5);
}

TEST(OutcomeScale, Validation) {
  EXPECT_THROW(OutcomeScale({0.0}), ValidationError);
  EXPECT_THROW(OutcomeScale({0.1, 1.0}), ValidationError);
  EXPECT_THROW(OutcomeScale({0.0, 0.6, 0.5, 1.0}), ValidationError);
  EXPECT_TRUE(OutcomeScale::uniform(5).is_symmetric());
  EXPECT_FALSE(OutcomeScale({0.0, 0.2, 1.0}).is_symmetric());
}

TEST(ACParams, RejectsBadInputs) {
  const auto sc = OutcomeScale::uniform(3);
  EXPECT_THROW(ACParams(0.0, 0.0, {0.0, 0.0, 0.0}, sc), ValidationError);
  EXPECT_THROW(ACParams(1.0, 0.0, {0.1, 0.0, 0.0}, sc), ValidationError);
  EXPECT_THROW(ACParams(1.0, 0.0, {0.0, 0.0}, sc), ValidationError);
  EXPECT_THROW(ACParams(1.0, NAN, {0.0, 0.0, 0.0}, sc), ValidationError);
}

TEST(ACParams, AsymmetricAlphaIsFlagged) {
  const ACParams sym(1.0, 0.0, {0.0, 0.3, 0.3, 0.0}, OutcomeScale::uniform(4));
  const ACParams asym(1.0, 0.0, {0.0, 0.3, -0.1, 0.0}, OutcomeScale::uniform(4));
  EXPECT_TRUE(sym.is_symmetric());
  EXPECT_FALSE(asym.is_symmetric());
}

TEST(ACParams, SymmetricExpansion) {
  EXPECT_EQ(free_alpha_count(2), 0u);
  EXPECT_EQ(free_alpha_count(3), 1u);
  EXPECT_EQ(free_alpha_count(4), 1u);
  EXPECT_EQ(free_alpha_count(5), 2u);
  const std::vector<double> free{0.4, -0.2};
  EXPECT_EQ(expand_symmetric_alpha(free, 5), (std::vector<double>{0.0, 0.4, -0.2, 0.4, 0.0}));
  const std::vector<double> one{0.7};
  EXPECT_EQ(expand_symmetric_alpha(one, 4), (std::vector<double>{0.0, 0.7, 0.7, 0.0}));
}

TEST(ACModel, TernaryReferenceValues) {
  const auto p = ACParams::symmetric(1.0, 0.35, std::vector<double>{-0.4}, OutcomeScale::uniform(3));
  for (std::size_t y = 0; y < 3; ++y) EXPECT_NEAR(ac_prob(p, y, 0.7, true), kP3[y], 1e-15);
  EXPECT_NEAR(ac_expected_score(p, 0.7, true), kG3, 1e-15);
  EXPECT_NEAR(ac_log_likelihood(p, 1, 0.7, true), std::log(kP3[1]), 1e-14);
}

TEST(ACModel, NonUniformScoresReferenceValues) {
  const ACParams p(2.0, 0.0, {0.0, 0.3, -0.2, 0.5, 0.0}, OutcomeScale({0.0, 0.2, 0.5, 0.9, 1.0}));
  for (std::size_t y = 0; y < 5; ++y) EXPECT_NEAR(ac_prob(p, y, -2.6, false), kP5[y], 1e-15);
  EXPECT_NEAR(ac_expected_score(p, -2.6, false), kG5, 1e-15);
}

TEST(ACModel, NormalizationAndSymmetryProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> zd(-30.0, 30.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto p = random_params(rng);
    std::vector<double> a(p.alpha().begin(), p.alpha().end());
    const std::size_t L = a.size();
    for (std::size_t y = 1; y + 1 < L; ++y) a[L - 1 - y] = a[y];
    p = ACParams(p.scale(), p.hfa(), a, p.scores());
    for (int k = 0; k < 25; ++k) {
      const double z = zd(rng) * p.scale();
      double sum = 0.0;
      for (std::size_t y = 0; y < L; ++y) {
        sum += ac_prob(p, y, z, false);
        EXPECT_NEAR(ac_prob(p, y, z, false), ac_prob(p, L - 1 - y, -z, false), 1e-12);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      EXPECT_NEAR(ac_expected_score(p, z, false) + ac_expected_score(p, -z, false), 1.0, 1e-12);
    }
  }
}

TEST(ACModel, ExtremeArgumentsStayFinite) {
  const auto p = binomial_ac_params(5, 1.0, 0.0);
  EXPECT_NEAR(ac_prob(p, 4, 650.0, false), 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(ac_log_likelihood(p, 0, 650.0, false)));
  EXPECT_THROW(ac_prob(p, 0, 701.0, false), NumericalError);
  EXPECT_THROW(ac_prob(p, 5, 0.0, false), ValidationError);
}

TEST(ACModel, ScoreResidualIsLogLikelihoodDerivative) {
  const ACParams p(1.5, 0.2, {0.0, -0.3, 0.6, 0.0}, OutcomeScale({0.0, 0.3, 0.8, 1.0}));
  const double h = 1e-5;
  for (std::size_t y = 0; y < 4; ++y) {
    for (double z : {-2.0, 0.1, 1.7}) {
      const double num = (ac_log_likelihood(p, y, z + h, true) - ac_log_likelihood(p, y, z - h, true)) /
                         (2.0 * h) * p.scale();
      EXPECT_NEAR(ac_score_residual(p, y, z, true), num, 1e-8);
    }
  }
}

TEST(ACModel, ScoreVarianceIsSlopeOfExpectedScore) {
  const std::vector<double> alpha{0.0, 0.4, -0.2, 0.0};
  const std::vector<double> d{0.0, 0.25, 0.7, 1.0};
  const double h = 1e-5;
  for (double u : {-1.0, 0.0, 2.3}) {
    const double num = (ac_expected_score_at(alpha, d, u + h) - ac_expected_score_at(alpha, d, u - h)) / (2 * h);
    EXPECT_NEAR(ac_score_variance_at(alpha, d, u), num, 1e-9);
  }
}

TEST(ACModel, BinaryCaseIsLogistic) {
  const ACParams p(3.0, 0.0, {0.0, 0.0}, OutcomeScale::uniform(2));
  for (double z : {-10.0, -1.0, 0.0, 2.5, 40.0}) {
    EXPECT_EQ(ac_expected_score(p, z, false), logistic(z / 3.0));
  }
}

TEST(ACModel, BinomialAlphaGivesRescaledLogistic) {
  for (std::size_t L = 2; L <= 8; ++L) {
    const auto p = binomial_ac_params(L, 1.0, 0.0);
    EXPECT_NEAR(p.alpha()[1 % L], L > 2 ? std::log(static_cast<double>(L - 1)) : 0.0, 1e-14);
    for (double z = -20.0; z <= 20.0; z += 0.37) {
      EXPECT_NEAR(ac_expected_score(p, z, false), logistic(z / static_cast<double>(L - 1)), 1e-13);
    }
  }
}

TEST(ScaleConversion, Constants) {
  EXPECT_NEAR(beta_base_change(10.0).factor, 2.302585092994045684, 1e-15);
  EXPECT_NEAR(beta_logistic_to_gaussian().factor, 1.595769121605730712, 1e-15);
  EXPECT_NEAR(beta_logistic_to_gaussian(GaussianMatching::moment).factor, 1.813799364234217851, 1e-15);
  EXPECT_NEAR(beta_base_change(std::numbers::e).factor, 1.0, 1e-15);
  EXPECT_THROW(beta_base_change(1.0), ValidationError);
  const auto inv = beta_base_change(10.0).inverse();
  EXPECT_NEAR(inv.apply(600.0), 260.57668914195109659, 1e-12);
}

TEST(ScaleConversion, AcToLogisticReference) {
  const std::vector<double> alpha{0.0, -0.4, 0.0};
  EXPECT_NEAR(beta_ac_to_logistic(alpha, OutcomeScale::uniform(3)).factor, 1.3351600230178196504, 1e-14);
  // Binomial alpha reproduces logistic(u/(L-1)) so the factor is exactly L-1.
  for (std::size_t L = 2; L <= 6; ++L) {
    EXPECT_NEAR(beta_ac_to_logistic(binomial_ac_params(L, 1.0, 0.0)).factor, static_cast<double>(L - 1),
                1e-12);
  }
}

TEST(ScaleConversion, AcToLogisticMatchesSlopeAtZero) {
  const ACParams p(1.0, 0.0, {0.0, 0.9, 0.0}, OutcomeScale::uniform(3));
  const double b = beta_ac_to_logistic(p).factor;
  const double h = 1e-6;
  const double slope = (ac_expected_score(p, h, false) - ac_expected_score(p, -h, false)) / (2 * h);
  EXPECT_NEAR(slope, 0.25 / b, 1e-9);
}

TEST(ScaleConversion, HfaRescalingPreservesSkillPoints) {
  const auto r = rescale_hfa(0.35, 1.4);
  EXPECT_NEAR(r.hfa * r.scale(174.0), 0.35 * 174.0, 1e-12);
  EXPECT_THROW(rescale_hfa(0.1, 0.0), ValidationError);
}

TEST(ACParams, JsonRoundTrip) {
  const ACParams p(260.0, 0.7, {0.0, -0.6, 0.0}, OutcomeScale::uniform(3));
  const auto q = ac_params_from_json(to_json(p));
  EXPECT_EQ(q.scale(), p.scale());
  EXPECT_EQ(q.hfa(), p.hfa());
  EXPECT_TRUE(std::equal(q.alpha().begin(), q.alpha().end(), p.alpha().begin()));
  EXPECT_EQ(q.scores(), p.scores());
  EXPECT_THROW(ac_params_from_json({{"s", 1.0}}), ValidationError);
}
