#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <mutex>
#include <numbers>
#include <random>

#include "gelo/csv.hpp"
#include "gelo/diagnostics.hpp"
#include "gelo/errors.hpp"
#include "gelo/simulation.hpp"

using namespace gelo;

TEST(Diagnostics, VarianceAndTimeConstant) {
  EXPECT_DOUBLE_EQ(asymptotic_variance(174.0, 20.0), 1740.0);
  EXPECT_DOUBLE_EQ(asymptotic_variance(174.0, 60.0), 5220.0);
  EXPECT_NEAR(time_constant(174.0, 20.0), 34.8, 1e-12);
  EXPECT_NEAR(time_constant(174.0, 60.0), 11.6, 1e-12);
  EXPECT_NEAR(2 * time_constant(174.0, 60.0), 23.2, 1e-12);
  EXPECT_NEAR(global_time_constant(174.0, 60.0, 30), 174.0, 1e-9);
  EXPECT_THROW(asymptotic_variance(-1.0, 20.0), ValidationError);
  EXPECT_THROW(time_constant(174.0, 0.0), ValidationError);
}

TEST(Diagnostics, ExpectedTrajectory) {
  EXPECT_DOUBLE_EQ(expected_trajectory(0.0, 100.0, 10.0, 0.0), 0.0);
  EXPECT_NEAR(expected_trajectory(0.0, 100.0, 10.0, 10.0), 100.0 * (1.0 - std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(expected_trajectory(50.0, -20.0, 3.0, 1e4), -20.0, 1e-12);
}

TEST(Diagnostics, SuperiorityProbability) {
  EXPECT_NEAR(superiority_probability(100.0, 1740.0), 0.95497734599276976565, 1e-14);
  EXPECT_DOUBLE_EQ(superiority_probability(0.0, 1740.0), 0.5);
  EXPECT_DOUBLE_EQ(superiority_probability(3.0, 0.0), 1.0);
}

TEST(Diagnostics, NoiseRatioByHand) {
  EXPECT_NEAR(noise_ratio(1740.0, 0.5 * 174.0 * 174.0), 1.1149425287356321839, 1e-15);
  EXPECT_NEAR(nominal_skill_variance(0.5, 174.0, 1.0), 15138.0, 1e-9);
  const std::vector<double> th{-1.0, 0.0, 1.0};
  EXPECT_NEAR(empirical_skill_variance(th, 2.0, 1.0), 8.0 / 3.0, 1e-12);
}

TEST(Diagnostics, EffectiveParamsReference) {
  const double vt = nominal_skill_variance(0.5, 174.0, 1.0);
  const auto k20 = effective_params(0.35, {1740.0, vt, 174.0});
  EXPECT_NEAR(k20.beta, 1.1372875290218463691, 1e-13);
  EXPECT_NEAR(k20.hfa, 0.34312333081951456574, 1e-13);
  EXPECT_NEAR(k20.scale, 174.0 * 1.1372875290218463691, 1e-10);
  const auto k60 = effective_params(0.35, {5220.0, vt, 174.0});
  EXPECT_NEAR(k60.beta, 1.410910704224153013, 1e-13);
  EXPECT_NEAR(k60.hfa, 0.33360697722627440212, 1e-13);
  const auto none = effective_params(0.35, {0.0, vt, 174.0});
  EXPECT_DOUBLE_EQ(none.beta, 1.0);
  EXPECT_DOUBLE_EQ(none.hfa, 0.35);
}

TEST(Diagnostics, PosteriorOfTrueDifference) {
  const auto g = posterior_true_diff(120.0, {1740.0, 15138.0, 174.0});
  const double a = 1.0 + 1740.0 / 15138.0;
  EXPECT_NEAR(g.mean, 120.0 / a, 1e-12);
  EXPECT_NEAR(g.variance, 2 * 1740.0 / a, 1e-9);
}

TEST(Diagnostics, GaussianCdfExpectationVsQuadratureProperty) {
  // Reference: 0.55212198006798152423 (mpmath) for (b, y, z, q) = (1.3, 0.4, -0.2, 0.8).
  EXPECT_NEAR(gaussian_cdf_expectation(1.3, 0.4, -0.2, 0.8), 0.55212198006798152423, 1e-15);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.2, 3.0), any(-2.0, 2.0);
  for (int k = 0; k < 30; ++k) {
    const double b = pos(rng), q = pos(rng), y = any(rng), z = any(rng);
    const double c = 1.0 / (q * std::sqrt(2.0 * std::numbers::pi));
    const double num = integrate(
        [&](double x) { return gaussian_cdf((x + z) / b) * c * std::exp(-0.5 * (x - y) * (x - y) / (q * q)); },
        y - 14.0 * q, y + 14.0 * q, 1e-13);
    EXPECT_NEAR(gaussian_cdf_expectation(b, y, z, q), num, 1e-8);
  }
}

TEST(Diagnostics, MarginalizedWinProbability) {
  const NoiseModel n{1740.0, 15138.0, 174.0};
  // Quadrature references from mpmath.
  EXPECT_NEAR(marginalized_win_prob(0.0, 0.35, n, MarginalPath::quadrature), 0.58455202465285907473, 1e-9);
  EXPECT_NEAR(marginalized_win_prob(100.0, 0.35, n, MarginalPath::quadrature), 0.69958286965772082453, 1e-9);
  EXPECT_NEAR(marginalized_win_prob(-250.0, 0.35, n, MarginalPath::quadrature), 0.28557021257775514775, 1e-9);
  for (double vbar : {1740.0, 5220.0}) {
    const NoiseModel m{vbar, 15138.0, 174.0};
    for (double z = -3 * 174.0; z <= 3 * 174.0; z += 29.0) {
      EXPECT_NEAR(marginalized_win_prob(z, 0.35, m), marginalized_win_prob(z, 0.35, m, MarginalPath::quadrature),
                  0.01);
    }
  }
}

TEST(Diagnostics, ConvergenceReportSinglePlayerByHand) {
  SkillState s;
  const auto i = s.index_of("x");
  for (int k = 0; k < 10; ++k) s.record_match(i, 20.0);
  const auto r = convergence_report(s, 174.0);
  ASSERT_EQ(r.players.size(), 1u);
  EXPECT_EQ(r.players[0].matches, 10u);
  EXPECT_NEAR(r.players[0].tau, 34.8, 1e-12);
  EXPECT_NEAR(r.players[0].lambda, 10.0 / 34.8, 1e-12);
  EXPECT_DOUBLE_EQ(r.vbar, 1740.0);
  EXPECT_DOUBLE_EQ(r.fraction_lambda_ge1, 0.0);
}

TEST(Diagnostics, ConvergenceReportFromMatchesWithCutoff) {
  std::vector<MatchRecord> ms;
  const char* dates[] = {"2019-05-01", "2020-03-01", "2021-07-01", "2023-01-01"};
  for (int k = 0; k < 4; ++k) {
    MatchRecord m{k, "a", k % 2 ? "b" : "c", 1, false};
    m.step = 10.0 * (k + 1);
    m.date = dates[k];
    ms.push_back(m);
  }
  const auto all = convergence_report(ms, 100.0);
  ASSERT_EQ(all.players.size(), 3u);
  EXPECT_EQ(all.players[0].matches, 4u);
  EXPECT_DOUBLE_EQ(all.players[0].mean_step, 25.0);
  EXPECT_DOUBLE_EQ(all.players[0].lambda, 4.0 / (400.0 / 25.0));
  // a: K=25, b: K=30, c: K=20.
  EXPECT_NEAR(all.vbar, 50.0 * (25.0 + 30.0 + 20.0) / 3.0, 1e-9);
  const auto early = convergence_report(ms, 100.0, std::string("2020-12-31"));
  EXPECT_EQ(early.players[0].matches, 2u);
  EXPECT_THROW(convergence_report(std::span<const MatchRecord>{}, 100.0), ValidationError);
}

TEST(Diagnostics, LambdaDistributionIsEmpiricalCdf) {
  ConvergenceReport r;
  for (double l : {0.5, 2.5, 0.5, 1.2}) r.players.push_back({"p", 1, 1.0, 1.0, l});
  EXPECT_DOUBLE_EQ(r.fraction_below(1.0), 0.5);
  const auto dir = std::filesystem::temp_directory_path() / "gelo_lambda_test";
  std::filesystem::create_directories(dir);
  write_lambda_distribution_csv(dir / "l.csv", r);
  const auto lines = csv::read_lines(dir / "l.csv");
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[1], "lambda,fraction_of_players");
  EXPECT_EQ(lines[2], "0.5,0.5");
  EXPECT_EQ(lines[3], "1.2,0.75");
  EXPECT_EQ(lines[4], "2.5,1");
  std::filesystem::remove_all(dir);
}

TEST(Diagnostics, TemporalVarianceByHand) {
  const std::vector<double> x{100.0, 1.0, 2.0, 3.0, 4.0};
  const auto t = temporal_variance(x, 4);
  EXPECT_DOUBLE_EQ(t.mean, 2.5);
  EXPECT_DOUBLE_EQ(t.variance, 1.25);
  EXPECT_THROW(temporal_variance(x, 6), ValidationError);
}

TEST(Diagnostics, IntegrateKnownValues) {
  EXPECT_NEAR(integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0), std::sqrt(std::numbers::pi),
              1e-11);
  EXPECT_NEAR(integrate([](double x) { return x * x; }, 0.0, 3.0), 9.0, 1e-12);
}

// Long converged runs of the binary league: per-player temporal variance over
// a window much longer than the time constant tracks sK/2.
TEST(Diagnostics, TemporalVarianceMonteCarlo) {
  SimConfig sim;
  sim.players = 10;
  sim.matches = 60000;
  sim.skill_variance = 0.05;
  sim.truth = ACParams(1.0, 0.0, {0.0, 0.0}, OutcomeScale::uniform(2));
  sim.steps = StepPolicy::constant(60.0);
  sim.seed = 21;
  const auto engine = EngineConfig::elo(174.0, 0.0, OutcomeScale::uniform(2));
  const std::size_t J = 8;
  const std::size_t W = 6000;
  std::mutex mu;
  double total = 0.0;
  std::size_t count = 0;
  std::size_t outside = 0;
  run_replications(sim, engine, J, [&](const Replication& rep) {
    double local = 0.0;
    std::size_t bad = 0;
    for (std::size_t m = 0; m < sim.players; ++m) {
      const auto series = player_series(rep.trajectory, m);
      const double v = temporal_variance(series, W).variance;
      local += v;
      bad += std::abs(v / 5220.0 - 1.0) > 0.35;
    }
    std::lock_guard lock(mu);
    total += local;
    count += sim.players;
    outside += bad;
  });
  EXPECT_EQ(outside, 0u);
  EXPECT_NEAR(total / static_cast<double>(count) / 5220.0, 1.0, 0.10);
}
