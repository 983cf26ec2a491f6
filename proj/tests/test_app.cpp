#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelo/config.hpp"
#include "gelo/csv.hpp"
#include "gelo/errors.hpp"
#include "gelo/match_io.hpp"
#include "gelo/pipelines.hpp"
#include "gelo/simulation.hpp"

using namespace gelo;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("gelo_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

int cli(const std::string& args) {
  const char* exe = std::getenv("GELO_CLI");
  if (!exe) return -1;
  const int rc = std::system((std::string(exe) + " " + args + " 2>/dev/null").c_str());
  return WEXITSTATUS(rc);
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '\n') {
      if (i > start) out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

TEST(Csv, SplitAndQuote) {
  EXPECT_EQ(csv::split("a,\"b, c\",,\"d\"\"e\""), (std::vector<std::string>{"a", "b, c", "", "d\"e"}));
  EXPECT_EQ(csv::split(csv::quote("x,\"y\"")).front(), "x,\"y\"");
  EXPECT_EQ(csv::quote("plain"), "plain");
}

TEST(Csv, HeaderVersioning) {
  EXPECT_EQ(csv::header_line("matches"), "# gelo-matches v1.0");
  EXPECT_FALSE(csv::check_header("date,home_id", "matches").has_value());
  EXPECT_EQ(csv::check_header("# gelo-matches v1.3", "matches")->minor, 3);
  EXPECT_THROW(csv::check_header("# gelo-matches v2.0", "matches"), ValidationError);
  EXPECT_THROW(csv::check_header("# gelo-snapshot v1.0", "matches"), ValidationError);
}

TEST(Csv, NumberParsing) {
  EXPECT_EQ(csv::parse_double(" 2.5 ", "x"), 2.5);
  EXPECT_THROW(csv::parse_double("2.5x", "x"), ValidationError);
  EXPECT_EQ(csv::parse_int("-3", "x"), -3);
  EXPECT_TRUE(csv::parse_bool("1", "x"));
  EXPECT_THROW(csv::parse_bool("yes please", "x"), ValidationError);
  EXPECT_EQ(csv::format_double(0.1), "0.1");
  EXPECT_EQ(csv::parse_double(csv::format_double(1.0 / 3.0), "x"), 1.0 / 3.0);
}

TEST(Discretization, FiveLevelRule) {
  const auto r = DiscretizationRule::five_level();
  EXPECT_EQ(r.levels(), 5u);
  EXPECT_EQ(r.outcome(-3), 0u);
  EXPECT_EQ(r.outcome(0), 2u);
  EXPECT_EQ(r.outcome(4), 4u);
  EXPECT_EQ(r.outcome(-2), 1u);
  EXPECT_EQ(r.outcome(2), 3u);
  const auto t = DiscretizationRule::ternary();
  EXPECT_EQ(t.outcome(-1), 0u);
  EXPECT_EQ(t.outcome(0), 1u);
  EXPECT_EQ(t.outcome(5), 2u);
  EXPECT_THROW(DiscretizationRule({0, 2}), ValidationError);
  EXPECT_THROW(DiscretizationRule({1, 0}), ValidationError);
}

TEST(Ingest, WellFormedFile) {
  const std::vector<std::string> lines{"date,home_id,away_id,outcome,neutral,step_k",
                                       "2020-01-01,A,B,2,0,20", "2020-01-02,B,C,1,1,10",
                                       "2020-01-03,C,A,0,0,40"};
  const auto r = parse_matches(lines, 3);
  ASSERT_EQ(r.matches.size(), 3u);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.matches[1].home, "B");
  EXPECT_FALSE(r.matches[1].home_venue);
  EXPECT_TRUE(r.matches[0].home_venue);
  EXPECT_EQ(*r.matches[2].step, 40.0);
  EXPECT_EQ(r.matches[2].t, 2);
}

TEST(Ingest, PointsWithRule) {
  const std::vector<std::string> lines{"home_id,away_id,home_points,away_points", "A,B,0,3", "A,B,1,1",
                                       "B,A,5,1"};
  const auto r = parse_matches(lines, 5, DiscretizationRule::five_level());
  ASSERT_EQ(r.matches.size(), 3u);
  EXPECT_EQ(r.matches[0].outcome, 0u);
  EXPECT_EQ(r.matches[1].outcome, 2u);
  EXPECT_EQ(r.matches[2].outcome, 4u);
  EXPECT_THROW(parse_matches(lines, 5), ValidationError);
}

TEST(Ingest, RowErrorsCarryLineNumbers) {
  const std::vector<std::string> zero_step{"home_id,away_id,outcome,step_k", "A,B,1,20", "A,B,1,0"};
  try {
    parse_matches(zero_step, 3);
    FAIL() << "expected rejection";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  const std::vector<std::string> bad_outcome{"home_id,away_id,outcome", "A,B,3"};
  EXPECT_THROW(parse_matches(bad_outcome, 3), ValidationError);
  const std::vector<std::string> half_skills{"home_id,away_id,outcome,home_skill", "A,B,1,1500"};
  EXPECT_THROW(parse_matches(half_skills, 3), ValidationError);
  const std::vector<std::string> no_outcome{"home_id,away_id", "A,B"};
  EXPECT_THROW(parse_matches(no_outcome, 3), ValidationError);
}

TEST(Ingest, UnsortedDatesWarnAndStableSort) {
  const std::vector<std::string> lines{"date,home_id,away_id,outcome", "2021-05-01,A,B,2",
                                       "2021-03-01,C,D,0", "2021-05-01,E,F,1", "2021-03-01,C,D,1"};
  const auto r = parse_matches(lines, 3);
  ASSERT_EQ(r.matches.size(), 4u);
  EXPECT_EQ(r.matches[0].outcome, 0u);
  EXPECT_EQ(r.matches[1].outcome, 1u);
  EXPECT_EQ(r.matches[2].home, "A");
  EXPECT_EQ(r.matches[3].home, "E");
  EXPECT_EQ(r.matches[3].t, 3);
  ASSERT_EQ(r.warnings.size(), 2u);
}

TEST(Ingest, SimulationRoundTripIsExact) {
  auto p = example4_preset(20.0);
  p.sim.matches = 2000;
  p.sim.home_fraction = 0.6;
  p.sim.steps = StepPolicy::uniform_per_match({10.0, 20.0, 30.0});
  const auto sim = simulate(p.sim);
  TempDir dir("roundtrip");
  write_matches_csv(dir.path() / "m.csv", sim.matches);
  const auto back = ingest_matches(dir.path() / "m.csv", 3);
  EXPECT_TRUE(back.warnings.empty());
  EXPECT_EQ(back.matches, sim.matches);
}

TEST(Ingest, RejectsUnknownMajorVersion) {
  const std::vector<std::string> lines{"# gelo-matches v2.0", "home_id,away_id,outcome", "A,B,1"};
  EXPECT_THROW(parse_matches(lines, 3), ValidationError);
}

TEST(Config, PresetsAndOverrides) {
  const auto f = preset_config("fifa");
  EXPECT_NEAR(f.engine.scale, 260.5766891419511, 1e-9);
  EXPECT_EQ(f.evaluation.train, (Window{2000, 4000}));
  EXPECT_EQ(f.evaluation.test.end, kUntilEnd);
  EXPECT_EQ(f.checkpoints.size(), 3u);
  const auto c = config_from_json(nlohmann::json::parse(
      R"({"preset":"example4","seed":9,"simulation":{"matches":500},"engine":{"step":60},
          "evaluation":{"methods":["conventional","ground-truth"]}})"));
  EXPECT_EQ(c.simulation->seed, 9u);
  EXPECT_EQ(c.simulation->matches, 500u);
  EXPECT_EQ(*c.engine.default_step, 60.0);
  EXPECT_EQ(c.engine.scale, 174.0);
  EXPECT_EQ(c.evaluation.methods.size(), 2u);
  EXPECT_THROW(preset_config("nope"), ValidationError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"engine":{"scale":-1}})")), ValidationError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"evaluation":{"train":[1]}})")), ValidationError);
}

TEST(Pipelines, SimulateThenRankPreservesTotals) {
  TempDir dir("simrank");
  auto c = preset_config("example4");
  c.simulation->matches = 1500;
  pipeline_simulate(c, dir.path());
  AppConfig r = c;
  r.simulation.reset();
  r.data = DataConfig{dir.path() / "matches.csv", std::nullopt, false, std::nullopt};
  pipeline_rank(r, dir.path());
  const auto snap = read_snapshot_csv(dir.path() / "snapshot.csv");
  EXPECT_NEAR(snap.sum_of_skills(), 0.0, 1e-9);
  EXPECT_EQ(snap.size(), 30u);
  EXPECT_TRUE(fs::exists(dir.path() / "trajectory.csv"));
  const auto ranked = rank_matches(r);
  const auto direct = rank_matches(c);
  for (std::size_t t = 0; t < ranked.samples.size(); ++t) ASSERT_EQ(ranked.samples[t].z, direct.samples[t].z);
}

TEST(Pipelines, SuppliedSkillsSkipTheEngine) {
  TempDir dir("supplied");
  write(dir.path() / "m.csv",
        "date,home_id,away_id,home_points,away_points,neutral,step_k,home_skill,away_skill\n"
        "2020-01-01,A,B,2,0,0,25,1600,1500\n"
        "2020-01-02,B,C,1,1,1,10,1490,1400\n");
  AppConfig c = preset_config("fifa");
  c.data->matches = dir.path() / "m.csv";
  const auto r = rank_matches(c);
  ASSERT_EQ(r.samples.size(), 2u);
  EXPECT_EQ(r.samples[0].z, 100.0);
  EXPECT_EQ(r.samples[0].y, 2u);
  EXPECT_EQ(r.samples[1].z, 90.0);
  EXPECT_EQ(r.samples[1].y, 1u);
  EXPECT_FALSE(r.trajectory.has_value());
}

TEST(Pipelines, IdentifyWritesModel) {
  TempDir dir("identify");
  auto c = preset_config("example4");
  c.simulation->matches = 3000;
  c.evaluation.train = {1000, 2000};
  pipeline_identify(c, dir.path());
  const auto m = identified_model_from_json(nlohmann::json::parse(csv::read_file(dir.path() / "model.json")));
  EXPECT_EQ(m.method, "fully-adaptive");
  EXPECT_EQ(m.train_window, (Window{1000, 2000}));
  c.identify_method = Method::online_adaptive;
  pipeline_identify(c, dir.path());
  EXPECT_EQ(lines_of(csv::read_file(dir.path() / "gamma_trace.csv")).size(), 2u + 2000u);
  c.identify_method = Method::ground_truth;
  EXPECT_THROW(pipeline_identify(c, dir.path()), ValidationError);
}

TEST(Pipelines, ConvergenceCheckpointsGiveOneFileEach) {
  TempDir dir("convergence");
  std::string body = "date,home_id,away_id,outcome,step_k\n";
  const char* years[] = {"2019", "2020", "2021", "2022", "2023", "2024"};
  for (int k = 0; k < 60; ++k) {
    body += std::string(years[k / 10]) + "-06-" + (k % 10 < 9 ? "0" : "") + std::to_string(k % 10 + 1) + ",T" +
            std::to_string(k % 4) + ",T" + std::to_string((k + 1) % 4) + ",1," + (k % 2 ? "10" : "50") + "\n";
  }
  write(dir.path() / "m.csv", body);
  AppConfig c;
  c.data = DataConfig{dir.path() / "m.csv", std::nullopt, false, std::nullopt};
  c.engine = EngineConfig::elo(100.0, 0.0, OutcomeScale::uniform(3));
  c.checkpoints = {"2020-12-31", "2022-12-31", "2024-12-31"};
  pipeline_convergence(c, dir.path());
  for (const char* f : {"convergence.csv", "convergence.json", "lambda_distribution.csv",
                        "lambda_distribution_2020-12-31.csv", "lambda_distribution_2022-12-31.csv",
                        "lambda_distribution_2024-12-31.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  const auto rows = lines_of(csv::read_file(dir.path() / "convergence.csv"));
  EXPECT_EQ(rows.size(), 2u + 4u);
}

TEST(Pipelines, ConvertScale) {
  TempDir dir("convert");
  AppConfig c;
  c.convert = {600.0, 10.0, 0.1, std::vector<double>{0.0, -0.4, 0.0}};
  pipeline_convert_scale(c, dir.path());
  const auto j = nlohmann::json::parse(csv::read_file(dir.path() / "conversions.json"));
  EXPECT_NEAR(j["canonical_scale"].get<double>(), 260.5766891419511, 1e-9);
  EXPECT_NEAR(j["beta_ac_to_logistic"].get<double>(), 1.3351600230178196504, 1e-13);
}

TEST(Cli, ExitCodesAndDeterminism) {
  if (!std::getenv("GELO_CLI")) GTEST_SKIP() << "GELO_CLI not set";
  TempDir dir("cli");
  const auto cfg = dir.path() / "c.json";
  write(cfg, R"({"preset":"example4","simulation":{"matches":2500},
                 "evaluation":{"train":[1000,2000],"test":[2000,null]}})");
  const auto out1 = dir.path() / "a";
  const auto out2 = dir.path() / "b";
  EXPECT_EQ(cli("evaluate --config " + cfg.string() + " --out-dir " + out1.string()), 0);
  EXPECT_EQ(cli("evaluate --config " + cfg.string() + " --out-dir " + out2.string()), 0);
  EXPECT_EQ(csv::read_file(out1 / "report.json"), csv::read_file(out2 / "report.json"));
  EXPECT_EQ(cli("simulate --config " + cfg.string() + " --seed 3 --out-dir " + out1.string()), 0);
  EXPECT_EQ(cli("simulate --config " + cfg.string() + " --seed 3 --out-dir " + out2.string()), 0);
  EXPECT_EQ(csv::read_file(out1 / "matches.csv"), csv::read_file(out2 / "matches.csv"));
  EXPECT_EQ(cli("rank --preset nothing --out-dir " + out1.string()), 1);
  EXPECT_EQ(cli("rank --out-dir " + out1.string()), 1);
  EXPECT_EQ(cli("bogus"), 1);
  write(cfg, R"({"preset":"example4","simulation":{"matches":500},
                 "evaluation":{"train":[1000,2000],"test":[2000,null]}})");
  EXPECT_EQ(cli("evaluate --config " + cfg.string() + " --out-dir " + out1.string()), 1);
}

TEST(Cli, NumericalFailureExitsWithTwo) {
  if (!std::getenv("GELO_CLI")) GTEST_SKIP() << "GELO_CLI not set";
  TempDir dir("cli_num");
  write(dir.path() / "m.csv", "home_id,away_id,outcome,step_k\nA,B,1,10\nB,A,1,10\nA,B,1,10\n");
  write(dir.path() / "c.json", R"({"engine":{"scale":100,"levels":3},"data":{"matches":"m.csv"},
                                   "identify":{"method":"fully-adaptive","window":[0,3]}})");
  EXPECT_EQ(cli("identify --config " + (dir.path() / "c.json").string() + " --out-dir " + dir.path().string()), 2);
}

TEST(Cli, MissingMethodInputsGiveNullRowsAndZeroExit) {
  if (!std::getenv("GELO_CLI")) GTEST_SKIP() << "GELO_CLI not set";
  TempDir dir("cli_null");
  auto c = preset_config("example4");
  c.simulation->matches = 2500;
  const auto sim = simulate(*c.simulation);
  write_matches_csv(dir.path() / "m.csv", sim.matches);
  write(dir.path() / "c.json", R"({"engine":{"scale":174,"levels":3,"step":20},"data":{"matches":"m.csv"},
                                   "evaluation":{"train":[1000,2000],"test":[2000,null]}})");
  EXPECT_EQ(cli("evaluate --config " + (dir.path() / "c.json").string() + " --out-dir " + dir.path().string()), 0);
  const auto j = nlohmann::json::parse(csv::read_file(dir.path() / "report.json"));
  std::size_t nulls = 0;
  for (const auto& row : j["methods"]) nulls += row["log_score"].is_null();
  EXPECT_EQ(nulls, 2u);
}
