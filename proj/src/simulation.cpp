#include "gelo/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "gelo/errors.hpp"

namespace gelo {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw ValidationError(message);
}

std::seed_seq make_seed(std::uint64_t seed, std::uint64_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream),
                       static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
}

std::vector<double> skills_from(const SimConfig& config, std::uint64_t stream) {
  Rng rng(config.skill_seed, stream);
  const double sd = std::sqrt(config.skill_variance);
  std::vector<double> theta(config.players);
  for (auto& v : theta) v = sd * rng.normal();
  return theta;
}

const char* kind_name(StepPolicy::Kind k) {
  switch (k) {
    case StepPolicy::Kind::constant:
      return "constant";
    case StepPolicy::Kind::uniform_per_match:
      return "uniform_per_match";
    case StepPolicy::Kind::uniform_per_realization:
      return "uniform_per_realization";
  }
  return "";
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  auto seq = make_seed(seed, stream);
  engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  // Marsaglia polar method.
  for (;;) {
    const double x = 2.0 * uniform() - 1.0;
    const double y = 2.0 * uniform() - 1.0;
    const double r = x * x + y * y;
    if (r > 0.0 && r < 1.0) return x * std::sqrt(-2.0 * std::log(r) / r);
  }
}

std::size_t Rng::below(std::size_t n) {
  require(n > 0, "empty range");
  const std::uint64_t bound = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    const std::uint64_t v = engine_();
    if (v < limit) return static_cast<std::size_t>(v % bound);
  }
}

StepPolicy::StepPolicy(Kind kind, std::vector<double> values)
    : kind_(kind), values_(std::move(values)) {
  require(!values_.empty(), "step policy needs at least one value");
  for (double k : values_) require(std::isfinite(k) && k > 0.0, "steps must be > 0");
}

StepPolicy StepPolicy::constant(double step) { return StepPolicy(Kind::constant, {step}); }

StepPolicy StepPolicy::uniform_per_match(std::vector<double> values) {
  return StepPolicy(Kind::uniform_per_match, std::move(values));
}

StepPolicy StepPolicy::uniform_per_realization(std::vector<double> values) {
  return StepPolicy(Kind::uniform_per_realization, std::move(values));
}

double StepPolicy::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

void SimConfig::validate() const {
  require(players >= 2, "need at least two players");
  require(matches >= 1, "need at least one match");
  require(std::isfinite(skill_variance) && skill_variance > 0.0, "skill variance must be > 0");
  require(home_fraction >= 0.0 && home_fraction <= 1.0, "home fraction must be in [0, 1]");
}

std::string player_name(std::size_t index) { return "p" + std::to_string(index); }

std::vector<double> generate_skills(const SimConfig& config) {
  config.validate();
  return skills_from(config, 0);
}

Pairing schedule_pair(std::size_t players, Rng& rng) {
  require(players >= 2, "need at least two players");
  const std::size_t i = rng.below(players);
  std::size_t j = rng.below(players - 1);
  if (j >= i) ++j;
  return {i, j};
}

std::size_t sample_outcome(const ACParams& truth, double true_diff, bool home, Rng& rng) {
  const std::size_t n = truth.levels();
  double probs[16];
  std::vector<double> heap;
  std::span<double> p;
  if (n <= 16) {
    p = std::span<double>(probs, n);
  } else {
    heap.resize(n);
    p = heap;
  }
  ac_distribution(truth.alpha(), truth.scores().scores(), truth.argument(true_diff, home), p);
  const double u = rng.uniform();
  double c = 0.0;
  for (std::size_t y = 0; y + 1 < n; ++y) {
    c += p[y];
    if (u < c) return y;
  }
  return n - 1;
}

SimOutput simulate(const SimConfig& config, std::span<const double> true_skills,
                   std::uint64_t stream) {
  config.validate();
  require(true_skills.size() == config.players, "true skill vector has the wrong size");
  Rng rng(config.seed, stream);
  const auto steps = config.steps.values();
  double realization_step = steps[0];
  if (config.steps.kind() == StepPolicy::Kind::uniform_per_realization) {
    realization_step = steps[rng.below(steps.size())];
  }
  SimOutput out;
  out.true_skills.assign(true_skills.begin(), true_skills.end());
  out.matches.reserve(config.matches);
  out.true_diff.reserve(config.matches);
  for (std::size_t t = 0; t < config.matches; ++t) {
    const auto pair = schedule_pair(config.players, rng);
    bool home = config.home_fraction >= 1.0;
    if (config.home_fraction > 0.0 && config.home_fraction < 1.0) {
      home = rng.uniform() < config.home_fraction;
    }
    double k = realization_step;
    if (config.steps.kind() == StepPolicy::Kind::uniform_per_match) {
      k = steps[rng.below(steps.size())];
    }
    const double zs = true_skills[pair.home] - true_skills[pair.away];
    MatchRecord m;
    m.t = static_cast<std::int64_t>(t);
    m.home = player_name(pair.home);
    m.away = player_name(pair.away);
    m.outcome = sample_outcome(config.truth, zs, home, rng);
    m.home_venue = home;
    m.step = k;
    out.matches.push_back(std::move(m));
    out.true_diff.push_back(zs);
  }
  return out;
}

SimOutput simulate(const SimConfig& config) {
  const auto theta = generate_skills(config);
  return simulate(config, theta, 1);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void run_replications(const SimConfig& config, const EngineConfig& engine, std::size_t realizations,
                      const std::function<void(const Replication&)>& visitor, bool redraw_skills,
                      std::size_t threads) {
  config.validate();
  const auto shared = generate_skills(config);
  parallel_for(
      realizations,
      [&](std::size_t r) {
        const auto theta = redraw_skills ? skills_from(config, r + 1) : shared;
        const auto sim = simulate(config, theta, r + 1);
        RatingEngine eng(engine);
        for (std::size_t m = 0; m < config.players; ++m) eng.state().index_of(player_name(m));
        const auto tr = eng.run(sim.matches);
        visitor(Replication{r, sim, tr, eng});
      },
      threads);
}

std::uint64_t default_skill_seed() { return 12; }

ExperimentPreset example1_preset(StepPolicy steps) {
  SimConfig sim;
  sim.players = 30;
  sim.matches = 4000;
  sim.skill_variance = 0.5;
  sim.truth = ACParams(1.0, 0.35, {0.0, 0.0}, OutcomeScale::uniform(2));
  sim.steps = std::move(steps);
  sim.home_fraction = 1.0;
  sim.seed = 1;
  sim.skill_seed = default_skill_seed();
  auto engine = EngineConfig::elo(174.0, 0.35, OutcomeScale::uniform(2));
  engine.trajectory_stride = 20;
  return {"example1", std::move(sim), std::move(engine), 200};
}

ExperimentPreset example2_preset(StepPolicy steps) {
  auto p = example1_preset(std::move(steps));
  p.name = "example2";
  p.sim.matches = 6000;
  p.engine.trajectory_stride = 0;
  return p;
}

ExperimentPreset example4_preset(double step) {
  SimConfig sim;
  sim.players = 30;
  sim.matches = 12001;
  sim.skill_variance = 0.5;
  sim.truth = ACParams::symmetric(1.0, 0.35, std::vector<double>{-0.4}, OutcomeScale::uniform(3));
  sim.steps = StepPolicy::constant(step);
  sim.home_fraction = 1.0;
  sim.seed = 4;
  sim.skill_seed = default_skill_seed();
  auto engine = EngineConfig::elo(174.0, 0.0, OutcomeScale::uniform(3));
  return {"example4", std::move(sim), std::move(engine), 200};
}

nlohmann::json to_json(const SimConfig& config) {
  const auto v = config.steps.values();
  return {{"players", config.players},
          {"matches", config.matches},
          {"skill_variance", config.skill_variance},
          {"truth", to_json(config.truth)},
          {"steps", {{"kind", kind_name(config.steps.kind())},
                     {"values", std::vector<double>(v.begin(), v.end())}}},
          {"home_fraction", config.home_fraction},
          {"seed", config.seed},
          {"skill_seed", config.skill_seed}};
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig c;
  try {
    c.players = j.value("players", c.players);
    c.matches = j.value("matches", c.matches);
    c.skill_variance = j.value("skill_variance", c.skill_variance);
    if (j.contains("truth")) c.truth = ac_params_from_json(j.at("truth"));
    if (j.contains("steps")) {
      const auto& s = j.at("steps");
      const auto kind = s.value("kind", std::string("constant"));
      auto values = s.at("values").get<std::vector<double>>();
      if (kind == "constant") {
        require(values.size() == 1, "constant step policy takes one value");
        c.steps = StepPolicy::constant(values[0]);
      } else if (kind == "uniform_per_match") {
        c.steps = StepPolicy::uniform_per_match(std::move(values));
      } else if (kind == "uniform_per_realization") {
        c.steps = StepPolicy::uniform_per_realization(std::move(values));
      } else {
        throw ValidationError("unknown step policy '" + kind + "'");
      }
    }
    c.home_fraction = j.value("home_fraction", c.home_fraction);
    c.seed = j.value("seed", c.seed);
    c.skill_seed = j.value("skill_seed", c.skill_seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed simulation config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json sim_sidecar_json(const SimConfig& config, const SimOutput& output) {
  auto skills = nlohmann::json::object();
  for (std::size_t i = 0; i < output.true_skills.size(); ++i) {
    skills[player_name(i)] = output.true_skills[i];
  }
  return {{"config", to_json(config)}, {"true_skills", std::move(skills)}};
}

}  // namespace gelo
