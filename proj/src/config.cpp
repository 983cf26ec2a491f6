#include "gelo/config.hpp"

#include <cmath>

#include "gelo/csv.hpp"
#include "gelo/errors.hpp"

namespace gelo {

namespace {

Window window_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("a window is [begin, end]");
  Window w;
  w.begin = j[0].get<std::size_t>();
  w.end = j[1].is_null() ? kUntilEnd : j[1].get<std::size_t>();
  return w;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

const char* expected_score_name(ExpectedScore k) {
  switch (k) {
    case ExpectedScore::logistic:
      return "logistic";
    case ExpectedScore::gaussian_cdf:
      return "gaussian_cdf";
    case ExpectedScore::generalized_logistic:
      return "generalized_logistic";
  }
  return "";
}

}  // namespace

double canonical_scale(double scale, double base) {
  return scale / beta_base_change(base).factor;
}

EngineConfig engine_config_from_json(const nlohmann::json& j, EngineConfig c) {
  try {
    c.scale = j.value("scale", c.scale);
    c.hfa = j.value("hfa", c.hfa);
    if (j.contains("scores")) {
      c.scores = OutcomeScale(j.at("scores").get<std::vector<double>>());
    } else if (j.contains("levels")) {
      c.scores = OutcomeScale::uniform(j.at("levels").get<std::size_t>());
    }
    const std::string rule = j.value("rule", std::string(std::holds_alternative<GEloRule>(c.rule) ? "gelo" : "elo"));
    if (rule == "elo") {
      EloRule e = std::holds_alternative<EloRule>(c.rule) ? std::get<EloRule>(c.rule) : EloRule{};
      const std::string kind = j.value("expected_score", std::string(expected_score_name(e.kind)));
      if (kind == "logistic") {
        e.kind = ExpectedScore::logistic;
      } else if (kind == "gaussian_cdf") {
        e.kind = ExpectedScore::gaussian_cdf;
      } else if (kind == "generalized_logistic") {
        e.kind = ExpectedScore::generalized_logistic;
      } else {
        throw ValidationError("unknown expected_score '" + kind + "'");
      }
      e.base = j.value("base", e.base);
      c.rule = e;
    } else if (rule == "gelo") {
      std::vector<double> alpha;
      if (j.contains("alpha")) {
        alpha = j.at("alpha").get<std::vector<double>>();
      } else if (const auto* g = std::get_if<GEloRule>(&c.rule)) {
        alpha = g->alpha;
      } else {
        const auto p = binomial_ac_params(c.scores.levels(), 1.0, 0.0);
        alpha.assign(p.alpha().begin(), p.alpha().end());
      }
      c.rule = GEloRule{std::move(alpha)};
    } else {
      throw ValidationError("unknown engine rule '" + rule + "'");
    }
    if (j.contains("step")) {
      c.default_step = j.at("step").is_null() ? std::nullopt
                                               : std::optional<double>(j.at("step").get<double>());
    }
    c.initial_skill = j.value("initial_skill", c.initial_skill);
    c.trajectory_stride = j.value("trajectory_stride", c.trajectory_stride);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed engine config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const EngineConfig& c) {
  const auto d = c.scores.scores();
  nlohmann::json j{{"scale", c.scale},
                   {"hfa", c.hfa},
                   {"scores", std::vector<double>(d.begin(), d.end())},
                   {"initial_skill", c.initial_skill},
                   {"trajectory_stride", c.trajectory_stride}};
  if (const auto* e = std::get_if<EloRule>(&c.rule)) {
    j["rule"] = "elo";
    j["expected_score"] = expected_score_name(e->kind);
    j["base"] = e->base;
  } else {
    j["rule"] = "gelo";
    j["alpha"] = std::get<GEloRule>(c.rule).alpha;
  }
  j["step"] = c.default_step ? nlohmann::json(*c.default_step) : nlohmann::json(nullptr);
  return j;
}

AppConfig preset_config(const std::string& name) {
  AppConfig c;
  c.preset = name;
  if (name == "example1" || name == "example2") {
    const auto steps = StepPolicy::uniform_per_match({10.0, 20.0, 30.0});
    auto p = name == "example1" ? example1_preset(steps) : example2_preset(steps);
    c.simulation = p.sim;
    c.seed = p.sim.seed;
    c.engine = p.engine;
    c.realizations = p.realizations;
    c.identify_method = Method::fully_adaptive;
    c.identify_window = Window{4000, 6000};
    return c;
  }
  if (name == "example4") {
    auto p = example4_preset(20.0);
    c.simulation = p.sim;
    c.seed = p.sim.seed;
    c.engine = p.engine;
    c.realizations = p.realizations;
    c.evaluation = example4_spec();
    return c;
  }
  if (name == "fifa") {
    const double s = canonical_scale(600.0, 10.0);
    c.engine = EngineConfig::elo(s, 0.0, OutcomeScale::uniform(3));
    DataConfig d;
    d.supplied_skills = true;
    d.rule = DiscretizationRule::ternary();
    c.data = d;
    c.evaluation.train = {2000, 4000};
    c.evaluation.test = {4000, kUntilEnd};
    c.evaluation.methods = {Method::conventional,    Method::simple_no_hfa,
                            Method::simple_with_hfa, Method::optimal_scaling,
                            Method::online_adaptive, Method::fully_adaptive};
    c.evaluation.online.window = 100;
    c.convergence_scale = s;
    c.checkpoints = {"2020-12-31", "2022-12-31", "2024-12-31"};
    c.convert = {600.0, 10.0, 0.0, std::nullopt};
    return c;
  }
  throw ValidationError("unknown preset '" + name + "'");
}

AppConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  AppConfig c;
  try {
    if (j.contains("preset")) c = preset_config(j.at("preset").get<std::string>());
    if (j.contains("simulation")) {
      nlohmann::json merged = c.simulation ? to_json(*c.simulation) : nlohmann::json::object();
      merged.merge_patch(j.at("simulation"));
      c.simulation = sim_config_from_json(merged);
      c.seed = c.simulation->seed;
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (c.simulation) c.simulation->seed = c.seed;
    if (j.contains("engine")) c.engine = engine_config_from_json(j.at("engine"), c.engine);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      DataConfig data = c.data.value_or(DataConfig{});
      if (d.contains("matches")) data.matches = resolve(base_dir, d.at("matches").get<std::string>());
      if (d.contains("cuts")) {
        data.rule = d.at("cuts").is_null()
                        ? std::nullopt
                        : std::optional(DiscretizationRule(d.at("cuts").get<std::vector<std::int64_t>>()));
      }
      data.supplied_skills = d.value("supplied_skills", data.supplied_skills);
      if (d.contains("initial_skills")) {
        data.initial_skills = resolve(base_dir, d.at("initial_skills").get<std::string>());
      }
      c.data = data;
    }
    if (j.contains("evaluation")) {
      const auto& e = j.at("evaluation");
      if (e.contains("train")) c.evaluation.train = window_from_json(e.at("train"));
      if (e.contains("test")) c.evaluation.test = window_from_json(e.at("test"));
      if (e.contains("methods")) {
        c.evaluation.methods.clear();
        for (const auto& m : e.at("methods")) {
          c.evaluation.methods.push_back(method_from_name(m.get<std::string>()));
        }
      }
      c.evaluation.online.window = e.value("online_window", c.evaluation.online.window);
      c.evaluation.online.mu = e.value("online_mu", c.evaluation.online.mu);
      c.evaluation.smoothing = e.value("smoothing", c.evaluation.smoothing);
    }
    if (j.contains("identify")) {
      const auto& i = j.at("identify");
      if (i.contains("method")) c.identify_method = method_from_name(i.at("method").get<std::string>());
      if (i.contains("window")) c.identify_window = window_from_json(i.at("window"));
    }
    if (j.contains("convergence")) {
      const auto& v = j.at("convergence");
      if (v.contains("scale")) c.convergence_scale = v.at("scale").get<double>();
      if (v.contains("checkpoints")) c.checkpoints = v.at("checkpoints").get<std::vector<std::string>>();
    }
    if (j.contains("convert")) {
      const auto& v = j.at("convert");
      c.convert.scale = v.value("scale", c.convert.scale);
      c.convert.base = v.value("base", c.convert.base);
      c.convert.hfa = v.value("hfa", c.convert.hfa);
      if (v.contains("alpha")) c.convert.alpha = v.at("alpha").get<std::vector<double>>();
    }
    c.realizations = j.value("realizations", c.realizations);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  if (c.realizations == 0) throw ValidationError("realizations must be >= 1");
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace gelo
