#include "gelo/pipelines.hpp"

#include <cmath>
#include <sstream>

#include "gelo/csv.hpp"
#include "gelo/diagnostics.hpp"
#include "gelo/errors.hpp"
#include "gelo/experiments.hpp"
#include "gelo/match_io.hpp"

namespace gelo {

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  csv::write_atomic(path, j.dump(2) + "\n");
}

std::vector<Sample> samples_from(std::span<const double> z, std::span<const MatchRecord> matches) {
  std::vector<Sample> out(matches.size());
  for (std::size_t t = 0; t < matches.size(); ++t) {
    out[t] = {z[t], matches[t].outcome, matches[t].home_venue};
  }
  return out;
}

Window resolve(Window w, std::size_t n) {
  if (w.end == kUntilEnd) w.end = n;
  if (w.end > n || w.size() == 0) {
    throw ValidationError("window [" + std::to_string(w.begin) + ", " + std::to_string(w.end) +
                          ") does not fit " + std::to_string(n) + " matches");
  }
  return w;
}

bool is_ensemble(const AppConfig& config) {
  return !config.data && config.simulation && config.realizations > 1;
}

std::string safe_name(std::string s) {
  for (char& c : s) {
    if (c == '/' || c == ' ' || c == ':') c = '-';
  }
  return s;
}

}  // namespace

RankedData load_matches(const AppConfig& config) {
  RankedData r;
  if (config.data) {
    if (config.data->matches.empty()) throw ValidationError("config names no match file");
    auto in = ingest_matches(config.data->matches, config.engine.scores.levels(), config.data->rule);
    r.matches = std::move(in.matches);
    r.warnings = std::move(in.warnings);
    return r;
  }
  if (!config.simulation) throw ValidationError("config has neither data nor a simulation");
  auto sim = simulate(*config.simulation);
  r.matches = sim.matches;
  r.sim = std::move(sim);
  return r;
}

RankedData rank_matches(const AppConfig& config) {
  auto r = load_matches(config);
  if (r.matches.empty()) throw ValidationError("no matches to rank");
  if (config.data && config.data->supplied_skills) {
    std::vector<double> z;
    z.reserve(r.matches.size());
    SkillState state(config.engine.initial_skill);
    for (const auto& m : r.matches) {
      if (!m.home_skill || !m.away_skill) {
        throw ValidationError("match " + std::to_string(m.t) + " lacks supplied skills");
      }
      z.push_back(*m.home_skill - *m.away_skill);
      state.set_skill(m.home, *m.home_skill);
      state.set_skill(m.away, *m.away_skill);
    }
    r.samples = samples_from(z, r.matches);
    r.state = std::move(state);
    return r;
  }
  RatingEngine engine(config.engine);
  if (config.data && config.data->initial_skills) {
    const auto init = read_snapshot_csv(*config.data->initial_skills, config.engine.initial_skill);
    for (std::size_t i = 0; i < init.size(); ++i) engine.state().set_skill(init.id(i), init.skill(i));
  }
  if (r.sim) {
    for (std::size_t m = 0; m < r.sim->true_skills.size(); ++m) {
      engine.state().index_of(player_name(m));
    }
  }
  Trajectory tr;
  try {
    tr = engine.run(r.matches);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("ranking failed: ") + e.what());
  }
  r.samples = samples_from(tr.z, r.matches);
  r.state = engine.state();
  r.trajectory = std::move(tr);
  return r;
}

EvaluationSpec resolve_spec(EvaluationSpec spec, std::size_t n) {
  spec.train = resolve(spec.train, n);
  spec.test = resolve(spec.test, n);
  spec.validate(n);
  return spec;
}

EvaluationData evaluation_data(const AppConfig& config, const RankedData& ranked) {
  EvaluationData d;
  d.scale = config.engine.scale;
  d.scores = config.engine.scores;
  d.ranked = ranked.samples;
  if (ranked.sim && config.simulation) {
    const auto& truth = config.simulation->truth;
    d.truth = truth;
    d.truth_samples = samples_from(ranked.sim->true_diff, ranked.matches);
    if (truth.scores() == config.engine.scores) {
      RatingEngine g(EngineConfig::gelo(truth.with_scale(config.engine.scale), config.engine.default_step));
      const auto tr = g.run(ranked.matches);
      d.gelo = samples_from(tr.z, ranked.matches);
    }
  }
  return d;
}

IdentifiedModel identify(const AppConfig& config, const RankedData& ranked,
                         std::optional<OnlineTrace>* trace) {
  const Window w = resolve(config.identify_window.value_or(config.evaluation.train),
                           ranked.samples.size());
  const auto train = std::span<const Sample>(ranked.samples).subspan(w.begin, w.size());
  const auto& scores = config.engine.scores;
  const double s = config.engine.scale;
  if (config.identify_method == Method::online_adaptive) {
    const auto freqs = outcome_frequencies(train, scores, config.evaluation.smoothing);
    const auto alpha = simple_alpha(freqs);
    const double eta = simple_eta(freqs, alpha, scores);
    OnlineOptions opt = config.evaluation.online;
    opt.gamma0 = 1.0 / simple_beta(alpha, scores);
    const auto stream = std::span<const Sample>(ranked.samples).subspan(w.begin);
    auto t = online_gamma(stream, alpha, eta, s, scores, opt);
    IdentifiedModel m;
    m.method = method_name(Method::online_adaptive);
    m.alpha = alpha;
    m.eta = eta;
    m.beta = 1.0 / t.gamma.back();
    m.train_window = w;
    m.training_size = w.size();
    if (trace) *trace = std::move(t);
    return m;
  }
  auto m = identify_on_window(config.identify_method, train, s, scores, config.evaluation.smoothing);
  m.train_window = w;
  m.training_size = w.size();
  if (m.loglik == 0.0) m.loglik = pseudo_loglik(train, s, m.alpha, scores, m.eta, m.gamma());
  return m;
}

Warnings pipeline_simulate(const AppConfig& config, const std::filesystem::path& out_dir) {
  if (!config.simulation) throw ValidationError("simulate needs a simulation section or preset");
  const auto sim = simulate(*config.simulation);
  write_matches_csv(out_dir / "matches.csv", sim.matches);
  write_json(out_dir / "simulation.json", sim_sidecar_json(*config.simulation, sim));
  return {};
}

Warnings pipeline_rank(const AppConfig& config, const std::filesystem::path& out_dir) {
  auto r = rank_matches(config);
  write_snapshot_csv(out_dir / "snapshot.csv", *r.state);
  write_json(out_dir / "snapshot.json", snapshot_json(*r.state));
  if (r.trajectory) write_trajectory_csv(out_dir / "trajectory.csv", *r.trajectory, *r.state);
  std::ostringstream z;
  z << csv::header_line("differences") << "\nt,home_id,away_id,z,outcome,neutral\n";
  for (std::size_t t = 0; t < r.matches.size(); ++t) {
    const auto& m = r.matches[t];
    z << t << ',' << csv::quote(m.home) << ',' << csv::quote(m.away) << ','
      << csv::format_double(r.samples[t].z) << ',' << m.outcome << ',' << (m.home_venue ? 0 : 1)
      << '\n';
  }
  csv::write_atomic(out_dir / "differences.csv", z.str());
  return r.warnings;
}

Warnings pipeline_identify(const AppConfig& config, const std::filesystem::path& out_dir) {
  auto r = rank_matches(config);
  std::optional<OnlineTrace> trace;
  const auto model = identify(config, r, &trace);
  write_json(out_dir / "model.json", to_json(model));
  if (trace) {
    write_gamma_trace_csv(out_dir / "gamma_trace.csv", *trace, model.train_window.begin);
    if (trace->clamped) r.warnings.push_back("online gamma was clamped at its lower bound");
  }
  return r.warnings;
}

Warnings pipeline_evaluate(const AppConfig& config, const std::filesystem::path& out_dir) {
  Warnings warnings;
  if (config.preset == "example1" || config.preset == "example2") {
    if (!config.simulation) throw ValidationError("scale-fit experiment needs a simulation");
    ExperimentPreset p{config.preset, *config.simulation, config.engine, config.realizations};
    const Window w = resolve(config.identify_window.value_or(Window{4000, 6000}), p.sim.matches);
    const auto e = run_scale_fit_experiment(p, w, config.realizations, config.threads);
    write_json(out_dir / "scale_fit.json", to_json(e));
    if (e.failures > 0) warnings.push_back(std::to_string(e.failures) + " fits failed");
    return warnings;
  }
  if (is_ensemble(config)) {
    ExperimentPreset p{config.preset, *config.simulation, config.engine, config.realizations};
    const auto spec = resolve_spec(config.evaluation, p.sim.matches);
    const auto report = run_comparison(spec, p, config.realizations, config.threads);
    write_json(out_dir / "report.json", to_json(report));
    csv::write_atomic(out_dir / "report.txt", format_table(report));
    for (const auto& m : report.methods) {
      if (m.failures > 0) {
        warnings.push_back(method_name(m.method) + ": " + std::to_string(m.failures) +
                           " failed realizations (" + m.first_error + ")");
      }
    }
    return warnings;
  }
  auto r = rank_matches(config);
  warnings = r.warnings;
  const auto spec = resolve_spec(config.evaluation, r.samples.size());
  const auto data = evaluation_data(config, r);
  const auto results = evaluate_methods(spec, data);
  std::vector<std::vector<MethodResult>> one{results};
  const auto report = aggregate(one, spec.methods);
  write_json(out_dir / "report.json", {{"methods", to_json(results)}});
  csv::write_atomic(out_dir / "report.txt", format_table(report));
  for (const auto& res : results) {
    if (!res.error.empty()) warnings.push_back(method_name(res.method) + ": " + res.error);
    if (res.trace) {
      write_gamma_trace_csv(out_dir / "gamma_trace.csv", *res.trace, spec.train.begin);
    }
    if (res.model && res.method != Method::online_adaptive &&
        res.method != Method::gelo_reference && res.method != Method::ground_truth) {
      const auto test = std::span<const Sample>(data.ranked).subspan(spec.test.begin, spec.test.size());
      const auto ll = log_likelihoods(test, *res.model, data.scale, data.scores);
      std::ostringstream out;
      out << csv::header_line("loglik") << "\nt,loglik\n";
      for (std::size_t i = 0; i < ll.size(); ++i) {
        out << spec.test.begin + i << ',' << csv::format_double(ll[i]) << '\n';
      }
      csv::write_atomic(out_dir / ("loglik_" + method_name(res.method) + ".csv"), out.str());
    }
  }
  return warnings;
}

Warnings pipeline_convergence(const AppConfig& config, const std::filesystem::path& out_dir) {
  Warnings warnings;
  const double scale = config.convergence_scale.value_or(config.engine.scale);
  if (is_ensemble(config)) {
    auto engine = config.engine;
    if (engine.trajectory_stride == 0) engine.trajectory_stride = 20;
    ExperimentPreset p{config.preset, *config.simulation, engine, config.realizations};
    const auto burn_in = static_cast<std::int64_t>(config.simulation->matches / 2);
    const auto e = run_convergence_experiment(p, config.realizations, burn_in, 100, config.threads);
    write_json(out_dir / "convergence_experiment.json", to_json(e));
    std::ostringstream out;
    out << csv::header_line("ensemble-trajectory") << "\nt,player_id,ensemble_mean,expected\n";
    for (std::size_t k = 0; k < e.checkpoints.size(); ++k) {
      for (std::size_t m = 0; m < e.limit.size(); ++m) {
        out << e.checkpoints[k] << ',' << player_name(m) << ','
            << csv::format_double(e.ensemble_mean[k][m]) << ','
            << csv::format_double(e.expected[k][m]) << '\n';
      }
    }
    csv::write_atomic(out_dir / "ensemble_trajectory.csv", out.str());
    return warnings;
  }
  auto r = load_matches(config);
  warnings = r.warnings;
  if (r.matches.empty()) throw ValidationError("convergence report needs at least one match");
  const auto report = convergence_report(r.matches, scale);
  write_json(out_dir / "convergence.json", to_json(report));
  write_convergence_csv(out_dir / "convergence.csv", report);
  write_lambda_distribution_csv(out_dir / "lambda_distribution.csv", report);
  for (const auto& cp : config.checkpoints) {
    const auto at = convergence_report(r.matches, scale, cp);
    write_lambda_distribution_csv(out_dir / ("lambda_distribution_" + safe_name(cp) + ".csv"), at);
  }
  return warnings;
}

Warnings pipeline_convert_scale(const AppConfig& config, const std::filesystem::path& out_dir) {
  const auto& c = config.convert;
  if (!(c.scale > 0.0)) throw ValidationError("scale must be > 0");
  const double canonical = canonical_scale(c.scale, c.base);
  const auto to_gauss = beta_logistic_to_gaussian(GaussianMatching::derivative);
  const auto to_gauss_m = beta_logistic_to_gaussian(GaussianMatching::moment);
  nlohmann::json j{{"input", {{"scale", c.scale}, {"base", c.base}, {"hfa", c.hfa}}},
                   {"beta_e_to_base", beta_base_change(c.base).factor},
                   {"canonical_scale", canonical},
                   {"gaussian_scale_derivative", to_gauss.apply(canonical)},
                   {"gaussian_scale_moment", to_gauss_m.apply(canonical)},
                   {"beta_logistic_to_gaussian_derivative", to_gauss.factor},
                   {"beta_logistic_to_gaussian_moment", to_gauss_m.factor},
                   {"hfa_skill_points", c.hfa * canonical}};
  if (c.alpha) {
    const auto scores = OutcomeScale::uniform(c.alpha->size());
    const auto b = beta_ac_to_logistic(*c.alpha, scores);
    const auto h = rescale_hfa(c.hfa, b.factor);
    j["beta_ac_to_logistic"] = b.factor;
    j["logistic_scale_of_ac"] = b.apply(canonical);
    j["logistic_hfa_of_ac"] = h.hfa;
  }
  write_json(out_dir / "conversions.json", j);
  return {};
}

}  // namespace gelo
