#include "gelo/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gelo/errors.hpp"

namespace gelo {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

std::span<const Sample> slice(const std::vector<Sample>& v, const Window& w) {
  require(w.end <= v.size(), "window exceeds the sample range");
  return std::span<const Sample>(v).subspan(w.begin, w.size());
}

IdentifiedModel make_model(std::string method, std::vector<double> alpha, double eta, double beta,
                           const Window& train) {
  IdentifiedModel m;
  m.method = std::move(method);
  m.alpha = std::move(alpha);
  m.eta = eta;
  m.beta = beta;
  m.train_window = train;
  m.training_size = train.size();
  return m;
}

std::vector<Sample> to_samples(std::span<const double> z, std::span<const MatchRecord> matches) {
  std::vector<Sample> out(matches.size());
  for (std::size_t t = 0; t < matches.size(); ++t) {
    out[t] = {z[t], matches[t].outcome, matches[t].home_venue};
  }
  return out;
}

std::string cell(const Summary& s, bool with_std) {
  char buf[64];
  if (s.count == 0) return "-";
  if (with_std && s.count > 1) {
    std::snprintf(buf, sizeof buf, "(%.3f, %.3f)", s.mean, s.std);
  } else {
    std::snprintf(buf, sizeof buf, "%.3f", s.mean);
  }
  return buf;
}

}  // namespace

double log_score(std::span<const Sample> test, const IdentifiedModel& model, double scale,
                 const OutcomeScale& scores) {
  require(!test.empty(), "empty test window");
  const std::vector<double> gamma(test.size(), model.gamma());
  return log_score(test, model.alpha, model.eta, gamma, scale, scores);
}

double log_score(std::span<const Sample> test, std::span<const double> alpha, double eta,
                 std::span<const double> gamma, double scale, const OutcomeScale& scores) {
  require(!test.empty(), "empty test window");
  require(gamma.size() == test.size(), "one gamma per test sample required");
  require(std::isfinite(scale) && scale > 0.0, "scale must be > 0");
  const auto d = scores.scores();
  double total = 0.0;
  for (std::size_t t = 0; t < test.size(); ++t) {
    const auto& s = test[t];
    const double u = gamma[t] * s.z / scale + (s.home ? eta : 0.0);
    total += ac_log_prob_at(alpha, d, s.y, u);
  }
  return -total / static_cast<double>(test.size());
}

std::vector<double> log_likelihoods(std::span<const Sample> test, const IdentifiedModel& model,
                                    double scale, const OutcomeScale& scores) {
  const auto d = scores.scores();
  std::vector<double> out;
  out.reserve(test.size());
  for (const auto& s : test) {
    const double u = s.z / (scale * model.beta) + (s.home ? model.eta : 0.0);
    out.push_back(ac_log_prob_at(model.alpha, d, s.y, u));
  }
  return out;
}

IdentifiedModel conventional_model(const OutcomeScale& scores) {
  const std::size_t levels = scores.levels();
  const auto p = binomial_ac_params(levels, 1.0, 0.0);
  IdentifiedModel m;
  m.method = "conventional";
  m.alpha.assign(p.alpha().begin(), p.alpha().end());
  m.eta = 0.0;
  m.beta = 1.0 / static_cast<double>(levels - 1);
  return m;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::conventional:
      return "conventional";
    case Method::simple_no_hfa:
      return "simple-no-hfa";
    case Method::simple_with_hfa:
      return "simple-with-hfa";
    case Method::optimal_scaling:
      return "optimal-scaling";
    case Method::online_adaptive:
      return "online-adaptive";
    case Method::fully_adaptive:
      return "fully-adaptive";
    case Method::gelo_reference:
      return "gelo-reference";
    case Method::ground_truth:
      return "ground-truth";
  }
  return "";
}

Method method_from_name(const std::string& name) {
  for (auto m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  throw ValidationError("unknown evaluation method '" + name + "'");
}

std::vector<Method> all_methods() {
  return {Method::conventional,    Method::simple_no_hfa,  Method::simple_with_hfa,
          Method::optimal_scaling, Method::online_adaptive, Method::fully_adaptive,
          Method::gelo_reference,  Method::ground_truth};
}

void EvaluationSpec::validate(std::size_t n) const {
  require(train.size() > 0, "empty training window");
  require(test.size() > 0, "empty test window");
  require(train.end <= test.begin, "test window must start after the training window ends");
  require(test.end <= n, "test window exceeds the number of matches");
  require(!methods.empty(), "no methods requested");
  require(smoothing >= 0.0, "smoothing must be >= 0");
}

IdentifiedModel identify_on_window(Method method, std::span<const Sample> train, double scale,
                                   const OutcomeScale& scores, double smoothing) {
  require(!train.empty(), "empty training window");
  const std::string name = method_name(method);
  if (method == Method::conventional) {
    auto m = conventional_model(scores);
    m.training_size = train.size();
    return m;
  }
  if (method == Method::fully_adaptive) {
    FitOptions opt;
    const auto freqs = outcome_frequencies(train, scores, smoothing);
    opt.alpha = simple_alpha(freqs);
    auto m = fit_full(train, scale, scores, opt);
    m.method = name;
    return m;
  }
  if (method != Method::simple_no_hfa && method != Method::simple_with_hfa &&
      method != Method::optimal_scaling) {
    throw ValidationError("method '" + name + "' cannot be identified from a window alone");
  }
  const auto freqs = outcome_frequencies(train, scores, smoothing);
  const auto alpha = simple_alpha(freqs);
  const double beta = simple_beta(alpha, scores);
  if (method == Method::simple_no_hfa) {
    return make_model(name, alpha, 0.0, beta, {0, train.size()});
  }
  const double eta = simple_eta(freqs, alpha, scores);
  if (method == Method::simple_with_hfa) {
    return make_model(name, alpha, eta, beta, {0, train.size()});
  }
  FitOptions opt;
  opt.fit_alpha = false;
  opt.fit_eta = false;
  opt.alpha = alpha;
  opt.eta = eta;
  opt.gamma = 1.0 / beta;
  auto m = fit_full(train, scale, scores, opt);
  m.method = name;
  return m;
}

std::vector<MethodResult> evaluate_methods(const EvaluationSpec& spec, const EvaluationData& data) {
  spec.validate(data.ranked.size());
  const auto& scores = data.scores;
  const double s = data.scale;
  const auto train = slice(data.ranked, spec.train);
  const auto test = slice(data.ranked, spec.test);

  std::vector<MethodResult> out;
  for (const Method method : spec.methods) {
    MethodResult r{method, std::nullopt, std::nullopt, std::nullopt, {}};
    try {
      const std::string name = method_name(method);
      switch (method) {
        case Method::conventional:
        case Method::simple_no_hfa:
        case Method::simple_with_hfa:
        case Method::optimal_scaling:
        case Method::fully_adaptive: {
          auto m = identify_on_window(method, train, s, scores, spec.smoothing);
          m.train_window = spec.train;
          r.log_score = log_score(test, m, s, scores);
          r.model = std::move(m);
          break;
        }
        case Method::online_adaptive: {
          const auto freqs = outcome_frequencies(train, scores, spec.smoothing);
          const auto alpha = simple_alpha(freqs);
          const double eta = simple_eta(freqs, alpha, scores);
          OnlineOptions opt = spec.online;
          opt.gamma0 = 1.0 / simple_beta(alpha, scores);
          const auto stream = std::span<const Sample>(data.ranked).subspan(
              spec.train.begin, spec.test.end - spec.train.begin);
          auto trace = online_gamma(stream, alpha, eta, s, scores, opt);
          const auto gamma =
              std::span<const double>(trace.gamma).subspan(spec.test.begin - spec.train.begin);
          double beta_sum = 0.0;
          for (double g : gamma) beta_sum += 1.0 / g;
          auto m = make_model(name, alpha, eta, beta_sum / static_cast<double>(gamma.size()),
                              spec.train);
          r.log_score = log_score(test, alpha, eta, gamma, s, scores);
          r.model = std::move(m);
          r.trace = std::move(trace);
          break;
        }
        case Method::gelo_reference: {
          if (!data.gelo || !data.truth) {
            throw ValidationError("gelo-reference needs a G-Elo ranking and the true model");
          }
          const auto gtrain = slice(*data.gelo, spec.train);
          const auto gtest = slice(*data.gelo, spec.test);
          FitOptions opt;
          opt.fit_alpha = false;
          opt.fit_eta = false;
          const auto a = data.truth->alpha();
          opt.alpha = std::vector<double>(a.begin(), a.end());
          opt.eta = data.truth->hfa();
          opt.gamma = 1.0;
          auto m = fit_full(gtrain, s, scores, opt);
          m.method = name;
          m.train_window = spec.train;
          r.log_score = log_score(gtest, m, s, scores);
          r.model = std::move(m);
          break;
        }
        case Method::ground_truth: {
          if (!data.truth_samples || !data.truth) {
            throw ValidationError("ground-truth needs the true skill differences");
          }
          const auto ttest = slice(*data.truth_samples, spec.test);
          const auto a = data.truth->alpha();
          auto m = make_model(name, std::vector<double>(a.begin(), a.end()), data.truth->hfa(), 1.0,
                              spec.train);
          m.training_size = 0;
          r.log_score = log_score(ttest, m, data.truth->scale(), scores);
          r.model = std::move(m);
          break;
        }
      }
    } catch (const std::exception& e) {
      r.model.reset();
      r.log_score.reset();
      r.trace.reset();
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

const MethodSummary& EvaluationReport::at(Method m) const {
  for (const auto& s : methods) {
    if (s.method == m) return s;
  }
  throw ValidationError("method '" + method_name(m) + "' not in report");
}

std::size_t EvaluationReport::warnings() const {
  std::size_t n = 0;
  for (const auto& m : methods) n += m.failures;
  return n;
}

EvaluationReport aggregate(std::span<const std::vector<MethodResult>> realizations,
                           std::span<const Method> methods) {
  EvaluationReport report;
  report.realizations = realizations.size();
  for (std::size_t k = 0; k < methods.size(); ++k) {
    MethodSummary ms;
    ms.method = methods[k];
    std::vector<std::vector<double>> alpha;
    std::vector<double> beta, eta, ls;
    for (const auto& results : realizations) {
      const auto& r = results.at(k);
      if (!r.model || !r.log_score) {
        if (ms.failures++ == 0) ms.first_error = r.error;
        continue;
      }
      if (alpha.empty()) alpha.resize(r.model->alpha.size());
      for (std::size_t y = 0; y < alpha.size() && y < r.model->alpha.size(); ++y) {
        alpha[y].push_back(r.model->alpha[y]);
      }
      beta.push_back(r.model->beta);
      eta.push_back(r.model->eta);
      ls.push_back(*r.log_score);
    }
    for (const auto& a : alpha) ms.alpha.push_back(summarize(a));
    ms.beta = summarize(beta);
    ms.eta = summarize(eta);
    ms.log_score = summarize(ls);
    report.methods.push_back(std::move(ms));
  }
  return report;
}

EvaluationReport run_comparison(const EvaluationSpec& spec, const ExperimentPreset& preset,
                                std::size_t realizations, std::size_t threads) {
  require(realizations >= 1, "need at least one realization");
  spec.validate(preset.sim.matches);
  const auto theta = generate_skills(preset.sim);
  const auto& truth = preset.sim.truth;
  const bool want_gelo =
      std::find(spec.methods.begin(), spec.methods.end(), Method::gelo_reference) != spec.methods.end();
  std::vector<std::vector<MethodResult>> results(realizations);
  parallel_for(
      realizations,
      [&](std::size_t r) {
        const auto sim = simulate(preset.sim, theta, r + 1);
        EvaluationData data;
        data.scale = preset.engine.scale;
        data.scores = preset.engine.scores;
        data.truth = truth;
        {
          RatingEngine eng(preset.engine);
          const auto tr = eng.run(sim.matches);
          data.ranked = to_samples(tr.z, sim.matches);
        }
        if (want_gelo) {
          auto cfg = EngineConfig::gelo(truth.with_scale(preset.engine.scale), preset.engine.default_step);
          RatingEngine eng(cfg);
          const auto tr = eng.run(sim.matches);
          data.gelo = to_samples(tr.z, sim.matches);
        }
        data.truth_samples = to_samples(sim.true_diff, sim.matches);
        results[r] = evaluate_methods(spec, data);
      },
      threads);
  return aggregate(results, spec.methods);
}

EvaluationSpec example4_spec() {
  EvaluationSpec spec;
  spec.train = {4000, 8000};
  spec.test = {8000, 12001};
  spec.methods = all_methods();
  return spec;
}

nlohmann::json to_json(const EvaluationReport& report) {
  auto summary = [](const Summary& s) {
    return nlohmann::json{{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
  };
  auto methods = nlohmann::json::array();
  for (const auto& m : report.methods) {
    auto alpha = nlohmann::json::array();
    for (const auto& a : m.alpha) alpha.push_back(summary(a));
    nlohmann::json row{{"method", method_name(m.method)}, {"failures", m.failures}};
    if (m.log_score.count > 0) {
      row["alpha"] = std::move(alpha);
      row["beta"] = summary(m.beta);
      row["eta"] = summary(m.eta);
      row["log_score"] = summary(m.log_score);
    } else {
      row["alpha"] = nullptr;
      row["beta"] = nullptr;
      row["eta"] = nullptr;
      row["log_score"] = nullptr;
    }
    if (!m.first_error.empty()) row["error"] = m.first_error;
    methods.push_back(std::move(row));
  }
  return {{"realizations", report.realizations}, {"methods", std::move(methods)}};
}

nlohmann::json to_json(const std::vector<MethodResult>& results) {
  auto rows = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json row{{"method", method_name(r.method)}};
    row["model"] = r.model ? to_json(*r.model) : nlohmann::json(nullptr);
    row["log_score"] = r.log_score ? nlohmann::json(*r.log_score) : nlohmann::json(nullptr);
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_table(const EvaluationReport& report) {
  const bool with_std = report.realizations > 1;
  std::vector<std::array<std::string, 5>> rows;
  rows.push_back({"Method", "alpha_1", "beta", "eta", "LS"});
  for (const auto& m : report.methods) {
    if (m.log_score.count == 0) {
      rows.push_back({method_name(m.method), "-", "-", "-", "failed"});
      continue;
    }
    const std::string a1 = m.alpha.size() > 2 ? cell(m.alpha[1], with_std) : "-";
    rows.push_back({method_name(m.method), a1, cell(m.beta, with_std), cell(m.eta, with_std),
                    cell(m.log_score, with_std)});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 4; ++c) out << r[c] << std::string(width[c] - r[c].size() + 2, ' ');
    out << r[4];
    out << '\n';
  }
  return out.str();
}

}  // namespace gelo
