#include "gelo/identification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "gelo/csv.hpp"
#include "gelo/errors.hpp"

namespace gelo {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

void normalize(std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  for (double& x : v) x /= sum;
}

// Parameter layout: [gamma, eta, alpha_1 .. alpha_F].
constexpr std::size_t kGamma = 0;
constexpr std::size_t kEta = 1;
constexpr std::size_t kAlpha = 2;

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

class Objective {
 public:
  Objective(std::span<const Sample> samples, double scale, const OutcomeScale& scores)
      : samples_(samples), scale_(scale), scores_(scores), levels_(scores.levels()),
        free_alpha_(free_alpha_count(levels_)) {
    require(std::isfinite(scale) && scale > 0.0, "scale must be > 0");
    for (const auto& s : samples_) {
      require(s.y < levels_, "sample outcome out of range");
      require(std::isfinite(s.z), "sample skill difference must be finite");
    }
  }

  std::size_t dimension() const { return kAlpha + free_alpha_; }

  double value(std::span<const double> alpha, double eta, double gamma) const {
    double total = 0.0;
    const auto d = scores_.scores();
    for (const auto& s : samples_) {
      const double u = gamma * s.z / scale_ + (s.home ? eta : 0.0);
      total += ac_log_prob_at(alpha, d, s.y, u);
    }
    return total;
  }

  Evaluation evaluate(std::span<const double> alpha, double eta, double gamma,
                      bool with_hessian) const {
    const std::size_t dim = dimension();
    Evaluation ev;
    ev.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    if (with_hessian) ev.hessian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto d = scores_.scores();
    std::vector<double> p(levels_);
    Eigen::MatrixXd c(static_cast<Eigen::Index>(levels_), static_cast<Eigen::Index>(dim));
    Eigen::VectorXd pv(static_cast<Eigen::Index>(levels_));
    for (const auto& s : samples_) {
      const double x = s.z / scale_;
      const double h = s.home ? 1.0 : 0.0;
      const double u = gamma * x + eta * h;
      const double log_z = ac_distribution(alpha, d, u, p);
      ev.value += alpha[s.y] + d[s.y] * u - log_z;
      c.setZero();
      for (std::size_t l = 0; l < levels_; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        c(li, kGamma) = d[l] * x;
        c(li, kEta) = d[l] * h;
        pv(li) = p[l];
      }
      for (std::size_t k = 0; k < free_alpha_; ++k) {
        const auto col = static_cast<Eigen::Index>(kAlpha + k);
        c(static_cast<Eigen::Index>(k + 1), col) = 1.0;
        c(static_cast<Eigen::Index>(levels_ - 2 - k), col) = 1.0;
      }
      const Eigen::VectorXd mean = c.transpose() * pv;
      ev.gradient += c.row(static_cast<Eigen::Index>(s.y)).transpose() - mean;
      if (with_hessian) {
        const Eigen::MatrixXd second = c.transpose() * pv.asDiagonal() * c;
        ev.hessian -= second - mean * mean.transpose();
      }
    }
    return ev;
  }

 private:
  std::span<const Sample> samples_;
  double scale_;
  const OutcomeScale& scores_;
  std::size_t levels_;
  std::size_t free_alpha_;
};

std::vector<double> free_half(std::span<const double> alpha) {
  const std::size_t f = free_alpha_count(alpha.size());
  return std::vector<double>(alpha.begin() + 1, alpha.begin() + 1 + static_cast<std::ptrdiff_t>(f));
}

}  // namespace

OutcomeFrequencies outcome_frequencies(std::span<const Sample> samples, const OutcomeScale& scores,
                                       double smoothing) {
  require(!samples.empty(), "no samples");
  require(std::isfinite(smoothing) && smoothing >= 0.0, "smoothing must be >= 0");
  const std::size_t n = scores.levels();
  OutcomeFrequencies f;
  f.neutral.assign(n, 0.0);
  f.home.assign(n, 0.0);
  for (const auto& s : samples) {
    require(s.y < n, "sample outcome out of range");
    if (s.home) {
      f.home[s.y] += 1.0;
      ++f.home_count;
    } else {
      f.neutral[s.y] += 1.0;
      ++f.neutral_count;
    }
  }
  f.home_fraction = static_cast<double>(f.home_count) / static_cast<double>(samples.size());
  if (f.neutral_count > 0) {
    for (double& v : f.neutral) v += smoothing;
    normalize(f.neutral);
    std::vector<double> sym(n);
    for (std::size_t y = 0; y < n; ++y) sym[y] = 0.5 * (f.neutral[y] + f.neutral[n - 1 - y]);
    f.neutral = std::move(sym);
  }
  if (f.home_count > 0) {
    for (double& v : f.home) v += smoothing;
    normalize(f.home);
    double mean = 0.0;
    for (std::size_t y = 0; y < n; ++y) mean += f.home[y] * scores.score(y);
    f.mean_home_score = mean;
  }
  f.overall.assign(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    f.overall[y] = (1.0 - f.home_fraction) * f.neutral[y] + f.home_fraction * f.home[y];
  }
  return f;
}

std::vector<double> simple_alpha(const OutcomeFrequencies& freqs) {
  const auto& p = freqs.overall;
  const std::size_t n = p.size();
  require(n >= 2, "frequencies need at least two levels");
  if (!(p.front() > 0.0 && p.back() > 0.0)) {
    throw NumericalError("extreme outcome never observed; increase smoothing");
  }
  std::vector<double> alpha(n, 0.0);
  for (std::size_t y = 1; y + 1 < n; ++y) {
    if (!(p[y] > 0.0 && p[n - 1 - y] > 0.0)) {
      throw NumericalError("outcome " + std::to_string(y) + " never observed; increase smoothing");
    }
    alpha[y] = 0.5 * std::log(p[y] * p[n - 1 - y] / (p.front() * p.back()));
  }
  return alpha;
}

double simple_eta(const OutcomeFrequencies& freqs, std::span<const double> alpha,
                  const OutcomeScale& scores) {
  if (!freqs.mean_home_score) throw NumericalError("no home-venue matches: eta is unidentifiable");
  const double m = *freqs.mean_home_score;
  if (!(m > 0.0 && m < 1.0)) throw NumericalError("mean home score at the boundary: eta unbounded");
  return logit(m) * beta_ac_to_logistic(alpha, scores).factor;
}

double simple_eta_exact(const OutcomeFrequencies& freqs, std::span<const double> alpha,
                        const OutcomeScale& scores) {
  if (!freqs.mean_home_score) throw NumericalError("no home-venue matches: eta is unidentifiable");
  const double target = *freqs.mean_home_score;
  if (!(target > 0.0 && target < 1.0)) {
    throw NumericalError("mean home score at the boundary: eta unbounded");
  }
  const auto d = scores.scores();
  auto g = [&](double eta) { return ac_expected_score_at(alpha, d, eta) - target; };
  double lo = -1.0;
  double hi = 1.0;
  while (g(lo) > 0.0) {
    lo *= 2.0;
    if (lo < -kMaxCanonicalArgument) throw NumericalError("cannot bracket eta");
  }
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (hi > kMaxCanonicalArgument) throw NumericalError("cannot bracket eta");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double simple_beta(std::span<const double> alpha, const OutcomeScale& scores) {
  return 1.0 / beta_ac_to_logistic(alpha, scores).factor;
}

ACParams IdentifiedModel::params(double scale, const OutcomeScale& scores) const {
  return ACParams(scale * beta, eta, alpha, scores);
}

void IdentifiedModel::validate() const {
  require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
  require(std::isfinite(eta), "eta must be finite");
  require(alpha.size() >= 2, "alpha needs at least two entries");
  for (double a : alpha) require(std::isfinite(a), "alpha must be finite");
}

nlohmann::json to_json(const IdentifiedModel& model) {
  return {{"method", model.method},
          {"alpha", model.alpha},
          {"eta", model.eta},
          {"beta", model.beta},
          {"train_window", {model.train_window.begin, model.train_window.end}},
          {"training_size", model.training_size},
          {"loglik", model.loglik},
          {"iterations", model.iterations}};
}

IdentifiedModel identified_model_from_json(const nlohmann::json& j) {
  IdentifiedModel m;
  try {
    m.method = j.value("method", std::string());
    m.alpha = j.at("alpha").get<std::vector<double>>();
    m.eta = j.at("eta").get<double>();
    m.beta = j.at("beta").get<double>();
    if (j.contains("train_window")) {
      const auto w = j.at("train_window").get<std::vector<std::size_t>>();
      require(w.size() == 2, "train_window must be [begin, end]");
      m.train_window = {w[0], w[1]};
    }
    m.training_size = j.value("training_size", m.train_window.size());
    m.loglik = j.value("loglik", 0.0);
    m.iterations = j.value("iterations", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model JSON: ") + e.what());
  }
  m.validate();
  return m;
}

double pseudo_loglik(std::span<const Sample> samples, double scale, std::span<const double> alpha,
                     const OutcomeScale& scores, double eta, double gamma) {
  return Objective(samples, scale, scores).value(alpha, eta, gamma);
}

std::vector<double> pseudo_loglik_gradient(std::span<const Sample> samples, double scale,
                                           std::span<const double> alpha,
                                           const OutcomeScale& scores, double eta, double gamma) {
  const auto ev = Objective(samples, scale, scores).evaluate(alpha, eta, gamma, false);
  return std::vector<double>(ev.gradient.data(), ev.gradient.data() + ev.gradient.size());
}

IdentifiedModel fit_full(std::span<const Sample> samples, double scale, const OutcomeScale& scores,
                         const FitOptions& options) {
  require(!samples.empty(), "no training samples");
  const std::size_t levels = scores.levels();
  const Objective objective(samples, scale, scores);
  {
    std::set<std::size_t> seen;
    for (const auto& s : samples) seen.insert(s.y);
    if (seen.size() < 2) throw NumericalError("degenerate data: a single outcome level observed");
  }

  std::optional<OutcomeFrequencies> freqs;
  auto frequencies = [&]() -> const OutcomeFrequencies& {
    if (!freqs) freqs = outcome_frequencies(samples, scores);
    return *freqs;
  };

  std::vector<double> alpha = options.alpha ? *options.alpha : simple_alpha(frequencies());
  require(alpha.size() == levels, "initial alpha has the wrong length");
  if (options.fit_alpha) alpha = expand_symmetric_alpha(free_half(alpha), levels);
  double eta = 0.0;
  if (options.eta) {
    eta = *options.eta;
  } else if (frequencies().mean_home_score) {
    const double m = *frequencies().mean_home_score;
    if (m > 0.0 && m < 1.0) eta = simple_eta(frequencies(), alpha, scores);
  }
  double gamma = options.gamma ? *options.gamma : 1.0 / simple_beta(alpha, scores);
  require(std::isfinite(eta) && std::isfinite(gamma), "initial point must be finite");

  std::vector<std::size_t> free;
  if (options.fit_gamma) free.push_back(kGamma);
  if (options.fit_eta) free.push_back(kEta);
  if (options.fit_alpha) {
    for (std::size_t k = 0; k < free_alpha_count(levels); ++k) free.push_back(kAlpha + k);
  }

  auto point = [&](const std::vector<double>& full) {
    std::vector<double> a = alpha;
    if (options.fit_alpha) {
      a = expand_symmetric_alpha(std::span<const double>(full).subspan(kAlpha), levels);
    }
    return std::tuple{a, full[kEta], full[kGamma]};
  };
  std::vector<double> theta(objective.dimension(), 0.0);
  theta[kGamma] = gamma;
  theta[kEta] = eta;
  for (std::size_t k = 0; k + kAlpha < theta.size(); ++k) theta[kAlpha + k] = alpha[k + 1];

  auto safe_value = [&](const std::vector<double>& full) {
    try {
      const auto [a, e, g] = point(full);
      return objective.value(a, e, g);
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  IdentifiedModel model;
  model.training_size = samples.size();
  std::size_t iter = 0;
  double f = safe_value(theta);
  if (!std::isfinite(f)) throw NumericalError("initial point gives a non-finite likelihood");
  bool converged = free.empty();
  const auto n = static_cast<Eigen::Index>(free.size());
  for (; !converged && iter < options.max_iterations; ++iter) {
    const auto [a, e, g] = point(theta);
    const auto ev = objective.evaluate(a, e, g, true);
    Eigen::VectorXd grad(n);
    Eigen::MatrixXd neg_hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      grad(i) = ev.gradient(static_cast<Eigen::Index>(free[static_cast<std::size_t>(i)]));
      for (Eigen::Index j = 0; j < n; ++j) {
        neg_hess(i, j) = -ev.hessian(static_cast<Eigen::Index>(free[static_cast<std::size_t>(i)]),
                                     static_cast<Eigen::Index>(free[static_cast<std::size_t>(j)]));
      }
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hess);
    const Eigen::VectorXd diag = ldlt.vectorD();
    const double dmax = diag.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(dmax > 0.0) || diag.minCoeff() <= 1e-12 * dmax) {
      throw NumericalError("free parameters are not identifiable from the data (singular curvature)");
    }
    if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tol) {
      converged = true;
      break;
    }
    const Eigen::VectorXd step = ldlt.solve(grad);
    double t = 1.0;
    double f_new = -std::numeric_limits<double>::infinity();
    std::vector<double> candidate = theta;
    const double slack = 1e-12 * (1.0 + std::abs(f));
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      candidate = theta;
      for (Eigen::Index i = 0; i < n; ++i) {
        candidate[free[static_cast<std::size_t>(i)]] += t * step(i);
      }
      f_new = safe_value(candidate);
      if (f_new >= f - slack) break;
    }
    if (!(f_new >= f - slack)) throw NumericalError("line search failed to improve the likelihood");
    const double improvement = f_new - f;
    theta = candidate;
    f = std::max(f, f_new);
    if (improvement < options.improvement_tol && t < 1.0) {
      const auto [a2, e2, g2] = point(theta);
      const auto ev2 = objective.evaluate(a2, e2, g2, false);
      double gmax = 0.0;
      for (auto i : free) gmax = std::max(gmax, std::abs(ev2.gradient(static_cast<Eigen::Index>(i))));
      if (gmax >= options.gradient_tol) {
        throw NumericalError("optimizer stalled before reaching a stationary point");
      }
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) throw NumericalError("fit did not converge within the iteration limit");

  const auto [a, e, g] = point(theta);
  if (!(g > 0.0)) throw NumericalError("fitted gamma is not positive");
  model.method = "fit";
  model.alpha = a;
  model.eta = e;
  model.beta = 1.0 / g;
  model.loglik = objective.value(a, e, g);
  model.iterations = iter;
  return model;
}

BinaryFit fit_binary(std::span<const Sample> samples, double scale) {
  require(!samples.empty(), "no training samples");
  bool any_home = false;
  std::set<double> distinct;
  for (const auto& s : samples) {
    require(s.y <= 1, "binary fit needs outcomes in {0, 1}");
    any_home = any_home || s.home;
    if (distinct.size() < 2) distinct.insert(s.z);
  }
  if (distinct.size() < 2) throw NumericalError("need at least two distinct skill differences");
  FitOptions opt;
  opt.fit_alpha = false;
  opt.alpha = std::vector<double>{0.0, 0.0};
  opt.fit_eta = any_home;
  if (!any_home) opt.eta = 0.0;
  opt.gamma = 1.0;
  const auto m = fit_full(samples, scale, OutcomeScale::uniform(2), opt);
  return {m.gamma(), m.eta, m.beta, m.loglik};
}

OnlineTrace online_gamma(std::span<const Sample> samples, std::span<const double> alpha, double eta,
                         double scale, const OutcomeScale& scores, const OnlineOptions& options) {
  require(options.window >= 1, "window must be >= 1");
  require(std::isfinite(options.gamma0) && options.gamma0 > 0.0, "gamma0 must be > 0");
  require(options.gamma_min > 0.0, "gamma_min must be > 0");
  require(std::isfinite(options.mu) && options.mu >= 0.0, "mu must be >= 0");
  require(std::isfinite(scale) && scale > 0.0, "scale must be > 0");
  const auto d = scores.scores();
  OnlineTrace trace;
  trace.gamma.reserve(samples.size());
  double gamma = options.gamma0;
  const std::size_t w = options.window;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    require(samples[t].y < scores.levels(), "sample outcome out of range");
    trace.gamma.push_back(gamma);
    if (t + 1 < w) continue;
    double sum = 0.0;
    for (std::size_t tau = t + 1 - w; tau <= t; ++tau) {
      const auto& s = samples[tau];
      const double x = s.z / scale;
      const double u = gamma * x + (s.home ? eta : 0.0);
      sum += x * (d[s.y] - ac_expected_score_at(alpha, d, u));
    }
    gamma += options.mu / static_cast<double>(w) * sum;
    if (!(gamma >= options.gamma_min)) {
      gamma = options.gamma_min;
      trace.clamped = true;
    }
  }
  return trace;
}

void write_gamma_trace_csv(const std::filesystem::path& path, const OnlineTrace& trace,
                           std::size_t first_index) {
  std::ostringstream out;
  out << csv::header_line("gamma-trace") << "\nt,gamma,beta\n";
  for (std::size_t i = 0; i < trace.gamma.size(); ++i) {
    out << first_index + i << ',' << csv::format_double(trace.gamma[i]) << ','
        << csv::format_double(1.0 / trace.gamma[i]) << '\n';
  }
  csv::write_atomic(path, out.str());
}

}  // namespace gelo
