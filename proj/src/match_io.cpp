#include "gelo/match_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "gelo/csv.hpp"
#include "gelo/errors.hpp"

namespace gelo {

namespace {

[[noreturn]] void row_error(std::size_t line, const std::string& message) {
  throw ValidationError("line " + std::to_string(line) + ": " + message);
}

}  // namespace

DiscretizationRule::DiscretizationRule(std::vector<std::int64_t> cuts) : cuts_(std::move(cuts)) {
  if (cuts_.empty()) throw ValidationError("a discretization rule needs at least one cut");
  for (std::size_t k = 1; k < cuts_.size(); ++k) {
    if (cuts_[k] <= cuts_[k - 1]) throw ValidationError("discretization cuts must increase");
  }
  if (levels() % 2 == 1) {
    const std::int64_t lo = cuts_.front() - 2;
    const std::int64_t hi = cuts_.back() + 2;
    for (std::int64_t g = std::min(lo, -hi); g <= std::max(hi, -lo); ++g) {
      if (outcome(-g) != levels() - 1 - outcome(g)) {
        throw ValidationError("an odd-level discretization rule must be symmetric about 0");
      }
    }
  }
}

DiscretizationRule DiscretizationRule::ternary() { return DiscretizationRule({0, 1}); }

DiscretizationRule DiscretizationRule::five_level() { return DiscretizationRule({-2, 0, 1, 3}); }

std::size_t DiscretizationRule::outcome(std::int64_t difference) const {
  return static_cast<std::size_t>(
      std::upper_bound(cuts_.begin(), cuts_.end(), difference) - cuts_.begin());
}

IngestResult parse_matches(std::span<const std::string> lines, std::size_t levels,
                           const std::optional<DiscretizationRule>& rule) {
  if (levels < 2) throw ValidationError("need at least two outcome levels");
  if (rule && rule->levels() != levels) {
    throw ValidationError("discretization rule yields " + std::to_string(rule->levels()) +
                          " levels, expected " + std::to_string(levels));
  }
  std::size_t i = 0;
  while (i < lines.size() && lines[i].empty()) ++i;
  if (i < lines.size() && csv::check_header(lines[i], "matches")) ++i;
  if (i >= lines.size()) throw ValidationError("match file has no header row");

  const auto header = csv::split(lines[i]);
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < header.size(); ++c) col[header[c]] = c;
  auto has = [&](const char* name) { return col.count(name) > 0; };
  if (!has("home_id") || !has("away_id")) {
    throw ValidationError("match file needs home_id and away_id columns");
  }
  const bool by_points = !has("outcome");
  if (by_points && !(has("home_points") && has("away_points"))) {
    throw ValidationError("match file needs an outcome column or home_points/away_points");
  }
  if (by_points && !rule) throw ValidationError("point columns need a discretization rule");

  IngestResult result;
  std::vector<std::size_t> line_of;
  for (++i; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty() || lines[i][0] == '#') continue;
    std::vector<std::string> f;
    try {
      f = csv::split(lines[i]);
    } catch (const ValidationError& e) {
      row_error(line_no, e.what());
    }
    if (f.size() != header.size()) {
      row_error(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(f.size()));
    }
    auto field = [&](const char* name) -> const std::string& { return f[col.at(name)]; };
    auto opt_field = [&](const char* name) -> std::optional<std::string> {
      if (!has(name) || field(name).empty()) return std::nullopt;
      return field(name);
    };
    try {
      MatchRecord m;
      m.home = field("home_id");
      m.away = field("away_id");
      if (m.home.empty() || m.away.empty()) row_error(line_no, "empty player id");
      if (m.home == m.away) row_error(line_no, "home and away are the same player");
      if (by_points) {
        const auto g = csv::parse_int(field("home_points"), "home_points") -
                       csv::parse_int(field("away_points"), "away_points");
        m.outcome = rule->outcome(g);
      } else {
        const auto y = csv::parse_int(field("outcome"), "outcome");
        if (y < 0 || static_cast<std::size_t>(y) >= levels) {
          row_error(line_no, "outcome " + std::to_string(y) + " outside 0.." +
                                 std::to_string(levels - 1));
        }
        m.outcome = static_cast<std::size_t>(y);
      }
      const auto neutral = opt_field("neutral");
      m.home_venue = neutral ? !csv::parse_bool(*neutral, "neutral") : false;
      if (const auto k = opt_field("step_k")) {
        const double step = csv::parse_double(*k, "step_k");
        if (!(std::isfinite(step) && step > 0.0)) row_error(line_no, "step_k must be > 0");
        m.step = step;
      }
      m.date = opt_field("date");
      if (const auto v = opt_field("home_skill")) m.home_skill = csv::parse_double(*v, "home_skill");
      if (const auto v = opt_field("away_skill")) m.away_skill = csv::parse_double(*v, "away_skill");
      if (m.home_skill.has_value() != m.away_skill.has_value()) {
        row_error(line_no, "home_skill and away_skill must be given together");
      }
      result.matches.push_back(std::move(m));
      line_of.push_back(line_no);
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      if (what.rfind("line ", 0) == 0) throw;
      row_error(line_no, what);
    }
  }

  const bool all_dated = std::all_of(result.matches.begin(), result.matches.end(),
                                     [](const MatchRecord& m) { return m.date.has_value(); });
  if (all_dated) {
    const bool sorted = std::is_sorted(
        result.matches.begin(), result.matches.end(),
        [](const MatchRecord& a, const MatchRecord& b) { return *a.date < *b.date; });
    if (!sorted) {
      result.warnings.push_back("dates are not monotone; rows were stably sorted by date");
      std::vector<std::size_t> order(result.matches.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *result.matches[a].date < *result.matches[b].date;
      });
      std::vector<MatchRecord> sorted_matches;
      sorted_matches.reserve(order.size());
      for (auto k : order) sorted_matches.push_back(std::move(result.matches[k]));
      result.matches = std::move(sorted_matches);
    }
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& m : result.matches) {
      if (!seen.emplace(*m.date, m.home, m.away).second) {
        result.warnings.push_back("duplicate match " + *m.date + " " + m.home + " vs " + m.away);
      }
    }
  }
  for (std::size_t t = 0; t < result.matches.size(); ++t) {
    result.matches[t].t = static_cast<std::int64_t>(t);
  }
  return result;
}

IngestResult ingest_matches(const std::filesystem::path& path, std::size_t levels,
                            const std::optional<DiscretizationRule>& rule) {
  const auto lines = csv::read_lines(path);
  return parse_matches(lines, levels, rule);
}

std::string format_matches_csv(std::span<const MatchRecord> matches) {
  const bool skills = std::any_of(matches.begin(), matches.end(),
                                  [](const MatchRecord& m) { return m.home_skill.has_value(); });
  std::ostringstream out;
  out << csv::header_line("matches") << "\ndate,home_id,away_id,outcome,neutral,step_k";
  if (skills) out << ",home_skill,away_skill";
  out << '\n';
  for (const auto& m : matches) {
    out << csv::quote(m.date.value_or("")) << ',' << csv::quote(m.home) << ','
        << csv::quote(m.away) << ',' << m.outcome << ',' << (m.home_venue ? 0 : 1) << ','
        << (m.step ? csv::format_double(*m.step) : std::string());
    if (skills) {
      out << ',' << (m.home_skill ? csv::format_double(*m.home_skill) : std::string()) << ','
          << (m.away_skill ? csv::format_double(*m.away_skill) : std::string());
    }
    out << '\n';
  }
  return out.str();
}

void write_matches_csv(const std::filesystem::path& path, std::span<const MatchRecord> matches) {
  csv::write_atomic(path, format_matches_csv(matches));
}

}  // namespace gelo
