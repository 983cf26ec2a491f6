#pragma once

// Match CSV ingestion and export.
//
// Columns (header required, any order):
//   date, home_id, away_id, outcome | home_points + away_points, neutral,
//   step_k, home_skill, away_skill
// Only home_id, away_id and an outcome source are mandatory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelo/rating_engine.hpp"

namespace gelo {

/// Maps a point difference g to an outcome: y = #{k : g >= cut_k}, so the
/// intervals (-inf, c_1), [c_1, c_2), ..., [c_{L-1}, inf) partition the integers.
class DiscretizationRule {
 public:
  explicit DiscretizationRule(std::vector<std::int64_t> cuts);

  /// Loss / draw / win.
  static DiscretizationRule ternary();
  /// g <= -3, {-2, -1}, 0, {1, 2}, g >= 3.
  static DiscretizationRule five_level();

  std::size_t levels() const noexcept { return cuts_.size() + 1; }
  std::size_t outcome(std::int64_t difference) const;
  std::span<const std::int64_t> cuts() const noexcept { return cuts_; }

 private:
  std::vector<std::int64_t> cuts_;
};

struct IngestResult {
  std::vector<MatchRecord> matches;
  std::vector<std::string> warnings;
};

/// Reads, validates and date-sorts (stably) a match file. Match times are
/// reassigned to 0..T-1 in the final order.
IngestResult ingest_matches(const std::filesystem::path& path, std::size_t levels,
                            const std::optional<DiscretizationRule>& rule = std::nullopt);
IngestResult parse_matches(std::span<const std::string> lines, std::size_t levels,
                           const std::optional<DiscretizationRule>& rule = std::nullopt);

void write_matches_csv(const std::filesystem::path& path, std::span<const MatchRecord> matches);
std::string format_matches_csv(std::span<const MatchRecord> matches);

}  // namespace gelo
