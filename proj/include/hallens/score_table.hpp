#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "hallens/dataset.hpp"

namespace hallens {

enum class Orientation { HigherIsFaithful, HigherIsHallucinated };

std::string_view to_string(Orientation o);  // "higher_is_faithful" | "higher_is_hallucinated"
std::optional<Orientation> parse_orientation(std::string_view text);

// One scorer's real-valued outputs keyed by sample id. Scores are finite.
struct ScoreTable {
  std::string scorer_id;
  Orientation orientation = Orientation::HigherIsFaithful;
  std::map<std::string, double> scores;

  const double& at(const std::string& id) const;
  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;
};

// Throws DataError when scorer_id is empty or any score is non-finite.
void validate(const ScoreTable& table);

/// Tab-separated format:
///   #scorer_id=<s>
///   #orientation=<o>
///   <id>\t<score>        (one per line, sorted by id, 9 decimals)
std::string format_score_file(const ScoreTable& table);
ScoreTable parse_score_file(std::string_view text);

ScoreTable read_score_file(const std::filesystem::path& path);
void write_score_file(const ScoreTable& table, const std::filesystem::path& path);

/// Restricts `table` to the ids of `ds` and converts it to HigherIsFaithful
/// by negation. Missing ids are an error.
ScoreTable align(const ScoreTable& table, const Dataset& ds);

}  // namespace hallens
