#include "hallens/score_table.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "hallens/error.hpp"
#include "hallens/io.hpp"

namespace hallens {

namespace {

constexpr std::string_view kScorerPrefix = "#scorer_id=";
constexpr std::string_view kOrientationPrefix = "#orientation=";
constexpr std::size_t kMaxListedIds = 20;

std::string render_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  std::string s(buf);
  // Values that round to zero from below would print as "-0.000000000".
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

bool valid_id(std::string_view id) {
  return !id.empty() && id.find_first_of("\t\n\r") == std::string_view::npos && id.front() != '#';
}

}  // namespace

std::string_view to_string(Orientation o) {
  return o == Orientation::HigherIsFaithful ? "higher_is_faithful" : "higher_is_hallucinated";
}

std::optional<Orientation> parse_orientation(std::string_view text) {
  if (text == "higher_is_faithful") return Orientation::HigherIsFaithful;
  if (text == "higher_is_hallucinated") return Orientation::HigherIsHallucinated;
  return std::nullopt;
}

const double& ScoreTable::at(const std::string& id) const {
  auto it = scores.find(id);
  if (it == scores.end()) throw DataError("scorer '" + scorer_id + "' has no score for sample '" + id + "'");
  return it->second;
}

void validate(const ScoreTable& table) {
  if (table.scorer_id.empty() || table.scorer_id.find_first_of("\n\r") != std::string::npos) {
    throw DataError("invalid scorer_id");
  }
  for (const auto& [id, score] : table.scores) {
    if (!valid_id(id)) throw DataError("scorer '" + table.scorer_id + "': invalid sample id '" + id + "'");
    if (!std::isfinite(score)) {
      throw DataError("scorer '" + table.scorer_id + "': non-finite score for '" + id + "'");
    }
  }
}

std::string format_score_file(const ScoreTable& table) {
  validate(table);
  std::string out;
  out.append(kScorerPrefix).append(table.scorer_id).push_back('\n');
  out.append(kOrientationPrefix).append(to_string(table.orientation)).push_back('\n');
  for (const auto& [id, score] : table.scores) {
    out.append(id).push_back('\t');
    out.append(render_score(score)).push_back('\n');
  }
  return out;
}

ScoreTable parse_score_file(std::string_view text) {
  ScoreTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_scorer = false;
  bool have_orientation = false;

  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string where = " at line " + std::to_string(line_no);

    if (line_no == 1) {
      if (!line.starts_with(kScorerPrefix)) throw DataError("missing #scorer_id header" + where);
      table.scorer_id = std::string(line.substr(kScorerPrefix.size()));
      if (table.scorer_id.empty()) throw DataError("empty scorer_id" + where);
      have_scorer = true;
      continue;
    }
    if (line_no == 2) {
      if (!line.starts_with(kOrientationPrefix)) throw DataError("missing #orientation header" + where);
      auto o = parse_orientation(line.substr(kOrientationPrefix.size()));
      if (!o) throw DataError("unknown orientation" + where);
      table.orientation = *o;
      have_orientation = true;
      continue;
    }
    if (line.empty()) continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw DataError("malformed row" + where);
    std::string id(line.substr(0, tab));
    std::string_view value = line.substr(tab + 1);
    if (!valid_id(id)) throw DataError("invalid id" + where);

    double score = 0.0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    if (!value.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, score);
    if (value.empty() || ec != std::errc() || ptr != last || !std::isfinite(score)) {
      throw DataError("invalid score" + where);
    }
    if (!table.scores.emplace(std::move(id), score).second) throw DataError("duplicate id" + where);
  }
  if (!have_scorer) throw DataError("missing #scorer_id header at line 1");
  if (!have_orientation) throw DataError("missing #orientation header at line 2");
  return table;
}

ScoreTable read_score_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_score_file(text);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_score_file(const ScoreTable& table, const std::filesystem::path& path) {
  write_text_file(path, format_score_file(table));
}

ScoreTable align(const ScoreTable& table, const Dataset& ds) {
  ScoreTable out;
  out.scorer_id = table.scorer_id;
  out.orientation = Orientation::HigherIsFaithful;
  const bool negate = table.orientation == Orientation::HigherIsHallucinated;

  std::vector<std::string> missing;
  for (const auto& s : ds.samples) {
    auto it = table.scores.find(s.id);
    if (it == table.scores.end()) {
      missing.push_back(s.id);
      continue;
    }
    out.scores.emplace(s.id, negate ? -it->second : it->second);
  }
  if (!missing.empty()) {
    std::string msg = "scorer '" + table.scorer_id + "' is missing " + std::to_string(missing.size()) +
                      " sample id(s):";
    for (std::size_t i = 0; i < missing.size() && i < kMaxListedIds; ++i) msg += " " + missing[i];
    if (missing.size() > kMaxListedIds) msg += " ...";
    throw DataError(msg);
  }
  return out;
}

}  // namespace hallens
