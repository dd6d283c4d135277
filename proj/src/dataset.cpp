#include "hallens/dataset.hpp"

#include <unordered_set>

#include "hallens/error.hpp"
#include "hallens/io.hpp"
#include "json.hpp"

namespace hallens {

namespace {

// Shared-task files spell the probability key with parentheses.
constexpr const char* kProbKey = "p(Hallucination)";

std::string record_error(std::size_t record, const std::string& what) {
  return what + " at record " + std::to_string(record);
}

std::string required_string(const nlohmann::json& obj, const char* key, std::size_t record) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw DataError(record_error(record, std::string("missing field '") + key + "'"));
  }
  if (!it->is_string()) {
    throw DataError(record_error(record, std::string("field '") + key + "' is not a string"));
  }
  return it->get<std::string>();
}

std::string ordinal_id(std::size_t index, std::size_t total) {
  std::size_t width = 3;
  for (std::size_t n = total > 0 ? total - 1 : 0, digits = 1; n >= 10; n /= 10) {
    if (++digits > width) width = digits;
  }
  std::string digits = std::to_string(index);
  return std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::DefinitionModeling: return "DM";
    case Task::MachineTranslation: return "MT";
    case Task::ParaphraseGeneration: return "PG";
  }
  return "?";
}

std::string_view to_string(Track track) {
  return track == Track::ModelAware ? "aware" : "agnostic";
}

std::string_view to_string(Label label) {
  return label == Label::Hallucination ? "Hallucination" : "Not Hallucination";
}

std::optional<Task> parse_task(std::string_view code) {
  if (code == "DM") return Task::DefinitionModeling;
  if (code == "MT") return Task::MachineTranslation;
  if (code == "PG") return Task::ParaphraseGeneration;
  return std::nullopt;
}

std::optional<Track> parse_track(std::string_view name) {
  if (name == "aware") return Track::ModelAware;
  if (name == "agnostic") return Track::ModelAgnostic;
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "Hallucination") return Label::Hallucination;
  if (text == "Not Hallucination") return Label::NotHallucination;
  return std::nullopt;
}

bool Dataset::fully_labeled() const {
  for (const auto& s : samples) {
    if (!s.gold) return false;
  }
  return true;
}

Dataset parse_dataset(std::string_view jsonl, Track track, std::string name) {
  std::vector<nlohmann::json> records;
  std::size_t line_start = 0;
  while (line_start <= jsonl.size()) {
    std::size_t line_end = jsonl.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = jsonl.size();
    std::string_view line = jsonl.substr(line_start, line_end - line_start);
    line_start = line_end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::size_t record = records.size() + 1;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error&) {
      throw DataError(record_error(record, "invalid JSON"));
    }
    if (!records.back().is_object()) throw DataError(record_error(record, "record is not an object"));
  }

  Dataset ds;
  ds.name = std::move(name);
  ds.track = track;
  ds.samples.reserve(records.size());
  std::unordered_set<std::string> seen;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& obj = records[i];
    const std::size_t record = i + 1;
    Sample s;

    if (auto it = obj.find("id"); it != obj.end() && !it->is_null()) {
      if (it->is_string()) {
        s.id = it->get<std::string>();
      } else if (it->is_number_integer()) {
        s.id = std::to_string(it->get<long long>());
      } else {
        throw DataError(record_error(record, "field 'id' must be a string or integer"));
      }
      if (s.id.empty()) throw DataError(record_error(record, "empty id"));
    } else {
      s.id = ordinal_id(i, records.size());
    }

    const std::string task_code = required_string(obj, "task", record);
    auto task = parse_task(task_code);
    if (!task) throw DataError(record_error(record, "unknown task"));
    s.task = *task;
    s.src = required_string(obj, "src", record);
    s.tgt = required_string(obj, "tgt", record);
    s.hyp = required_string(obj, "hyp", record);
    if (s.hyp.empty()) throw DataError(record_error(record, "empty hyp"));

    if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
      auto label = it->is_string() ? parse_label(it->get<std::string>()) : std::nullopt;
      if (!label) throw DataError(record_error(record, "unknown label"));
      s.gold = *label;
    }
    if (auto it = obj.find(kProbKey); it != obj.end() && !it->is_null()) {
      if (!it->is_number()) throw DataError(record_error(record, "p(Hallucination) is not a number"));
      const double p = it->get<double>();
      if (!(p >= 0.0 && p <= 1.0)) throw DataError(record_error(record, "p(Hallucination) outside [0,1]"));
      s.p_hallucination = p;
    }
    if (s.gold && s.p_hallucination &&
        (*s.gold == Label::Hallucination) != (*s.p_hallucination >= 0.5)) {
      throw DataError(record_error(record, "label disagrees with p(Hallucination)"));
    }

    if (!seen.insert(s.id).second) throw DataError(record_error(record, "duplicate id '" + s.id + "'"));
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, Track track) {
  const std::string text = read_text_file(path);
  try {
    return parse_dataset(text, track, path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string sample_to_json_line(const Sample& sample) {
  nlohmann::ordered_json obj;
  obj["id"] = sample.id;
  obj["task"] = std::string(to_string(sample.task));
  obj["src"] = sample.src;
  obj["tgt"] = sample.tgt;
  obj["hyp"] = sample.hyp;
  if (sample.gold) obj["label"] = std::string(to_string(*sample.gold));
  if (sample.p_hallucination) obj[kProbKey] = *sample.p_hallucination;
  return obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  for (const auto& s : ds.samples) {
    out += sample_to_json_line(s);
    out += '\n';
  }
  return out;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_text_file(path, serialize_dataset(ds));
}

const std::string& reference_text(const Sample& sample) {
  const std::string& ref = sample.task == Task::ParaphraseGeneration ? sample.src : sample.tgt;
  if (ref.empty()) throw DataError("empty reference for sample '" + sample.id + "'");
  return ref;
}

}  // namespace hallens
