#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hallens {

enum class Task { DefinitionModeling, MachineTranslation, ParaphraseGeneration };
enum class Track { ModelAware, ModelAgnostic };
enum class Label { Hallucination, NotHallucination };

inline constexpr Task kAllTasks[] = {Task::DefinitionModeling, Task::MachineTranslation,
                                     Task::ParaphraseGeneration};

std::string_view to_string(Task task);
std::string_view to_string(Track track);
std::string_view to_string(Label label);

// Closed-enumeration parsers; return nullopt for anything else.
std::optional<Task> parse_task(std::string_view code);
std::optional<Track> parse_track(std::string_view name);  // "aware" | "agnostic"
std::optional<Label> parse_label(std::string_view text);

struct Sample {
  std::string id;
  Task task = Task::DefinitionModeling;
  std::string src;
  std::string tgt;
  std::string hyp;
  std::optional<Label> gold;
  std::optional<double> p_hallucination;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::string name;
  Track track = Track::ModelAgnostic;
  std::vector<Sample> samples;

  bool fully_labeled() const;
};

/// Reads a line-delimited JSON file with fields `hyp`, `tgt`, `src`, `task`
/// and optionally `id`, `label`, `p(Hallucination)`. Unknown fields are
/// ignored. Records without an id get a zero-padded ordinal ("000", "001",
/// ...). Record numbers in error messages are 1-based.
Dataset load_dataset(const std::filesystem::path& path, Track track);
Dataset parse_dataset(std::string_view jsonl, Track track, std::string name = {});

std::string sample_to_json_line(const Sample& sample);
std::string serialize_dataset(const Dataset& ds);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

/// The text a hypothesis is compared against: the source for paraphrase
/// generation, the target for the other tasks.
const std::string& reference_text(const Sample& sample);

}  // namespace hallens
