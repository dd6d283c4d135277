#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "hallens/dataset.hpp"

namespace hallens::testing {

inline Sample make_sample(std::string id, Task task, std::string src, std::string tgt, std::string hyp,
                          std::optional<Label> gold = std::nullopt) {
  Sample s;
  s.id = std::move(id);
  s.task = task;
  s.src = std::move(src);
  s.tgt = std::move(tgt);
  s.hyp = std::move(hyp);
  s.gold = gold;
  return s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("hallens_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace hallens::testing
