#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace hallens {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace hallens
