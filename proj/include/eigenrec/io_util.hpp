#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace eigenrec {

/// %.17g; parses back to the identical double.
std::string format_double(double value);

/// "[v0,v1,...]" with format_double for each entry.
std::string format_array(std::span<const double> values);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Hash of a file's bytes (fnv1a_hex); empty string if the file is missing.
std::string file_hash(const std::filesystem::path& path);

}  // namespace eigenrec
