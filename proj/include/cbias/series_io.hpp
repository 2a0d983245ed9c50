#pragma once

// CSV emission for checkpoint series and FNV-1a checksums.

#include "cbias/summation.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

namespace cbias::io {

/// 15 significant digits; NaN (absent value) becomes an empty field.
std::string format_number(double v);

/// Header row "x_label,col1,col2,..." then one row per checkpoint.
/// Fields containing a comma or quote are quoted.
void write_csv(std::ostream& out, const sums::CheckpointSeries& series);
std::string to_csv(const sums::CheckpointSeries& series);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

/// Writes bytes to path (via a temporary file and rename). Returns the checksum.
std::uint64_t write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace cbias::io
