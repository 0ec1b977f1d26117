#pragma once

#include <string>
#include <vector>

namespace enes {

// Writes content to a temp file in the same directory, then renames into
// place. Failures never leave a partial file at the target path.
void atomic_write(const std::string& path, const std::string& content);

// Confirms the directory exists (creating it if needed) and is writable.
// Throws DataError otherwise.
void ensure_writable_dir(const std::string& dir);

std::string read_file(const std::string& path);

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace enes
