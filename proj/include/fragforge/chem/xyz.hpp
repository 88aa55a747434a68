#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fragforge/chem/atom_cloud.hpp"

namespace fragforge::chem {

// Parses a single-frame XYZ block: atom count, comment line, then one
// "Symbol x y z" line per atom. Trailing blank lines are ignored; anything
// else beyond the declared atoms is a count mismatch.
AtomCloud parse_xyz(std::string_view text, std::string* comment = nullptr);

// Writes coordinates with six decimals, one line per atom, newline-terminated.
std::string write_xyz(const AtomCloud& cloud, std::string_view comment = "");

AtomCloud read_xyz_file(const std::filesystem::path& path, std::string* comment = nullptr);
void write_xyz_file(const std::filesystem::path& path, const AtomCloud& cloud,
                    std::string_view comment = "");

}  // namespace fragforge::chem
