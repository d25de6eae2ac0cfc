#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hoam/detection.hpp"
#include "hoam/field.hpp"

namespace hoam::io {

/// Binary (P5) 16-bit PGM, big-endian samples, values scaled so that
/// `full_scale` maps to 65535 and clipped to [0, 65535]. A non-positive
/// full_scale selects the image maximum (max-normalised export).
std::string to_pgm16(const RealImage& image, double full_scale = 0.0);

/// 16-bit PGM of integer counts, max-normalised.
std::string to_pgm16(std::size_t nx, std::size_t ny, const std::vector<std::uint64_t>& counts);

/// Row-major CSV. The first line is a comment with the grid metadata:
/// `# nx=..,ny=..,dx=..,dy=..,wavelength=..`; each following line is one y-row.
std::string to_csv(const RealImage& image, const GridSpec& grid);

/// Parses the CSV format above back into an image and grid.
std::pair<RealImage, GridSpec> from_csv(std::string_view text);

/// CountRecord table with header
/// `setting,mask_offset,duration_s,singles_alice,singles_bob,coincidences`.
std::string records_to_csv(const std::vector<CountRecord>& records);
/// Parses the table above. Throws IoError on malformed rows.
std::vector<CountRecord> records_from_csv(std::string_view text);

/// Writes `contents` to a temporary sibling file and renames it over `path`,
/// creating missing parent directories. Throws IoError.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

/// Whole-file read. Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace hoam::io
