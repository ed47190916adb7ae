#pragma once

// Packet files (JSON, schema version 1) and CSV output.
//
//   {
//     "v": 1,
//     "c": 1.0,
//     "sigma": 0.1,                 // or "noise_cov": [9 numbers, row-major]
//     "moments":  [[1,0,0], ...],
//     "readings": [[x,y,z], ...],
//     "gyro_deltas": [[roll,pitch,yaw], ...],   // optional, radians
//     "accel": [[x,y,z], ...]                    // optional, m/s^2
//   }

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "minav/dipole.hpp"

namespace minav {

/// Throws Error(SchemaError) naming the offending field, or the line and
/// column of a JSON syntax error.
MeasurementPacket parse_packet_json(std::string_view text);

MeasurementPacket load_packet(const std::filesystem::path& path);

/// Inverse of parse_packet_json. Writes "sigma" when the covariance is
/// isotropic and sigma^2 reproduces it exactly, "noise_cov" otherwise.
std::string packet_to_json(const MeasurementPacket& packet);

/// Fixed formatting for machine-readable output: 9 significant digits, '.'
/// as decimal separator regardless of locale.
std::string format_number(double value);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partially written file.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);

/// Parses a number with an optional "deg" suffix (converted to radians).
double parse_angle(std::string_view text);

/// Comma-separated numbers; `angles` enables the "deg" suffix per entry.
std::vector<double> parse_number_list(std::string_view text, bool angles = false);

}  // namespace minav
