#pragma once

#include <map>
#include <string>
#include <vector>

namespace pfmc {

/// Observation series y_1..y_T with optional provenance metadata
/// (simulation name, data-generating parameters).
struct Dataset {
  std::vector<double> y;
  std::string name;
  std::map<std::string, double> meta;

  std::size_t size() const { return y.size(); }
};

/// Strict CSV reader for the `t,y` format; any malformed row raises
/// IngestError with its line number.
Dataset load_dataset(const std::string& path);

/// Writes `t,y` rows with 17 significant digits (lossless round trip).
void write_dataset(const Dataset& data, const std::string& path);

/// 17-significant-digit decimal rendering used for all numeric output.
std::string format_double(double x);

}  // namespace pfmc
