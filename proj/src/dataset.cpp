#include "pfmc/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pfmc/errors.hpp"

namespace pfmc {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open dataset file " + path, 0);
  std::string line;
  long lineno = 1;
  if (!std::getline(in, line) || strip_cr(line) != "t,y")
    throw IngestError("expected header 't,y'", 1);
  Dataset data;
  data.name = path;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) throw IngestError("empty row", lineno);
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IngestError("missing comma", lineno);
    std::size_t used = 0;
    long t;
    double y;
    try {
      t = std::stol(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("");
      const std::string ystr = line.substr(comma + 1);
      y = std::stod(ystr, &used);
      if (used != ystr.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw IngestError("malformed row '" + line + "'", lineno);
    }
    if (t != static_cast<long>(data.y.size()) + 1)
      throw IngestError("non-consecutive time index", lineno);
    if (!std::isfinite(y)) throw IngestError("non-finite observation", lineno);
    data.y.push_back(y);
  }
  if (data.y.empty()) throw IngestError("dataset has no observations", lineno);
  return data;
}

void write_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset file " + path);
  out << "t,y\n";
  for (std::size_t i = 0; i < data.y.size(); ++i)
    out << (i + 1) << ',' << format_double(data.y[i]) << '\n';
}

}  // namespace pfmc
