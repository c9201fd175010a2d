#pragma once
// CSV/JSON emission helpers. Numbers are written with 17 significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gbarq/errors.hpp"
#include "gbarq/inference.hpp"

namespace gbarq {

using Json = nlohmann::ordered_json;

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
  }

  // `# key: value` lines ahead of the column header
  CsvWriter& meta(const std::string& key, const std::string& value) {
    out_ << "# " << key << ": " << value << '\n';
    return *this;
  }
  CsvWriter& meta(const std::string& key, double value) { return meta(key, num(value)); }

  CsvWriter& header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
    return *this;
  }

  CsvWriter& row(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << num(v[i]);
    out_ << '\n';
    return *this;
  }

  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Reads a CSV written by CsvWriter: skips `#` lines and the header.
inline std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_events_csv(const std::filesystem::path& path, const EventSet& es, const std::string& config_hash) {
  CsvWriter w(path);
  w.meta("config_hash", config_hash)
      .meta("seed", std::to_string(es.seed))
      .meta("draw", std::to_string(es.draw))
      .meta("N", std::to_string(es.N))
      .meta("N_c", std::to_string(es.N_c))
      .header({"R_bar_m", "Phi_rad", "T_s"});
  for (const auto& e : es.events) w.row({e.R, e.Phi, e.T});
}

inline EventSet read_events_csv(const std::filesystem::path& path) {
  EventSet es;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# N: ", 0) == 0) es.N = std::stoll(line.substr(5));
    if (line.rfind("# seed: ", 0) == 0) es.seed = std::stoull(line.substr(8));
    if (line.rfind("# draw: ", 0) == 0) es.draw = std::stoull(line.substr(8));
  }
  for (const auto& r : read_csv_rows(path)) {
    if (r.size() != 3) throw std::runtime_error("event file " + path.string() + ": expected 3 columns");
    es.events.push_back({r[0], r[1], r[2]});
  }
  es.N_c = static_cast<long long>(es.events.size());
  return es;
}

}  // namespace gbarq
