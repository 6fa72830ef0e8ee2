#pragma once

// Observation records and CSV ingestion.
//
// Files carry a header row. Grouped count data (beta-binomial, logistic
// random effects, binomial) use the columns unit,y,n; scalar-observation
// models use a single column y. Column order is free; unknown columns are
// rejected so that typos do not silently drop data.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pdc/error.hpp"

namespace pdc {

struct Observation {
  std::string unit;
  double y = 0.0;
  long n = 0;  // 0 for scalar observations

  friend bool operator==(const Observation&, const Observation&) = default;
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Observation> rows) : rows_(std::move(rows)) {}

  static Dataset scalars(const std::vector<double>& ys) {
    std::vector<Observation> rows;
    rows.reserve(ys.size());
    for (double y : ys) rows.push_back({"", y, 0});
    return Dataset(std::move(rows));
  }

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::vector<Observation>& rows() const { return rows_; }
  std::vector<Observation>& rows() { return rows_; }
  const Observation& operator[](std::size_t i) const { return rows_[i]; }
  Observation& operator[](std::size_t i) { return rows_[i]; }

  std::vector<double> ys() const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.y);
    return out;
  }
  double sum_y() const {
    return std::accumulate(rows_.begin(), rows_.end(), 0.0,
                           [](double acc, const Observation& o) { return acc + o.y; });
  }
  long sum_n() const {
    return std::accumulate(rows_.begin(), rows_.end(), 0L,
                           [](long acc, const Observation& o) { return acc + o.n; });
  }

  /// Copy without row i, for leave-one-out fits.
  Dataset without(std::size_t i) const {
    detail::require(i < rows_.size(), "Dataset::without: row index out of range");
    std::vector<Observation> rows = rows_;
    rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(i));
    return Dataset(std::move(rows));
  }

  /// Index of the row whose unit label is `unit`, or of the 1-based row
  /// number if the label is an integer and no row carries it.
  std::size_t find_unit(const std::string& unit) const {
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (rows_[i].unit == unit) return i;
    try {
      std::size_t used = 0;
      const long k = std::stol(unit, &used);
      if (used == unit.size() && k >= 1 && static_cast<std::size_t>(k) <= rows_.size())
        return static_cast<std::size_t>(k - 1);
    } catch (const std::exception&) {
    }
    throw ValidationError("unknown unit '" + unit + "'");
  }

  /// Rows must carry counts with 0 <= y <= n and n >= 1.
  void require_counts(const char* who) const {
    for (const auto& r : rows_) {
      detail::require(r.n >= 1, std::string(who) + ": every row needs a trial count n >= 1");
      detail::require(r.y >= 0.0 && r.y <= static_cast<double>(r.n) && r.y == std::floor(r.y),
                      std::string(who) + ": counts must satisfy 0 <= y <= n");
    }
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Observation> rows_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw ValidationError(where + ": '" + text + "' is not a number");
  return v;
}

}  // namespace detail

inline Dataset parse_csv(std::istream& in, const std::string& source = "<csv>") {
  std::string line;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    if (detail::trim(line).empty() || detail::trim(line)[0] == '#') continue;
    header = detail::split_csv_line(line);
  }
  detail::require(!header.empty(), source + ": missing header row");
  int col_unit = -1, col_y = -1, col_n = -1;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string& h = header[c];
    int* slot = h == "unit" ? &col_unit : h == "y" ? &col_y : h == "n" ? &col_n : nullptr;
    if (!slot) throw ValidationError(source + ": unknown column '" + h + "' (expected unit, y, n)");
    if (*slot >= 0) throw ValidationError(source + ": duplicate column '" + h + "'");
    *slot = c;
  }
  detail::require(col_y >= 0, source + ": a 'y' column is required");

  std::vector<Observation> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = source + ":" + std::to_string(line_no);
    detail::require(cells.size() == header.size(), where + ": expected " +
                                                       std::to_string(header.size()) + " fields");
    Observation obs;
    obs.y = detail::parse_number(cells[col_y], where);
    if (col_unit >= 0) obs.unit = cells[col_unit];
    if (col_n >= 0) {
      const double n = detail::parse_number(cells[col_n], where);
      detail::require(n >= 0.0 && n == std::floor(n), where + ": n must be a non-negative integer");
      obs.n = static_cast<long>(n);
      detail::require(obs.y >= 0.0 && obs.y <= n, where + ": need 0 <= y <= n");
    }
    if (obs.unit.empty()) obs.unit = std::to_string(rows.size() + 1);
    rows.push_back(std::move(obs));
  }
  return Dataset(std::move(rows));
}

inline Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  return parse_csv(in, path);
}

/// Model parameter overrides such as {"mu0": 0, "sigma0sq": 1}.
using ParamMap = std::map<std::string, double>;

namespace detail {

/// Reads `key` from `params` into `out` if present and marks it consumed.
inline void take(ParamMap& params, const std::string& key, double& out) {
  if (auto it = params.find(key); it != params.end()) {
    out = it->second;
    params.erase(it);
  }
}

inline void reject_leftovers(const ParamMap& params, const std::string& model) {
  if (!params.empty())
    throw ValidationError("unknown parameter '" + params.begin()->first + "' for model " + model);
}

}  // namespace detail
}  // namespace pdc
