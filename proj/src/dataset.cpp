// Apache License, Version 2.0, refer to LICENSE.txt
#include "dlcm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "dlcm/error.hpp"

namespace dlcm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  for (auto& c : cells) {
    auto b = c.find_first_not_of(" \t");
    auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return cells;
}

}  // namespace

IngestResult validate_dataset(const std::vector<std::vector<long long>>& raw,
                              const std::optional<std::vector<int>>& cardinalities,
                              std::vector<std::string> item_names) {
  if (raw.empty() && !cardinalities) throw Error(ErrorCode::non_rectangular, "no rows");
  const size_t J = raw.empty() ? cardinalities->size() : raw.front().size();
  if (J == 0) throw Error(ErrorCode::non_rectangular, "rows have no items");
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].size() != J)
      throw Error(ErrorCode::non_rectangular, "row " + std::to_string(i) + " has " +
                                                  std::to_string(raw[i].size()) + " cells, expected " +
                                                  std::to_string(J));
    for (size_t j = 0; j < J; ++j)
      if (raw[i][j] < 0)
        throw Error(ErrorCode::negative_code,
                    "row " + std::to_string(i) + ", item " + std::to_string(j));
  }
  if (cardinalities && cardinalities->size() != J)
    throw Error(ErrorCode::dimension_mismatch, "cardinality override has wrong length");
  if (!item_names.empty() && item_names.size() != J)
    throw Error(ErrorCode::dimension_mismatch, "item names have wrong length");

  IngestResult out;
  Dataset& d = out.data;
  d.rows = static_cast<int>(raw.size());
  d.cardinalities.assign(J, 2);
  d.responses.reserve(raw.size() * J);
  for (const auto& r : raw)
    for (long long v : r) d.responses.push_back(static_cast<int>(v));
  if (item_names.empty())
    for (size_t j = 0; j < J; ++j) item_names.push_back("Q" + std::to_string(j));
  d.item_names = std::move(item_names);

  for (size_t j = 0; j < J; ++j) {
    long long mx = 0;
    std::vector<char> seen;
    for (const auto& r : raw) {
      mx = std::max(mx, r[j]);
      if (seen.size() <= static_cast<size_t>(r[j])) seen.resize(r[j] + 1, 0);
      seen[r[j]] = 1;
    }
    int q = static_cast<int>(mx + 1);
    if (cardinalities) {
      if ((*cardinalities)[j] < 2 || (*cardinalities)[j] < q)
        throw Error(ErrorCode::config_invalid,
                    "cardinality override for item " + std::to_string(j) + " is below the observed codes");
      q = (*cardinalities)[j];
    }
    q = std::max(q, 2);
    d.cardinalities[j] = q;
    if (raw.empty()) continue;
    int distinct = 0;
    for (char s : seen) distinct += s;
    if (distinct == 1)
      out.warnings.push_back("item " + d.item_names[j] + " is constant");
    for (int v = 0; v < q; ++v)
      if (v >= static_cast<int>(seen.size()) || !seen[v])
        out.warnings.push_back("item " + d.item_names[j] + ": category " + std::to_string(v) +
                               " never observed");
  }
  return out;
}

IngestResult read_dataset_csv(std::istream& in, const std::optional<std::vector<int>>& cardinalities) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::non_rectangular, "empty file");
  std::vector<std::string> names = split_csv_line(line);
  std::vector<std::vector<long long>> raw;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    std::vector<long long> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      long long v = 0;
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (c.empty() || ec != std::errc() || p != c.data() + c.size())
        throw Error(ErrorCode::bad_cell, "line " + std::to_string(lineno) + ": '" + c + "' is not an integer code");
      row.push_back(v);
    }
    raw.push_back(std::move(row));
  }
  if (raw.empty()) throw Error(ErrorCode::non_rectangular, "no data rows");
  if (names.size() != raw.front().size())
    throw Error(ErrorCode::non_rectangular, "header and first row differ in length");
  return validate_dataset(raw, cardinalities, std::move(names));
}

IngestResult read_dataset_csv(const std::string& path, const std::optional<std::vector<int>>& cardinalities) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return read_dataset_csv(in, cardinalities);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const int J = data.items();
  for (int j = 0; j < J; ++j) {
    if (j) out << ',';
    out << (j < static_cast<int>(data.item_names.size()) ? data.item_names[j] : "Q" + std::to_string(j));
  }
  out << '\n';
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < J; ++j) {
      if (j) out << ',';
      out << data.at(i, j);
    }
    out << '\n';
  }
}

Dataset empty_dataset(std::vector<int> cardinalities) {
  Dataset d;
  d.cardinalities = std::move(cardinalities);
  for (size_t j = 0; j < d.cardinalities.size(); ++j) d.item_names.push_back("Q" + std::to_string(j));
  return d;
}

}  // namespace dlcm
