#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace afc::cli {

// monostate renders as an empty CSV field and a JSON null.
using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

struct Meta {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
};

enum class Format { Csv, Json };

std::string format_double(double v);

std::string render_csv(const Table& table, const Meta& meta);
std::string render_json(const Table& table, const Meta& meta);

// Writes <dir>/<name>.csv (or .json) and returns the path. dir "-" writes
// to `out` instead and returns "-".
std::string write_table(const Table& table, const Meta& meta, Format format,
                        const std::string& dir, std::ostream& out);

}  // namespace afc::cli
