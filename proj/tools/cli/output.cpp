#include "output.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace afc::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // no "-0.000000"
  auto s = fmt::format("{:.6f}", v);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

std::string cell_text(const Cell& c) {
  struct V {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return csv_field(s); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_double(d); }
  };
  return std::visit(V{}, c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
  struct V {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(std::int64_t i) const { return i; }
    nlohmann::ordered_json operator()(double d) const {
      if (!std::isfinite(d)) return format_double(d);
      return d;
    }
  };
  return std::visit(V{}, c);
}

}  // namespace

std::string render_csv(const Table& table, const Meta& meta) {
  std::string s = fmt::format("# command: {}\n", meta.command);
  for (const auto& [k, v] : meta.params) s += fmt::format("# {}: {}\n", k, v);
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) s += ',';
    s += csv_field(table.columns[i]);
  }
  s += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += cell_text(row[i]);
    }
    s += '\n';
  }
  return s;
}

std::string render_json(const Table& table, const Meta& meta) {
  nlohmann::ordered_json j;
  j["command"] = meta.command;
  j["table"] = table.name;
  auto& params = j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta.params) params[k] = v;
  j["columns"] = table.columns;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < table.columns.size(); ++i) {
      r[table.columns[i]] = cell_json(row[i]);
    }
    rows.push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

std::string write_table(const Table& table, const Meta& meta, Format format,
                        const std::string& dir, std::ostream& out) {
  const std::string body =
      format == Format::Csv ? render_csv(table, meta) : render_json(table, meta);
  if (dir == "-") {
    out << "## " << table.name << '\n' << body;
    return "-";
  }
  std::filesystem::create_directories(dir);
  const auto path =
      std::filesystem::path(dir) / (table.name + (format == Format::Csv ? ".csv" : ".json"));
  std::ofstream f(path, std::ios::binary);
  f << body;
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return path.string();
}

}  // namespace afc::cli
