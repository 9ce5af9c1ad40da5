#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "xva/harness/config.hpp"
#include "xva/harness/runner.hpp"

namespace xva::harness {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<std::string_view, 13> kColumns = {
    "scenario", "solver", "sweep_param", "sweep_value", "tau",
    "x",        "value",  "benchmark",   "abs_error",   "se",
    "ci_lo",    "ci_hi",  "wall_ms"};

namespace detail {

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline std::string csv_number(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

inline nlohmann::ordered_json json_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline void write_csv(const ResultTable& table, std::ostream& out) {
  for (std::size_t i = 0; i < kColumns.size(); ++i)
    out << (i ? "," : "") << kColumns[i];
  out << '\n';
  for (const auto& r : table.rows) {
    using detail::csv_field;
    using detail::csv_number;
    out << csv_field(r.scenario) << ',' << csv_field(r.solver) << ','
        << csv_field(r.sweep_param) << ',' << csv_field(r.sweep_value) << ','
        << detail::format_double(r.tau) << ',' << detail::format_double(r.x)
        << ',' << csv_number(r.value) << ',' << csv_number(r.benchmark) << ','
        << csv_number(r.abs_error) << ',' << csv_number(r.se) << ','
        << csv_number(r.ci_lo) << ',' << csv_number(r.ci_hi) << ','
        << csv_number(r.wall_ms) << '\n';
  }
}

inline nlohmann::ordered_json to_json(const ResultTable& table) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json o;
    o["scenario"] = r.scenario;
    o["solver"] = r.solver;
    o["sweep_param"] = r.sweep_param;
    o["sweep_value"] = r.sweep_value;
    o["tau"] = r.tau;
    o["x"] = r.x;
    o["value"] = detail::json_number(r.value);
    o["benchmark"] = detail::json_number(r.benchmark);
    o["abs_error"] = detail::json_number(r.abs_error);
    o["se"] = detail::json_number(r.se);
    o["ci_lo"] = detail::json_number(r.ci_lo);
    o["ci_hi"] = detail::json_number(r.ci_hi);
    o["wall_ms"] = detail::json_number(r.wall_ms);
    rows.push_back(std::move(o));
  }
  return rows;
}

inline void write_json(const ResultTable& table, std::ostream& out) {
  out << to_json(table).dump(2) << '\n';
}

inline void emit(const ResultTable& table, Format format, std::ostream& out) {
  if (format == Format::csv)
    write_csv(table, out);
  else
    write_json(table, out);
}

/// Writes the table to a file; throws io_error naming the path on failure.
inline void emit(const ResultTable& table, Format format,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  emit(table, format, out);
  out.flush();
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace xva::harness
