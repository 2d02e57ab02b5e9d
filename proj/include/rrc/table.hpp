#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace rrc {

using TableValue = std::variant<std::string, std::int64_t, double>;

/// Column-named rows, written as CSV (doubles in shortest round-trip form) or JSON.
struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<TableValue>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& column_name) const;
  const std::string& text(std::size_t row, const std::string& column_name) const;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

std::string format_double(double x);

}  // namespace rrc
