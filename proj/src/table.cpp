#include "rrc/table.hpp"

#include <charconv>
#include <cmath>

#include "rrc/error.hpp"

namespace rrc {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::size_t ResultTable::column(const std::string& name_) const {
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] == name_) return k;
  }
  throw Error(ErrorCode::not_found, "no column '" + name_ + "' in table '" + name + "'");
}

double ResultTable::number(std::size_t row, const std::string& column_name) const {
  const auto& v = rows.at(row).at(column(column_name));
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw Error(ErrorCode::invalid_argument, "column '" + column_name + "' is not numeric");
}

const std::string& ResultTable::text(std::size_t row, const std::string& column_name) const {
  return std::get<std::string>(rows.at(row).at(column(column_name)));
}

namespace {

std::string csv_field(const TableValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    if (s->find_first_of(",\"\n") == std::string::npos) return *s;
    std::string out = "\"";
    for (char c : *s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return format_double(std::get<double>(v));
}

}  // namespace

std::string ResultTable::to_csv() const {
  std::string out;
  for (std::size_t k = 0; k < columns.size(); ++k) out += (k ? "," : "") + columns[k];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + csv_field(row[k]);
    out += '\n';
  }
  return out;
}

nlohmann::json ResultTable::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json o = nlohmann::json::object();
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::visit([&](const auto& x) { o[columns[k]] = x; }, row[k]);
    }
    arr.push_back(std::move(o));
  }
  return {{"name", name}, {"columns", columns}, {"rows", std::move(arr)}};
}

}  // namespace rrc
