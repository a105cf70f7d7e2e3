#include "koplqa/value.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace koplqa {

const char* value_kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::String: return "string";
    case ValueKind::Quantity: return "quantity";
    case ValueKind::Date: return "date";
    case ValueKind::Year: return "year";
  }
  return "string";
}

std::optional<ValueKind> value_kind_from_name(const std::string& name) {
  if (name == "string") return ValueKind::String;
  if (name == "quantity") return ValueKind::Quantity;
  if (name == "date") return ValueKind::Date;
  if (name == "year") return ValueKind::Year;
  return std::nullopt;
}

bool CalendarDate::valid() const {
  if (month < 1 || month > 12 || day < 1) return false;
  static constexpr std::array<int, 12> days = {31, 28, 31, 30, 31, 30,
                                               31, 31, 30, 31, 30, 31};
  int max_day = days[static_cast<size_t>(month - 1)];
  bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  if (month == 2 && leap) max_day = 29;
  return day <= max_day;
}

std::string CalendarDate::to_iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<CalendarDate> CalendarDate::parse(const std::string& iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  CalendarDate d;
  auto num = [&](size_t begin, size_t len, int& out) {
    auto res = std::from_chars(iso.data() + begin, iso.data() + begin + len, out);
    return res.ec == std::errc{} && res.ptr == iso.data() + begin + len;
  };
  if (!num(0, 4, d.year) || !num(5, 2, d.month) || !num(8, 2, d.day)) return std::nullopt;
  if (!d.valid()) return std::nullopt;
  return d;
}

std::string format_decimal(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

TypedValue TypedValue::str(std::string s) {
  TypedValue v;
  v.kind = ValueKind::String;
  v.string_value = std::move(s);
  return v;
}

TypedValue TypedValue::quantity(double val, std::string unit) {
  TypedValue v;
  v.kind = ValueKind::Quantity;
  v.number_value = val;
  v.unit = std::move(unit);
  return v;
}

TypedValue TypedValue::date(CalendarDate d) {
  TypedValue v;
  v.kind = ValueKind::Date;
  v.date_value = d;
  return v;
}

TypedValue TypedValue::year(int64_t y) {
  TypedValue v;
  v.kind = ValueKind::Year;
  v.year_value = y;
  return v;
}

std::string TypedValue::render() const {
  switch (kind) {
    case ValueKind::String: return string_value;
    case ValueKind::Quantity:
      return unit.empty() ? format_decimal(number_value)
                          : format_decimal(number_value) + " " + unit;
    case ValueKind::Date: return date_value.to_iso();
    case ValueKind::Year: return std::to_string(year_value);
  }
  return {};
}

bool TypedValue::operator==(const TypedValue& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case ValueKind::String: return string_value == o.string_value;
    case ValueKind::Quantity:
      return number_value == o.number_value && unit == o.unit;
    case ValueKind::Date: return date_value == o.date_value;
    case ValueKind::Year: return year_value == o.year_value;
  }
  return false;
}

}  // namespace koplqa
