#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace koplqa {

enum class ValueKind { String, Quantity, Date, Year };

const char* value_kind_name(ValueKind k);
std::optional<ValueKind> value_kind_from_name(const std::string& name);

struct CalendarDate {
  int year = 0;
  int month = 1;
  int day = 1;

  auto operator<=>(const CalendarDate&) const = default;

  bool valid() const;
  std::string to_iso() const;
  static std::optional<CalendarDate> parse(const std::string& iso);
};

// Shortest decimal representation that round-trips the double.
std::string format_decimal(double v);

// Tagged value stored in attribute facts and produced by QueryAttr.
// Exactly the fields of the declared kind are meaningful.
struct TypedValue {
  ValueKind kind = ValueKind::String;
  std::string string_value;
  double number_value = 0.0;
  std::string unit;
  CalendarDate date_value;
  int64_t year_value = 0;

  static TypedValue str(std::string s);
  static TypedValue quantity(double v, std::string unit = "");
  static TypedValue date(CalendarDate d);
  static TypedValue year(int64_t y);

  // "28.5 deg", "2022-04-08", "2019", or the raw string.
  std::string render() const;

  bool operator==(const TypedValue& o) const;
};

}  // namespace koplqa
