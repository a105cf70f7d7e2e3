#pragma once

#include <cstdint>
#include <span>
#include <variant>

#include "koplqa/kb.hpp"
#include "koplqa/program.hpp"

namespace koplqa {

struct ExecError : std::runtime_error {
  int call_index = -1;
  explicit ExecError(const std::string& msg, int call = -1)
      : std::runtime_error(msg), call_index(call) {}
};

struct EntitySet {
  std::vector<std::string> ids;  // sorted, unique
  bool operator==(const EntitySet&) const = default;
};
struct ValueList {
  std::vector<TypedValue> values;
  bool operator==(const ValueList&) const = default;
};
struct CountValue {
  uint64_t count = 0;
  bool operator==(const CountValue&) const = default;
};
struct BoolValue {
  bool value = false;
  bool operator==(const BoolValue&) const = default;
};
struct NameList {
  std::vector<std::string> names;
  bool operator==(const NameList&) const = default;
};

using ExecResult = std::variant<EntitySet, ValueList, CountValue, BoolValue, NameList>;

struct Answer {
  ExecResult result;
  std::string rendered;  // "no result" when the result is empty
  std::vector<std::string> warnings;
  bool operator==(const Answer&) const = default;
};

std::string render_result(const ExecResult& r, const KnowledgeBase& kb);

ExecResult eval_call(const KnowledgeBase& kb, FunctionKind kind,
                     const std::vector<std::string>& inputs,
                     std::span<const ExecResult> dep_results,
                     std::vector<std::string>* warnings = nullptr);

Answer execute_program(const KnowledgeBase& kb, const Program& p);

}  // namespace koplqa
