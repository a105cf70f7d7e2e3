#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "koplqa/kb.hpp"

namespace koplqa {

struct ProgramError : std::runtime_error {
  int call_index = -1;
  explicit ProgramError(const std::string& msg, int call = -1)
      : std::runtime_error(msg), call_index(call) {}
};

enum class FunctionKind {
  FindAll,
  Find,
  FilterConcept,
  FilterStr,
  FilterNum,
  FilterDate,
  FilterYear,
  Relate,
  QueryAttr,
  What,
  Count,
  And,
  Or,
  SelectAmong,
  SelectBetween,
  VerifyStr,
  VerifyNum,
  VerifyDate,
  VerifyYear,
  QueryRelation,
};

enum class SlotKind {
  EntityName,
  ConceptName,
  RelationName,
  AttributeKey,
  Operator,      // one of < > =
  StringLit,
  NumberLit,     // decimal, optionally "value unit"
  DateLit,       // YYYY-MM-DD
  YearLit,
  SelectorAmong,   // largest | smallest
  SelectorBetween, // greater | less
  DirectionLit,    // forward | backward
};

struct FunctionMeta {
  FunctionKind kind;
  const char* name;
  int arity;  // number of dependencies: 0, 1 or 2
  std::vector<SlotKind> slots;
  int optional_slots = 0;  // trailing slots that may be omitted
};

const FunctionMeta& function_meta(FunctionKind kind);
std::optional<FunctionKind> function_from_name(const std::string& name);
const std::vector<FunctionKind>& all_function_kinds();

struct FunctionCall {
  FunctionKind function = FunctionKind::FindAll;
  std::vector<std::string> inputs;
  std::vector<int> dependencies;
  bool operator==(const FunctionCall&) const = default;
};

struct Program {
  std::vector<FunctionCall> calls;
  bool operator==(const Program&) const = default;
};

using Sketch = std::vector<FunctionKind>;

Sketch sketch_of(const Program& p);

// JSON array of {"function","inputs","dependencies"} objects.
Program parse_program(const std::string& json_text);

// Canonical form: fixed key order, compact whitespace; parse(serialize(p)) == p.
std::string serialize_program(const Program& p);

// Stack discipline: calls are processed left to right, each pops
// arity(function) result indices (top of stack becomes the LAST dependency)
// and pushes its own index. The final stack must hold exactly one index.
Program assign_dependencies(const Sketch& sketch,
                            const std::vector<std::vector<std::string>>& args);

struct SlotDiagnostic {
  int call_index = 0;
  int slot_index = 0;
  bool ok = true;
  std::string message;
};

std::vector<SlotDiagnostic> validate_slots(const Program& p, const KnowledgeBase& kb);
bool slots_clean(const std::vector<SlotDiagnostic>& diags);

}  // namespace koplqa
