#include "koplqa/program.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

#include "json.hpp"

namespace koplqa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<FunctionMeta> make_metas() {
  using K = FunctionKind;
  using S = SlotKind;
  std::vector<FunctionMeta> m;
  m.push_back({K::FindAll, "FindAll", 0, {}});
  m.push_back({K::Find, "Find", 0, {S::EntityName}});
  m.push_back({K::FilterConcept, "FilterConcept", 1, {S::ConceptName}});
  m.push_back({K::FilterStr, "FilterStr", 1, {S::AttributeKey, S::StringLit}});
  m.push_back({K::FilterNum, "FilterNum", 1, {S::AttributeKey, S::NumberLit, S::Operator}});
  m.push_back({K::FilterDate, "FilterDate", 1, {S::AttributeKey, S::DateLit, S::Operator}});
  m.push_back({K::FilterYear, "FilterYear", 1, {S::AttributeKey, S::YearLit, S::Operator}});
  m.push_back({K::Relate, "Relate", 1, {S::RelationName, S::DirectionLit}, 1});
  m.push_back({K::QueryAttr, "QueryAttr", 1, {S::AttributeKey}});
  m.push_back({K::What, "What", 1, {}});
  m.push_back({K::Count, "Count", 1, {}});
  m.push_back({K::And, "And", 2, {}});
  m.push_back({K::Or, "Or", 2, {}});
  m.push_back({K::SelectAmong, "SelectAmong", 1, {S::AttributeKey, S::SelectorAmong}});
  m.push_back({K::SelectBetween, "SelectBetween", 2, {S::AttributeKey, S::SelectorBetween}});
  m.push_back({K::VerifyStr, "VerifyStr", 1, {S::StringLit}});
  m.push_back({K::VerifyNum, "VerifyNum", 1, {S::NumberLit, S::Operator}});
  m.push_back({K::VerifyDate, "VerifyDate", 1, {S::DateLit, S::Operator}});
  m.push_back({K::VerifyYear, "VerifyYear", 1, {S::YearLit, S::Operator}});
  m.push_back({K::QueryRelation, "QueryRelation", 2, {}});
  return m;
}

const std::vector<FunctionMeta>& metas() {
  static const std::vector<FunctionMeta> m = make_metas();
  return m;
}

}  // namespace

const FunctionMeta& function_meta(FunctionKind kind) {
  return metas()[static_cast<size_t>(kind)];
}

std::optional<FunctionKind> function_from_name(const std::string& name) {
  static const std::unordered_map<std::string, FunctionKind> index = [] {
    std::unordered_map<std::string, FunctionKind> idx;
    for (const auto& m : metas()) idx.emplace(m.name, m.kind);
    idx.emplace("QueryName", FunctionKind::What);
    return idx;
  }();
  auto it = index.find(name);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

const std::vector<FunctionKind>& all_function_kinds() {
  static const std::vector<FunctionKind> kinds = [] {
    std::vector<FunctionKind> v;
    for (const auto& m : metas()) v.push_back(m.kind);
    return v;
  }();
  return kinds;
}

Sketch sketch_of(const Program& p) {
  Sketch s;
  s.reserve(p.calls.size());
  for (const auto& c : p.calls) s.push_back(c.function);
  return s;
}

namespace {

bool is_operator_token(const std::string& s) {
  return s == "<" || s == ">" || s == "=";
}

bool parse_decimal(const std::string& s, double& out) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

// "0.3" or "0.3 m" -> value + optional unit
bool parse_number_literal(const std::string& s, double& value, std::string& unit) {
  auto sp = s.find(' ');
  std::string num = sp == std::string::npos ? s : s.substr(0, sp);
  unit = sp == std::string::npos ? "" : s.substr(sp + 1);
  return parse_decimal(num, value);
}

bool parse_year_literal(const std::string& s, int64_t& out) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

void check_literal_shape(const FunctionCall& call, int call_index) {
  const FunctionMeta& m = function_meta(call.function);
  for (size_t i = 0; i < call.inputs.size(); ++i) {
    const std::string& arg = call.inputs[i];
    switch (m.slots[i]) {
      case SlotKind::Operator:
        if (!is_operator_token(arg))
          throw ProgramError("call " + std::to_string(call_index) + " slot " +
                                 std::to_string(i) + ": operator must be one of < > =",
                             call_index);
        break;
      case SlotKind::NumberLit: {
        double v;
        std::string unit;
        if (!parse_number_literal(arg, v, unit))
          throw ProgramError("call " + std::to_string(call_index) + " slot " +
                                 std::to_string(i) + ": not a decimal literal: " + arg,
                             call_index);
        break;
      }
      case SlotKind::DateLit:
        if (!CalendarDate::parse(arg))
          throw ProgramError("call " + std::to_string(call_index) + " slot " +
                                 std::to_string(i) + ": not a date literal: " + arg,
                             call_index);
        break;
      case SlotKind::YearLit: {
        int64_t y;
        if (!parse_year_literal(arg, y))
          throw ProgramError("call " + std::to_string(call_index) + " slot " +
                                 std::to_string(i) + ": not a year literal: " + arg,
                             call_index);
        break;
      }
      case SlotKind::SelectorAmong:
        if (arg != "largest" && arg != "smallest")
          throw ProgramError("call " + std::to_string(call_index) +
                                 ": selector must be largest or smallest",
                             call_index);
        break;
      case SlotKind::SelectorBetween:
        if (arg != "greater" && arg != "less")
          throw ProgramError("call " + std::to_string(call_index) +
                                 ": selector must be greater or less",
                             call_index);
        break;
      case SlotKind::DirectionLit:
        if (arg != "forward" && arg != "backward")
          throw ProgramError("call " + std::to_string(call_index) +
                                 ": direction must be forward or backward",
                             call_index);
        break;
      default:
        break;
    }
  }
}

void validate_structure(const Program& p) {
  if (p.calls.empty()) throw ProgramError("empty program");
  std::vector<bool> depended(p.calls.size(), false);
  for (size_t i = 0; i < p.calls.size(); ++i) {
    const FunctionCall& call = p.calls[i];
    const FunctionMeta& m = function_meta(call.function);
    if (static_cast<int>(call.dependencies.size()) != m.arity)
      throw ProgramError("call " + std::to_string(i) + " (" + m.name + "): expected " +
                             std::to_string(m.arity) + " dependencies, got " +
                             std::to_string(call.dependencies.size()),
                         static_cast<int>(i));
    for (int d : call.dependencies) {
      if (d < 0 || d >= static_cast<int>(i))
        throw ProgramError("call " + std::to_string(i) +
                               ": dependency must point to an earlier call",
                           static_cast<int>(i));
      depended[static_cast<size_t>(d)] = true;
    }
    size_t min_inputs = m.slots.size() - static_cast<size_t>(m.optional_slots);
    if (call.inputs.size() < min_inputs || call.inputs.size() > m.slots.size())
      throw ProgramError("call " + std::to_string(i) + " (" + m.name + "): expected " +
                             std::to_string(min_inputs) + ".." +
                             std::to_string(m.slots.size()) + " inputs, got " +
                             std::to_string(call.inputs.size()),
                         static_cast<int>(i));
    check_literal_shape(call, static_cast<int>(i));
  }
  for (size_t i = 0; i + 1 < p.calls.size(); ++i)
    if (!depended[i])
      throw ProgramError("call " + std::to_string(i) +
                             " is not the final call and nothing depends on it",
                         static_cast<int>(i));
}

}  // namespace

Program parse_program(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ProgramError(std::string("program syntax error: ") + e.what());
  }
  if (!doc.is_array()) throw ProgramError("program must be a JSON array of calls");
  Program p;
  for (size_t i = 0; i < doc.size(); ++i) {
    const json& jc = doc[i];
    if (!jc.is_object() || !jc.contains("function"))
      throw ProgramError("call " + std::to_string(i) + ": missing function",
                         static_cast<int>(i));
    FunctionCall call;
    std::string fname = jc.at("function").get<std::string>();
    auto kind = function_from_name(fname);
    if (!kind)
      throw ProgramError("call " + std::to_string(i) + ": unknown function " + fname,
                         static_cast<int>(i));
    call.function = *kind;
    for (const json& in : jc.value("inputs", json::array()))
      call.inputs.push_back(in.is_string() ? in.get<std::string>() : in.dump());
    for (const json& d : jc.value("dependencies", json::array()))
      call.dependencies.push_back(d.get<int>());
    p.calls.push_back(std::move(call));
  }
  validate_structure(p);
  return p;
}

std::string serialize_program(const Program& p) {
  ordered_json arr = ordered_json::array();
  for (const auto& call : p.calls) {
    ordered_json jc;
    jc["function"] = function_meta(call.function).name;
    jc["inputs"] = call.inputs;
    jc["dependencies"] = call.dependencies;
    arr.push_back(std::move(jc));
  }
  return arr.dump();
}

Program assign_dependencies(const Sketch& sketch,
                            const std::vector<std::vector<std::string>>& args) {
  if (sketch.empty()) throw ProgramError("empty sketch");
  if (args.size() != sketch.size())
    throw ProgramError("argument list count does not match sketch length");
  Program p;
  std::vector<int> stack;
  for (size_t i = 0; i < sketch.size(); ++i) {
    const FunctionMeta& m = function_meta(sketch[i]);
    FunctionCall call;
    call.function = sketch[i];
    call.inputs = args[i];
    if (stack.size() < static_cast<size_t>(m.arity))
      throw ProgramError("stack underflow at call " + std::to_string(i) + " (" +
                             m.name + ")",
                         static_cast<int>(i));
    call.dependencies.resize(static_cast<size_t>(m.arity));
    // topmost result becomes the last dependency
    for (int k = m.arity - 1; k >= 0; --k) {
      call.dependencies[static_cast<size_t>(k)] = stack.back();
      stack.pop_back();
    }
    stack.push_back(static_cast<int>(i));
    p.calls.push_back(std::move(call));
  }
  if (stack.size() != 1)
    throw ProgramError("disconnected program: final stack depth " +
                       std::to_string(stack.size()));
  validate_structure(p);
  return p;
}

std::vector<SlotDiagnostic> validate_slots(const Program& p, const KnowledgeBase& kb) {
  std::vector<SlotDiagnostic> out;
  for (size_t i = 0; i < p.calls.size(); ++i) {
    const FunctionCall& call = p.calls[i];
    const FunctionMeta& m = function_meta(call.function);
    for (size_t s = 0; s < call.inputs.size(); ++s) {
      SlotDiagnostic d;
      d.call_index = static_cast<int>(i);
      d.slot_index = static_cast<int>(s);
      const std::string& arg = call.inputs[s];
      switch (m.slots[s]) {
        case SlotKind::EntityName:
          if (kb.lookup_by_name(arg).empty()) {
            d.ok = false;
            d.message = "unresolvable entity name: " + arg;
          }
          break;
        case SlotKind::ConceptName:
          if (!kb.concept_by_name(arg)) {
            d.ok = false;
            d.message = "unknown concept: " + arg;
          }
          break;
        case SlotKind::RelationName:
          if (!kb.has_relation(arg)) {
            d.ok = false;
            d.message = "unknown relation: " + arg;
          }
          break;
        case SlotKind::AttributeKey: {
          auto it = kb.attribute_kinds().find(arg);
          if (it == kb.attribute_kinds().end()) {
            d.ok = false;
            d.message = "unknown attribute key: " + arg;
            break;
          }
          ValueKind vk = it->second;
          bool compatible = true;
          switch (call.function) {
            case FunctionKind::FilterStr:
              compatible = vk == ValueKind::String;
              break;
            case FunctionKind::FilterNum:
            case FunctionKind::SelectAmong:
            case FunctionKind::SelectBetween:
              compatible = vk == ValueKind::Quantity;
              break;
            case FunctionKind::FilterDate:
              compatible = vk == ValueKind::Date;
              break;
            case FunctionKind::FilterYear:
              compatible = vk == ValueKind::Date || vk == ValueKind::Year;
              break;
            default:
              break;
          }
          if (!compatible) {
            d.ok = false;
            d.message = "attribute " + arg + " has kind " + value_kind_name(vk) +
                        ", incompatible with " + m.name;
          }
          break;
        }
        default:
          break;  // literal shapes already enforced by program validation
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

bool slots_clean(const std::vector<SlotDiagnostic>& diags) {
  return std::all_of(diags.begin(), diags.end(),
                     [](const SlotDiagnostic& d) { return d.ok; });
}

}  // namespace koplqa
