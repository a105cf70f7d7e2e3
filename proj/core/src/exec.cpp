#include "koplqa/exec.hpp"

#include <algorithm>
#include <charconv>
#include <functional>

namespace koplqa {

namespace {

const EntitySet& expect_entities(std::span<const ExecResult> deps, size_t i,
                                 const char* fn) {
  if (i >= deps.size() || !std::holds_alternative<EntitySet>(deps[i]))
    throw ExecError(std::string(fn) + ": dependency " + std::to_string(i) +
                    " is not an entity set");
  return std::get<EntitySet>(deps[i]);
}

const ValueList& expect_values(std::span<const ExecResult> deps, size_t i,
                               const char* fn) {
  if (i >= deps.size() || !std::holds_alternative<ValueList>(deps[i]))
    throw ExecError(std::string(fn) + ": dependency " + std::to_string(i) +
                    " is not a value list");
  return std::get<ValueList>(deps[i]);
}

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool cmp(char op, int ordering) {
  switch (op) {
    case '<': return ordering < 0;
    case '>': return ordering > 0;
    default: return ordering == 0;
  }
}

int cmp_double(double a, double b) { return a < b ? -1 : (a > b ? 1 : 0); }

char op_char(const std::string& s) { return s.empty() ? '=' : s[0]; }

double parse_num(const std::string& s, std::string* unit_out) {
  auto sp = s.find(' ');
  std::string num = sp == std::string::npos ? s : s.substr(0, sp);
  if (unit_out) *unit_out = sp == std::string::npos ? "" : s.substr(sp + 1);
  double v = 0.0;
  std::from_chars(num.data(), num.data() + num.size(), v);
  return v;
}

ValueKind require_key(const KnowledgeBase& kb, const std::string& key, const char* fn) {
  auto it = kb.attribute_kinds().find(key);
  if (it == kb.attribute_kinds().end())
    throw ExecError(std::string(fn) + ": unknown attribute key: " + key);
  return it->second;
}

// All facts for `key` on one entity.
std::vector<const AttributeFact*> facts_of(const Entity& e, const std::string& key) {
  std::vector<const AttributeFact*> out;
  for (const auto& f : e.attributes)
    if (f.key == key) out.push_back(&f);
  return out;
}

EntitySet filter_entities(const KnowledgeBase& kb, const EntitySet& in,
                          const std::string& key,
                          const std::function<bool(const TypedValue&)>& pred) {
  EntitySet out;
  for (const auto& id : in.ids) {
    const Entity* e = kb.entity(id);
    if (!e) continue;
    for (const AttributeFact* f : facts_of(*e, key)) {
      if (pred(f->value)) {
        out.ids.push_back(id);
        break;
      }
    }
  }
  return out;
}

}  // namespace

ExecResult eval_call(const KnowledgeBase& kb, FunctionKind kind,
                     const std::vector<std::string>& inputs,
                     std::span<const ExecResult> dep_results,
                     std::vector<std::string>* warnings) {
  const FunctionMeta& meta = function_meta(kind);
  if (dep_results.size() != static_cast<size_t>(meta.arity))
    throw ExecError(std::string(meta.name) + ": expected " +
                    std::to_string(meta.arity) + " dependency results");
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };

  switch (kind) {
    case FunctionKind::FindAll: {
      EntitySet out;
      for (const auto& [id, _] : kb.entities()) out.ids.push_back(id);
      return out;
    }
    case FunctionKind::Find: {
      EntitySet out;
      out.ids = kb.lookup_by_name(inputs.at(0));
      return out;
    }
    case FunctionKind::FilterConcept: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      const Concept* c = kb.concept_by_name(inputs.at(0));
      if (!c) throw ExecError("FilterConcept: unknown concept: " + inputs.at(0));
      EntitySet out;
      for (const auto& id : in.ids)
        if (kb.is_member(id, c->id)) out.ids.push_back(id);
      return out;
    }
    case FunctionKind::FilterStr: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      require_key(kb, inputs.at(0), meta.name);
      const std::string& want = inputs.at(1);
      return filter_entities(kb, in, inputs.at(0), [&](const TypedValue& v) {
        return v.kind == ValueKind::String && v.string_value == want;
      });
    }
    case FunctionKind::FilterNum: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      require_key(kb, inputs.at(0), meta.name);
      std::string want_unit;
      double want = parse_num(inputs.at(1), &want_unit);
      char op = op_char(inputs.at(2));
      return filter_entities(kb, in, inputs.at(0), [&](const TypedValue& v) {
        if (v.kind != ValueKind::Quantity) return false;
        if (!want_unit.empty() && v.unit != want_unit) {
          warn("FilterNum: unit mismatch (" + v.unit + " vs " + want_unit +
               ") on attribute " + inputs.at(0));
          return false;
        }
        return cmp(op, cmp_double(v.number_value, want));
      });
    }
    case FunctionKind::FilterDate: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      require_key(kb, inputs.at(0), meta.name);
      auto want = CalendarDate::parse(inputs.at(1));
      if (!want) throw ExecError("FilterDate: bad date literal: " + inputs.at(1));
      char op = op_char(inputs.at(2));
      return filter_entities(kb, in, inputs.at(0), [&](const TypedValue& v) {
        if (v.kind != ValueKind::Date) return false;
        int ord = v.date_value < *want ? -1 : (v.date_value == *want ? 0 : 1);
        return cmp(op, ord);
      });
    }
    case FunctionKind::FilterYear: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      require_key(kb, inputs.at(0), meta.name);
      int64_t want = 0;
      std::from_chars(inputs.at(1).data(), inputs.at(1).data() + inputs.at(1).size(),
                      want);
      char op = op_char(inputs.at(2));
      return filter_entities(kb, in, inputs.at(0), [&](const TypedValue& v) {
        int64_t y;
        if (v.kind == ValueKind::Date) y = v.date_value.year;
        else if (v.kind == ValueKind::Year) y = v.year_value;
        else return false;
        return cmp(op, y < want ? -1 : (y == want ? 0 : 1));
      });
    }
    case FunctionKind::Relate: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      const std::string& predicate = inputs.at(0);
      if (!kb.has_relation(predicate))
        throw ExecError("Relate: unknown relation: " + predicate);
      Direction dir = Direction::Forward;
      if (inputs.size() > 1 && inputs[1] == "backward") dir = Direction::Backward;
      EntitySet out;
      for (const auto& id : in.ids) {
        const Entity* e = kb.entity(id);
        if (!e) continue;
        for (const auto& r : e->relations)
          if (r.predicate == predicate && r.direction == dir)
            out.ids.push_back(r.object);
      }
      sort_unique(out.ids);
      return out;
    }
    case FunctionKind::QueryAttr: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      require_key(kb, inputs.at(0), meta.name);
      ValueList out;
      for (const auto& id : in.ids) {
        const Entity* e = kb.entity(id);
        if (!e) continue;
        for (const AttributeFact* f : facts_of(*e, inputs.at(0)))
          out.values.push_back(f->value);
      }
      return out;
    }
    case FunctionKind::What: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      NameList out;
      for (const auto& id : in.ids) {
        const Entity* e = kb.entity(id);
        if (e) out.names.push_back(e->name);
      }
      return out;
    }
    case FunctionKind::Count: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      return CountValue{in.ids.size()};
    }
    case FunctionKind::And:
    case FunctionKind::Or: {
      const EntitySet& a = expect_entities(dep_results, 0, meta.name);
      const EntitySet& b = expect_entities(dep_results, 1, meta.name);
      EntitySet out;
      if (kind == FunctionKind::And)
        std::set_intersection(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(),
                              std::back_inserter(out.ids));
      else
        std::set_union(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(),
                       std::back_inserter(out.ids));
      return out;
    }
    case FunctionKind::SelectAmong: {
      const EntitySet& in = expect_entities(dep_results, 0, meta.name);
      if (in.ids.empty()) throw ExecError("SelectAmong: empty input entity set");
      require_key(kb, inputs.at(0), meta.name);
      bool largest = inputs.at(1) == "largest";
      EntitySet out;
      bool have = false;
      double best = 0.0;
      std::string best_unit;
      for (const auto& id : in.ids) {
        const Entity* e = kb.entity(id);
        if (!e) continue;
        for (const AttributeFact* f : facts_of(*e, inputs.at(0))) {
          if (f->value.kind != ValueKind::Quantity) continue;
          double v = f->value.number_value;
          if (!have) {
            have = true;
            best = v;
            best_unit = f->value.unit;
            out.ids = {id};
          } else {
            if (f->value.unit != best_unit)
              warn("SelectAmong: mixed units on attribute " + inputs.at(0));
            if (v == best) {
              out.ids.push_back(id);
            } else if (largest ? v > best : v < best) {
              best = v;
              out.ids = {id};
            }
          }
        }
      }
      if (!have)
        throw ExecError("SelectAmong: no entity carries attribute " + inputs.at(0));
      sort_unique(out.ids);
      return out;
    }
    case FunctionKind::SelectBetween: {
      const EntitySet& a = expect_entities(dep_results, 0, meta.name);
      const EntitySet& b = expect_entities(dep_results, 1, meta.name);
      if (a.ids.empty() || b.ids.empty())
        throw ExecError("SelectBetween: empty input entity set");
      if (a.ids.size() > 1 || b.ids.size() > 1)
        warn("SelectBetween: input not a single entity, using the first");
      require_key(kb, inputs.at(0), meta.name);
      bool greater = inputs.at(1) == "greater";
      auto value_of = [&](const std::string& id) -> double {
        const Entity* e = kb.entity(id);
        if (e)
          for (const AttributeFact* f : facts_of(*e, inputs.at(0)))
            if (f->value.kind == ValueKind::Quantity) return f->value.number_value;
        throw ExecError("SelectBetween: entity " + id + " lacks attribute " +
                        inputs.at(0));
      };
      double va = value_of(a.ids.front());
      double vb = value_of(b.ids.front());
      bool pick_a = greater ? va >= vb : va <= vb;
      return EntitySet{{pick_a ? a.ids.front() : b.ids.front()}};
    }
    case FunctionKind::VerifyStr: {
      const ValueList& in = expect_values(dep_results, 0, meta.name);
      if (in.values.empty()) throw ExecError("VerifyStr: empty value list");
      const std::string& want = inputs.at(0);
      bool ok = std::all_of(in.values.begin(), in.values.end(), [&](const TypedValue& v) {
        return v.kind == ValueKind::String && v.string_value == want;
      });
      return BoolValue{ok};
    }
    case FunctionKind::VerifyNum: {
      const ValueList& in = expect_values(dep_results, 0, meta.name);
      if (in.values.empty()) throw ExecError("VerifyNum: empty value list");
      std::string want_unit;
      double want = parse_num(inputs.at(0), &want_unit);
      char op = op_char(inputs.at(1));
      bool ok = true;
      for (const auto& v : in.values) {
        if (v.kind != ValueKind::Quantity) {
          ok = false;
          continue;
        }
        if (!want_unit.empty() && v.unit != want_unit) {
          warn("VerifyNum: unit mismatch (" + v.unit + " vs " + want_unit + ")");
          ok = false;
          continue;
        }
        if (!cmp(op, cmp_double(v.number_value, want))) ok = false;
      }
      return BoolValue{ok};
    }
    case FunctionKind::VerifyDate: {
      const ValueList& in = expect_values(dep_results, 0, meta.name);
      if (in.values.empty()) throw ExecError("VerifyDate: empty value list");
      auto want = CalendarDate::parse(inputs.at(0));
      if (!want) throw ExecError("VerifyDate: bad date literal: " + inputs.at(0));
      char op = op_char(inputs.at(1));
      bool ok = std::all_of(in.values.begin(), in.values.end(), [&](const TypedValue& v) {
        if (v.kind != ValueKind::Date) return false;
        int ord = v.date_value < *want ? -1 : (v.date_value == *want ? 0 : 1);
        return cmp(op, ord);
      });
      return BoolValue{ok};
    }
    case FunctionKind::VerifyYear: {
      const ValueList& in = expect_values(dep_results, 0, meta.name);
      if (in.values.empty()) throw ExecError("VerifyYear: empty value list");
      int64_t want = 0;
      std::from_chars(inputs.at(0).data(), inputs.at(0).data() + inputs.at(0).size(),
                      want);
      char op = op_char(inputs.at(1));
      bool ok = std::all_of(in.values.begin(), in.values.end(), [&](const TypedValue& v) {
        int64_t y;
        if (v.kind == ValueKind::Date) y = v.date_value.year;
        else if (v.kind == ValueKind::Year) y = v.year_value;
        else return false;
        return cmp(op, y < want ? -1 : (y == want ? 0 : 1));
      });
      return BoolValue{ok};
    }
    case FunctionKind::QueryRelation: {
      const EntitySet& a = expect_entities(dep_results, 0, meta.name);
      const EntitySet& b = expect_entities(dep_results, 1, meta.name);
      if (a.ids.empty() || b.ids.empty())
        throw ExecError("QueryRelation: empty input entity set");
      NameList out;
      const Entity* ea = kb.entity(a.ids.front());
      const std::string& target = b.ids.front();
      if (ea)
        for (const auto& r : ea->relations)
          if (r.object == target) out.names.push_back(r.predicate);
      sort_unique(out.names);
      return out;
    }
  }
  throw ExecError("unhandled function kind");
}

std::string render_result(const ExecResult& r, const KnowledgeBase& kb) {
  auto join = [](const std::vector<std::string>& parts) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
      if (i) out += ", ";
      out += parts[i];
    }
    return out;
  };
  if (const auto* es = std::get_if<EntitySet>(&r)) {
    if (es->ids.empty()) return "no result";
    std::vector<std::string> names;
    for (const auto& id : es->ids) {
      const Entity* e = kb.entity(id);
      names.push_back(e ? e->name : id);
    }
    return join(names);
  }
  if (const auto* vl = std::get_if<ValueList>(&r)) {
    if (vl->values.empty()) return "no result";
    std::vector<std::string> parts;
    for (const auto& v : vl->values) parts.push_back(v.render());
    return join(parts);
  }
  if (const auto* c = std::get_if<CountValue>(&r)) return std::to_string(c->count);
  if (const auto* b = std::get_if<BoolValue>(&r)) return b->value ? "true" : "false";
  const auto& nl = std::get<NameList>(r);
  return nl.names.empty() ? "no result" : join(nl.names);
}

Answer execute_program(const KnowledgeBase& kb, const Program& p) {
  if (p.calls.empty()) throw ExecError("empty program");
  std::vector<ExecResult> results;
  results.reserve(p.calls.size());
  Answer answer;
  for (size_t i = 0; i < p.calls.size(); ++i) {
    const FunctionCall& call = p.calls[i];
    std::vector<ExecResult> deps;
    for (int d : call.dependencies) deps.push_back(results[static_cast<size_t>(d)]);
    try {
      results.push_back(
          eval_call(kb, call.function, call.inputs, deps, &answer.warnings));
    } catch (const ExecError& e) {
      throw ExecError("call " + std::to_string(i) + ": " + e.what(),
                      static_cast<int>(i));
    }
  }
  answer.result = results.back();
  answer.rendered = render_result(answer.result, kb);
  return answer;
}

}  // namespace koplqa
