#include "koplqa/augment.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"

namespace koplqa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Rng = std::mt19937_64;

template <typename T>
const T& pick_uniform(const std::vector<T>& pool, Rng& rng) {
  std::uniform_int_distribution<size_t> dist(0, pool.size() - 1);
  return pool[dist(rng)];
}

std::vector<std::string> sorted(std::set<std::string> s) {
  return {s.begin(), s.end()};
}

// Entities sharing at least one direct concept with `id`, excluding `id`.
std::vector<std::string> same_concept_entities(const KnowledgeBase& kb,
                                               const std::string& id) {
  const Entity* e = kb.entity(id);
  if (!e) return {};
  std::set<std::string> out;
  for (const auto& [oid, other] : kb.entities()) {
    if (oid == id) continue;
    for (const auto& c : other.instance_of)
      if (std::find(e->instance_of.begin(), e->instance_of.end(), c) !=
          e->instance_of.end()) {
        out.insert(oid);
        break;
      }
  }
  return sorted(std::move(out));
}

bool key_kind_fits(FunctionKind fn, ValueKind vk) {
  switch (fn) {
    case FunctionKind::FilterStr: return vk == ValueKind::String;
    case FunctionKind::FilterNum:
    case FunctionKind::SelectAmong:
    case FunctionKind::SelectBetween: return vk == ValueKind::Quantity;
    case FunctionKind::FilterDate: return vk == ValueKind::Date;
    case FunctionKind::FilterYear: return vk == ValueKind::Date || vk == ValueKind::Year;
    default: return true;
  }
}

struct MutationAttempt {
  Program program;
  std::vector<Substitution> substitutions;
  std::string failure;  // non-empty on abort
};

MutationAttempt mutate_once(const Program& p, const KnowledgeBase& kb, Rng& rng,
                            const MutationOptions& opts) {
  MutationAttempt out;
  out.program = p;
  std::vector<ExecResult> results;

  auto substitute = [&](int call, int slot, const std::string& replacement) {
    std::string& arg = out.program.calls[static_cast<size_t>(call)]
                           .inputs[static_cast<size_t>(slot)];
    if (arg == replacement) return;
    out.substitutions.push_back({call, slot, arg, replacement});
    arg = replacement;
  };

  for (size_t i = 0; i < out.program.calls.size(); ++i) {
    FunctionCall& call = out.program.calls[i];
    const FunctionMeta& meta = function_meta(call.function);

    // scope = the entity set this call consumes
    std::vector<std::string> scope;
    bool scoped = false;
    if (meta.arity >= 1) {
      const ExecResult& dep = results[static_cast<size_t>(call.dependencies[0])];
      if (const auto* es = std::get_if<EntitySet>(&dep)) {
        scope = es->ids;
        scoped = true;
      }
    }
    if (!scoped)
      for (const auto& [id, _] : kb.entities()) scope.push_back(id);

    const ExecResult* dep_values = nullptr;
    if (meta.arity >= 1) {
      const ExecResult& dep = results[static_cast<size_t>(call.dependencies[0])];
      if (std::holds_alternative<ValueList>(dep)) dep_values = &dep;
    }

    std::string chosen_key;
    for (size_t s = 0; s < call.inputs.size(); ++s) {
      const std::string original = call.inputs[s];
      switch (meta.slots[s]) {
        case SlotKind::EntityName: {
          auto ids = kb.lookup_by_name(original);
          if (ids.empty()) {
            out.failure = "entity slot does not resolve: " + original;
            return out;
          }
          auto pool = same_concept_entities(kb, ids.front());
          if (pool.empty()) {
            out.failure = "no same-concept replacement for entity " + original;
            return out;
          }
          const Entity* repl = kb.entity(pick_uniform(pool, rng));
          substitute(static_cast<int>(i), static_cast<int>(s), repl->name);
          break;
        }
        case SlotKind::ConceptName: {
          // concepts with at least one member in scope
          std::set<std::string> names;
          for (const auto& id : scope) {
            const Entity* e = kb.entity(id);
            if (!e) continue;
            for (const auto& cid : e->instance_of)
              if (const Concept* c = kb.concept_by_id(cid)) names.insert(c->name);
          }
          names.erase(original);
          auto pool = sorted(std::move(names));
          if (!pool.empty())
            substitute(static_cast<int>(i), static_cast<int>(s),
                       pick_uniform(pool, rng));
          break;
        }
        case SlotKind::RelationName: {
          std::set<std::string> preds;
          for (const auto& id : scope) {
            const Entity* e = kb.entity(id);
            if (!e) continue;
            for (const auto& r : e->relations)
              if (r.direction == Direction::Forward) preds.insert(r.predicate);
          }
          preds.erase(original);
          auto pool = sorted(std::move(preds));
          if (!pool.empty())
            substitute(static_cast<int>(i), static_cast<int>(s),
                       pick_uniform(pool, rng));
          chosen_key.clear();
          break;
        }
        case SlotKind::AttributeKey: {
          std::set<std::string> keys;
          for (const auto& id : scope) {
            const Entity* e = kb.entity(id);
            if (!e) continue;
            for (const auto& f : e->attributes)
              if (key_kind_fits(call.function, f.value.kind)) keys.insert(f.key);
          }
          bool had_alternative = keys.size() > 1 || !keys.count(original);
          if (had_alternative) keys.erase(original);
          auto pool = sorted(std::move(keys));
          if (pool.empty()) {
            out.failure = "no replacement attribute pool for key " + original;
            return out;
          }
          chosen_key = pick_uniform(pool, rng);
          substitute(static_cast<int>(i), static_cast<int>(s), chosen_key);
          break;
        }
        case SlotKind::StringLit:
        case SlotKind::NumberLit:
        case SlotKind::DateLit:
        case SlotKind::YearLit: {
          // observed values of the (possibly new) attribute in scope
          std::vector<TypedValue> observed;
          if (dep_values) {
            observed = std::get<ValueList>(*dep_values).values;
          } else {
            for (const auto& id : scope) {
              const Entity* e = kb.entity(id);
              if (!e) continue;
              for (const auto& f : e->attributes)
                if (f.key == chosen_key) observed.push_back(f.value);
            }
          }
          if (observed.empty()) {
            out.failure = "no observed values for attribute " + chosen_key;
            return out;
          }
          const TypedValue& v = pick_uniform(observed, rng);
          std::string lit;
          switch (meta.slots[s]) {
            case SlotKind::StringLit: lit = v.string_value; break;
            case SlotKind::NumberLit: lit = format_decimal(v.number_value); break;
            case SlotKind::DateLit: lit = v.date_value.to_iso(); break;
            default:
              lit = std::to_string(v.kind == ValueKind::Date ? v.date_value.year
                                                             : v.year_value);
              break;
          }
          if (lit.empty()) {
            out.failure = "empty literal sampled for attribute " + chosen_key;
            return out;
          }
          substitute(static_cast<int>(i), static_cast<int>(s), lit);
          break;
        }
        case SlotKind::Operator:
        case SlotKind::SelectorAmong:
        case SlotKind::SelectorBetween:
        case SlotKind::DirectionLit:
          break;  // kept as-is
      }
    }

    std::vector<ExecResult> deps;
    for (int d : call.dependencies) deps.push_back(results[static_cast<size_t>(d)]);
    try {
      results.push_back(eval_call(kb, call.function, call.inputs, deps, nullptr));
    } catch (const ExecError& e) {
      out.failure = std::string("execution failed: ") + e.what();
      return out;
    }
  }

  if (out.substitutions.empty()) {
    out.failure = "no slot admitted a substitution";
    return out;
  }
  if (!opts.keep_empty_results) {
    const ExecResult& last = results.back();
    bool empty = false;
    if (const auto* es = std::get_if<EntitySet>(&last)) empty = es->ids.empty();
    if (const auto* vl = std::get_if<ValueList>(&last)) empty = vl->values.empty();
    if (const auto* nl = std::get_if<NameList>(&last)) empty = nl->names.empty();
    if (empty) out.failure = "empty result";
  }
  return out;
}

}  // namespace

MutationReport mutate_program(const Program& p, const KnowledgeBase& kb, size_t count,
                              uint64_t seed, const std::string& source_id,
                              const MutationOptions& opts) {
  if (!slots_clean(validate_slots(p, kb)))
    throw AugmentError("source program does not validate against the KB");

  MutationReport report;
  Rng rng(seed);
  std::set<std::string> seen{serialize_program(p)};
  for (size_t k = 0; k < count; ++k) {
    std::string last_failure = "no attempt made";
    bool produced = false;
    for (size_t attempt = 0; attempt < opts.max_attempts_per_sample; ++attempt) {
      MutationAttempt a = mutate_once(p, kb, rng, opts);
      if (!a.failure.empty()) {
        last_failure = a.failure;
        continue;
      }
      if (!seen.insert(serialize_program(a.program)).second) {
        last_failure = "duplicate of an earlier sample";
        continue;
      }
      AugmentedSample sample;
      sample.program = std::move(a.program);
      sample.source_id = source_id;
      sample.substitutions = std::move(a.substitutions);
      report.samples.push_back(std::move(sample));
      produced = true;
      break;
    }
    if (!produced)
      report.skipped.push_back("sample " + std::to_string(k) + ": " + last_failure);
  }
  return report;
}

const AcronymDict& default_acronym_dict() {
  static const AcronymDict dict = {{
      {"GEO", "Geostationary Orbit"},
      {"IGO", "Inclined Geosynchronous Orbit"},
      {"EGO", "Extended Geostationary Orbit"},
      {"NSO", "Navigation Satellites Orbit"},
      {"GTO", "GEO Transfer Orbit"},
      {"MEO", "Medium Earth Orbit"},
      {"GHO", "GEO-superGEO Crossing Orbits"},
      {"LEO", "Low Earth Orbit"},
      {"HAO", "High Altitude Earth Orbit"},
      {"MGO", "MEO-GEO Crossing Orbits"},
      {"HEO", "Highly Eccentric Earth Orbit"},
      {"LMO", "LEO-MEO Crossing Orbits"},
      {"UFO", "Undefined Orbit"},
      {"ESO", "Escape Orbits"},
  }};
  return dict;
}

AcronymDict load_acronym_dict(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AugmentError("cannot open acronym dictionary: " + path);
  json doc = json::parse(in);
  AcronymDict dict;
  for (auto& [k, v] : doc.items()) dict.entries.emplace_back(k, v.get<std::string>());
  return dict;
}

std::string PromptBundle::render() const {
  std::string out = header;
  for (const auto& [program, question] : shots)
    out += "Program: " + program + "\nQuestion: " + question + "\n\n";
  out += "Program: " + target_program_json + "\nQuestion:";
  return out;
}

PromptBundle build_prompt(const AugmentedSample& target,
                          const std::vector<std::pair<std::string, Program>>& manual_set,
                          size_t limit, const AcronymDict& dict) {
  if (manual_set.empty()) throw AugmentError("empty manual example set");

  PromptBundle bundle;
  bundle.header =
      "Here is a list of knowledge graph query programs in JSON format, each "
      "with its corresponding question in English.\n"
      "Acronyms are expanded with the following dictionary:\n[";
  for (size_t i = 0; i < dict.entries.size(); ++i) {
    if (i) bundle.header += ", ";
    bundle.header += "\"" + dict.entries[i].first + "\":\"" +
                     dict.entries[i].second + "\"";
  }
  bundle.header += "]\n";
  bundle.target_program_json = serialize_program(target.program);

  Sketch target_sketch = sketch_of(target.program);
  std::set<std::string> target_relations;
  for (const auto& call : target.program.calls)
    if (call.function == FunctionKind::Relate && !call.inputs.empty())
      target_relations.insert(call.inputs[0]);

  std::vector<size_t> eligible;
  std::set<size_t> taken;
  for (size_t i = 0; i < manual_set.size(); ++i)
    if (sketch_of(manual_set[i].second) == target_sketch) {
      eligible.push_back(i);
      taken.insert(i);
    }
  for (size_t i = 0; i < manual_set.size(); ++i) {
    if (taken.count(i)) continue;
    for (const auto& call : manual_set[i].second.calls)
      if (call.function == FunctionKind::Relate && !call.inputs.empty() &&
          target_relations.count(call.inputs[0])) {
        eligible.push_back(i);
        taken.insert(i);
        break;
      }
  }
  if (eligible.empty()) {
    // no shared sketch or relation: fall back to sketch-length-nearest pairs
    bundle.used_fallback_pairs = true;
    std::vector<size_t> order(manual_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      auto da = std::llabs(static_cast<long long>(manual_set[a].second.calls.size()) -
                           static_cast<long long>(target_sketch.size()));
      auto db = std::llabs(static_cast<long long>(manual_set[b].second.calls.size()) -
                           static_cast<long long>(target_sketch.size()));
      return da < db;
    });
    eligible = order;
  }

  for (size_t idx : eligible) {
    bundle.shots.emplace_back(serialize_program(manual_set[idx].second),
                              manual_set[idx].first);
    if (bundle.render().size() > limit) {
      bundle.shots.pop_back();
      break;
    }
  }
  if (bundle.shots.empty())
    throw AugmentError("prompt limit too small for a single example pair");
  return bundle;
}

std::string ReplayGenerator::generate(const PromptBundle&) {
  if (next_ >= responses_.size())
    throw AugmentError("replay generator exhausted after " +
                       std::to_string(responses_.size()) + " responses");
  return responses_[next_++];
}

std::vector<DatasetSample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AugmentError("cannot open dataset: " + path);
  std::vector<DatasetSample> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw AugmentError("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
    DatasetSample s;
    if (doc.contains("question") && !doc.at("question").is_null())
      s.question = doc.at("question").get<std::string>();
    s.program = parse_program(doc.at("program").dump());
    s.source = doc.value("source", "manual");
    out.push_back(std::move(s));
  }
  return out;
}

void save_dataset(const std::string& path, const std::vector<DatasetSample>& samples) {
  std::ofstream out(path);
  if (!out) throw AugmentError("cannot write dataset: " + path);
  for (const auto& s : samples) {
    ordered_json doc;
    if (s.question) doc["question"] = *s.question;
    else doc["question"] = nullptr;
    doc["program"] = json::parse(serialize_program(s.program));
    doc["source"] = s.source;
    doc["meta"] = json::object();
    out << doc.dump() << "\n";
  }
}

SplitResult split_dataset(const std::vector<DatasetSample>& manual,
                          const std::vector<DatasetSample>& augmented,
                          double val_fraction, uint64_t seed) {
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw AugmentError("val_fraction must be in [0, 1)");
  SplitResult out;
  out.validation = manual;

  std::vector<size_t> order(augmented.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i + 1 < order.size(); ++i) {
    std::uniform_int_distribution<size_t> dist(i, order.size() - 1);
    std::swap(order[i], order[dist(rng)]);
  }
  size_t val_count = static_cast<size_t>(
      std::llround(val_fraction * static_cast<double>(augmented.size())));

  std::set<std::string> val_programs;
  for (const auto& s : manual) val_programs.insert(serialize_program(s.program));
  for (size_t i = 0; i < val_count; ++i) {
    out.validation.push_back(augmented[order[i]]);
    val_programs.insert(serialize_program(augmented[order[i]].program));
  }
  for (size_t i = val_count; i < order.size(); ++i) {
    const DatasetSample& s = augmented[order[i]];
    if (!val_programs.count(serialize_program(s.program))) out.train.push_back(s);
  }
  return out;
}

}  // namespace koplqa
