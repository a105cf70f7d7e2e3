#include "koplqa/linker.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "json.hpp"

namespace koplqa {

using nlohmann::json;

TemplateStore load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LinkError("sketch", "cannot open template store: " + path);
  TemplateStore store;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw LinkError("sketch", "template line " + std::to_string(lineno) + ": " +
                                    e.what());
    }
    SketchTemplate t;
    t.question = doc.at("question").get<std::string>();
    t.program = parse_program(doc.at("program").dump());
    store.push_back(std::move(t));
  }
  return store;
}

SketchPrediction predict_sketch(const std::string& question,
                                const TemplateStore& templates) {
  if (templates.empty()) throw LinkError("sketch", "empty template store");
  TrigramProfile q = TrigramProfile::build(question);
  SketchPrediction best;
  best.similarity = -1.0;
  for (size_t i = 0; i < templates.size(); ++i) {
    double sim = trigram_cosine(q, TrigramProfile::build(templates[i].question));
    if (sim > best.similarity) {
      best.similarity = sim;
      best.template_index = i;
    }
  }
  best.sketch = sketch_of(templates[best.template_index].program);
  return best;
}

std::vector<CandidateScore> score_slot(const std::string& context,
                                       const std::vector<Candidate>& candidates,
                                       const ScoringProvider& scorer) {
  if (candidates.empty()) throw LinkError("link", "empty candidate list");
  std::vector<double> raw = scorer.score(context, candidates);
  std::vector<double> probs = softmax(raw);
  std::vector<CandidateScore> out(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i)
    out[i] = {candidates[i], raw[i], probs[i]};
  return out;
}

namespace {

struct LiteralMention {
  size_t begin = 0;
  size_t end = 0;
  bool is_time = false;
  bool is_date = false;
  CalendarDate date;
  int year = 0;
  double value = 0.0;
  char op = '=';
  bool used = false;
};

std::vector<LiteralMention> collect_literals(const std::string& question,
                                             const CueRules& rules) {
  std::vector<LiteralMention> lits;
  for (const auto& t : extract_times(question, rules)) {
    LiteralMention m;
    m.begin = t.begin;
    m.end = t.end;
    m.is_time = true;
    m.is_date = t.is_date;
    m.date = t.date;
    m.year = t.year;
    m.op = t.op;
    lits.push_back(m);
  }
  for (const auto& n : extract_numbers(question, rules)) {
    LiteralMention m;
    m.begin = n.begin;
    m.end = n.end;
    m.value = n.value;
    m.op = n.op;
    lits.push_back(m);
  }
  std::sort(lits.begin(), lits.end(),
            [](const LiteralMention& a, const LiteralMention& b) {
              return a.begin < b.begin;
            });
  return lits;
}

std::string context_without_used(const std::string& question,
                                 const std::vector<LiteralMention>& lits) {
  std::string out;
  size_t pos = 0;
  for (const auto& m : lits) {
    if (!m.used) continue;
    if (m.begin > pos) out += question.substr(pos, m.begin - pos);
    pos = std::max(pos, m.end);
  }
  if (pos < question.size()) out += question.substr(pos);
  return out;
}

// Distinct observed string values of `key`, for filling string literals.
std::vector<Candidate> string_value_pool(const KnowledgeBase& kb,
                                         const std::string& key) {
  std::set<std::string> values;
  for (const auto& [_, e] : kb.entities())
    for (const auto& f : e.attributes)
      if (f.key == key && f.value.kind == ValueKind::String)
        values.insert(f.value.string_value);
  std::vector<Candidate> out;
  for (const auto& v : values) out.push_back({v, v, CandidateKind::Attribute});
  return out;
}

}  // namespace

Program link_arguments(const std::string& question, const Sketch& sketch,
                       const KnowledgeBase& kb, const ScoringProvider& scorer,
                       std::vector<LinkDecision>* decisions, const CueRules& rules) {
  if (sketch.empty()) throw LinkError("link", "empty sketch");
  auto lits = collect_literals(question, rules);

  auto next_literal = [&](auto&& pred) -> LiteralMention* {
    for (auto& m : lits)
      if (!m.used && pred(m)) return &m;
    return nullptr;
  };

  auto pick = [&](const std::vector<Candidate>& pool, int call, int slot)
      -> Candidate {
    std::string context = context_without_used(question, lits);
    auto scored = score_slot(context, pool, scorer);
    size_t best = 0;
    for (size_t i = 1; i < scored.size(); ++i)
      if (scored[i].probability > scored[best].probability) best = i;
    double runner_up = 0.0;
    for (size_t i = 0; i < scored.size(); ++i)
      if (i != best) runner_up = std::max(runner_up, scored[i].probability);
    if (decisions)
      decisions->push_back({call, slot, scored[best].candidate,
                            scored[best].probability,
                            scored[best].probability - runner_up});
    return scored[best].candidate;
  };

  std::vector<std::vector<std::string>> args(sketch.size());
  for (size_t i = 0; i < sketch.size(); ++i) {
    const FunctionMeta& meta = function_meta(sketch[i]);
    char last_op = '=';
    std::string last_attribute;
    for (size_t s = 0; s < meta.slots.size(); ++s) {
      SlotKind slot = meta.slots[s];
      int ci = static_cast<int>(i);
      int si = static_cast<int>(s);
      switch (slot) {
        case SlotKind::EntityName:
          args[i].push_back(
              pick(kb.candidates_of_kind(CandidateKind::Entity), ci, si).label);
          break;
        case SlotKind::ConceptName:
          args[i].push_back(
              pick(kb.candidates_of_kind(CandidateKind::Concept), ci, si).label);
          break;
        case SlotKind::RelationName:
          args[i].push_back(
              pick(kb.candidates_of_kind(CandidateKind::Relation), ci, si).label);
          break;
        case SlotKind::AttributeKey: {
          Candidate c = pick(kb.candidates_of_kind(CandidateKind::Attribute), ci, si);
          last_attribute = c.label;
          args[i].push_back(c.label);
          break;
        }
        case SlotKind::Operator:
          args[i].push_back(std::string(1, last_op));
          break;
        case SlotKind::NumberLit: {
          LiteralMention* m =
              next_literal([](const LiteralMention& l) { return !l.is_time; });
          if (!m)
            throw LinkError("link", "missing number literal for call " +
                                        std::to_string(i));
          m->used = true;
          last_op = m->op;
          args[i].push_back(format_decimal(m->value));
          break;
        }
        case SlotKind::DateLit: {
          LiteralMention* m = next_literal(
              [](const LiteralMention& l) { return l.is_time && l.is_date; });
          if (!m)
            throw LinkError("link",
                            "missing date literal for call " + std::to_string(i));
          m->used = true;
          last_op = m->op;
          args[i].push_back(m->date.to_iso());
          break;
        }
        case SlotKind::YearLit: {
          LiteralMention* m = next_literal(
              [](const LiteralMention& l) { return l.is_time && !l.is_date; });
          if (!m)
            m = next_literal([](const LiteralMention& l) { return l.is_time; });
          if (!m)
            throw LinkError("link",
                            "missing year literal for call " + std::to_string(i));
          m->used = true;
          last_op = m->op;
          args[i].push_back(std::to_string(m->year));
          break;
        }
        case SlotKind::StringLit: {
          std::string key = last_attribute;
          if (key.empty()) {
            // Verify chains: the attribute lives on an earlier call
            for (size_t k = i; k-- > 0 && key.empty();) {
              const FunctionMeta& pm = function_meta(sketch[k]);
              for (size_t ps = 0; ps < pm.slots.size() && ps < args[k].size(); ++ps)
                if (pm.slots[ps] == SlotKind::AttributeKey) key = args[k][ps];
            }
          }
          auto pool = string_value_pool(kb, key);
          if (pool.empty())
            throw LinkError("link", "no observed string values for attribute " +
                                        key);
          args[i].push_back(pick(pool, ci, si).label);
          break;
        }
        case SlotKind::SelectorAmong: {
          std::vector<Candidate> pool = {
              {"largest", "largest", CandidateKind::Operator},
              {"smallest", "smallest", CandidateKind::Operator}};
          args[i].push_back(pick(pool, ci, si).label);
          break;
        }
        case SlotKind::SelectorBetween: {
          std::vector<Candidate> pool = {
              {"greater", "greater", CandidateKind::Operator},
              {"less", "less", CandidateKind::Operator}};
          args[i].push_back(pick(pool, ci, si).label);
          break;
        }
        case SlotKind::DirectionLit:
          break;  // optional; forward by default
      }
    }
  }

  try {
    return assign_dependencies(sketch, args);
  } catch (const ProgramError& e) {
    throw LinkError("link", e.what());
  }
}

NegativeBatch build_negative_batch(const std::set<std::string>& batch_entities,
                                   const std::set<std::string>& all_entities,
                                   size_t n, uint64_t seed) {
  NegativeBatch out;
  out.batch_entities.assign(batch_entities.begin(), batch_entities.end());

  std::vector<std::string> pool;
  for (const auto& id : all_entities)
    if (!batch_entities.count(id)) pool.push_back(id);

  size_t k = std::min(n, pool.size());
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<size_t> dist(i, pool.size() - 1);
    std::swap(pool[i], pool[dist(rng)]);
    out.extras.push_back(pool[i]);
  }

  out.merged = out.batch_entities;
  out.merged.insert(out.merged.end(), out.extras.begin(), out.extras.end());
  std::sort(out.merged.begin(), out.merged.end());
  out.merged.erase(std::unique(out.merged.begin(), out.merged.end()),
                   out.merged.end());
  return out;
}

PipelineResult answer_question(const std::string& question, const KnowledgeBase& kb,
                               const TemplateStore& templates,
                               const ScoringProvider& scorer, const CueRules& rules) {
  PipelineResult r;
  r.sketch = predict_sketch(question, templates);
  r.program = link_arguments(question, r.sketch.sketch, kb, scorer, &r.decisions, rules);
  try {
    r.answer = execute_program(kb, r.program);
  } catch (const ExecError& e) {
    throw LinkError("execute", e.what());
  }
  return r;
}

}  // namespace koplqa
