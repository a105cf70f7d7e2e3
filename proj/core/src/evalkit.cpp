#include "koplqa/evalkit.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace koplqa {

using nlohmann::ordered_json;

const char* component_name(Component c) {
  switch (c) {
    case Component::Function: return "function";
    case Component::Entity: return "entity";
    case Component::Attribute: return "attribute";
    case Component::Relation: return "relation";
    case Component::Concept: return "concept";
    case Component::Operation: return "operation";
  }
  return "function";
}

namespace {

std::optional<Component> slot_component(SlotKind kind) {
  switch (kind) {
    case SlotKind::EntityName: return Component::Entity;
    case SlotKind::ConceptName: return Component::Concept;
    case SlotKind::RelationName: return Component::Relation;
    case SlotKind::AttributeKey: return Component::Attribute;
    case SlotKind::Operator: return Component::Operation;
    default: return std::nullopt;  // literal slots count only toward overall
  }
}

}  // namespace

MatchRecord compare_programs(const Program& pred, const Program& gold) {
  MatchRecord rec;
  rec.sketch_match = sketch_of(pred) == sketch_of(gold);
  for (size_t i = 0; i < gold.calls.size(); ++i) {
    const FunctionCall& gcall = gold.calls[i];
    const FunctionMeta& meta = function_meta(gcall.function);
    for (size_t s = 0; s < gcall.inputs.size(); ++s) {
      auto comp = slot_component(meta.slots[s]);
      if (!comp) continue;
      auto& tally = rec.slots[*comp];
      ++tally.total;
      if (rec.sketch_match && s < pred.calls[i].inputs.size() &&
          pred.calls[i].inputs[s] == gcall.inputs[s])
        ++tally.matched;
    }
  }
  bool all_inputs = rec.sketch_match && pred.calls.size() == gold.calls.size();
  if (all_inputs)
    for (size_t i = 0; i < gold.calls.size(); ++i)
      if (pred.calls[i].inputs != gold.calls[i].inputs) all_inputs = false;
  rec.overall = all_inputs;
  return rec;
}

EvalReport evaluate(const std::vector<Program>& preds,
                    const std::vector<Program>& golds) {
  if (preds.size() != golds.size())
    throw EvalError("prediction/gold length mismatch: " + std::to_string(preds.size()) +
                    " vs " + std::to_string(golds.size()));
  if (golds.empty()) throw EvalError("empty dataset");

  EvalReport report;
  report.sample_count = golds.size();
  size_t sketch_hits = 0, overall_hits = 0;
  std::map<Component, MatchRecord::SlotTally> totals;
  for (size_t i = 0; i < golds.size(); ++i) {
    MatchRecord rec = compare_programs(preds[i], golds[i]);
    sketch_hits += rec.sketch_match;
    overall_hits += rec.overall;
    for (const auto& [comp, tally] : rec.slots) {
      totals[comp].total += tally.total;
      totals[comp].matched += tally.matched;
    }
    report.per_sample.push_back(std::move(rec));
  }

  report.accuracy[Component::Function] =
      static_cast<double>(sketch_hits) / static_cast<double>(golds.size());
  report.denominators[Component::Function] = golds.size();
  for (Component c : {Component::Entity, Component::Attribute, Component::Relation,
                      Component::Concept, Component::Operation}) {
    auto it = totals.find(c);
    size_t denom = it == totals.end() ? 0 : it->second.total;
    report.denominators[c] = denom;
    report.accuracy[c] =
        denom == 0 ? 1.0
                   : static_cast<double>(it->second.matched) / static_cast<double>(denom);
  }
  report.overall_accuracy =
      static_cast<double>(overall_hits) / static_cast<double>(golds.size());
  return report;
}

std::string EvalReport::to_json() const {
  ordered_json doc;
  for (Component c : kAllComponents) {
    ordered_json entry;
    entry["accuracy"] = accuracy.at(c);
    entry["denominator"] = denominators.at(c);
    doc["components"][component_name(c)] = entry;
  }
  doc["overall"]["accuracy"] = overall_accuracy;
  doc["overall"]["denominator"] = sample_count;
  return doc.dump(2);
}

std::string EvalReport::render_table() const {
  std::ostringstream out;
  out << std::left << std::setw(12) << "Accuracy" << std::right << std::setw(8)
      << "Value" << std::setw(8) << "N" << "\n";
  for (Component c : kAllComponents) {
    out << std::left << std::setw(12) << component_name(c) << std::right
        << std::setw(8) << std::fixed << std::setprecision(3) << accuracy.at(c)
        << std::setw(8) << denominators.at(c) << "\n";
  }
  out << std::left << std::setw(12) << "overall" << std::right << std::setw(8)
      << std::fixed << std::setprecision(3) << overall_accuracy << std::setw(8)
      << sample_count << "\n";
  return out.str();
}

}  // namespace koplqa
