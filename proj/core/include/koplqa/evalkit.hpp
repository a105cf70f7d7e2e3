#pragma once

#include <array>
#include <map>

#include "koplqa/program.hpp"

namespace koplqa {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Component { Function, Entity, Attribute, Relation, Concept, Operation };

constexpr std::array<Component, 6> kAllComponents = {
    Component::Function, Component::Entity,  Component::Attribute,
    Component::Relation, Component::Concept, Component::Operation};

const char* component_name(Component c);

// Per-sample match record. Argument slots are aligned by (call index, slot
// index) when the sketches match; otherwise all gold argument slots miss.
struct MatchRecord {
  bool sketch_match = false;
  bool overall = false;
  struct SlotTally {
    size_t total = 0;
    size_t matched = 0;
  };
  std::map<Component, SlotTally> slots;  // Entity/Attribute/Relation/Concept/Operation
};

MatchRecord compare_programs(const Program& pred, const Program& gold);

struct EvalReport {
  std::map<Component, double> accuracy;
  std::map<Component, size_t> denominators;
  double overall_accuracy = 0.0;
  size_t sample_count = 0;
  std::vector<MatchRecord> per_sample;

  std::string to_json() const;
  std::string render_table() const;
};

// Micro-averaged: sample-level for functions and overall, slot-level for the
// argument components.
EvalReport evaluate(const std::vector<Program>& preds, const std::vector<Program>& golds);

}  // namespace koplqa
