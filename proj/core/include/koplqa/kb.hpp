#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "koplqa/value.hpp"

namespace koplqa {

struct KbError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Concept {
  std::string id;
  std::string name;
  std::vector<std::string> subclass_of;
};

struct AttributeFact {
  std::string key;
  TypedValue value;
  bool operator==(const AttributeFact&) const = default;
};

enum class Direction { Forward, Backward };

const char* direction_name(Direction d);

struct RelationFact {
  std::string predicate;
  std::string object;  // entity id
  Direction direction = Direction::Forward;
  bool operator==(const RelationFact&) const = default;
};

struct Entity {
  std::string id;
  std::string name;
  std::vector<std::string> aliases;
  std::vector<std::string> instance_of;  // concept ids
  std::vector<AttributeFact> attributes;
  std::vector<RelationFact> relations;
};

struct KbStats {
  size_t entities = 0;
  size_t relations = 0;
  size_t concepts = 0;
  size_t attribute_keys = 0;
  size_t attribute_facts = 0;
  size_t relation_facts = 0;
};

enum class CandidateKind { Entity, Relation, Concept, Attribute, Operator };

const char* candidate_kind_name(CandidateKind k);

struct Candidate {
  std::string id;     // entity/concept id; for the other kinds, the label itself
  std::string label;  // surface form used for matching and program inputs
  CandidateKind kind = CandidateKind::Entity;
  bool operator==(const Candidate&) const = default;
};

struct KbOptions {
  // Concept membership through the subclass-of transitive closure.
  bool transitive_subsumption = true;
};

// Immutable after load; all indexes are built during load, so concurrent
// readers need no synchronization.
class KnowledgeBase {
 public:
  using Options = KbOptions;

  static KnowledgeBase load_file(const std::string& path, Options opts = {});
  static KnowledgeBase load_json_text(const std::string& text, Options opts = {});

  std::string serialize() const;  // canonical KB JSON, load(serialize()) == *this
  void save_file(const std::string& path) const;

  const std::map<std::string, Concept>& concepts() const { return concepts_; }
  const std::map<std::string, Entity>& entities() const { return entities_; }
  const std::set<std::string>& relation_names() const { return relation_names_; }
  const std::map<std::string, ValueKind>& attribute_kinds() const { return attribute_kinds_; }

  KbStats stats() const;

  const Entity* entity(const std::string& id) const;
  const Concept* concept_by_id(const std::string& id) const;
  const Concept* concept_by_name(const std::string& name) const;

  // Exact name/alias matches first; case-insensitive tier only when the
  // exact tier is empty. Ids in sorted order.
  std::vector<std::string> lookup_by_name(const std::string& name) const;

  // Membership with subsumption (per Options); concept given by id.
  bool is_member(const std::string& entity_id, const std::string& concept_id) const;
  std::vector<std::string> members_of(const std::string& concept_id) const;

  std::vector<Candidate> candidates_of_kind(CandidateKind kind) const;

  bool has_attribute_key(const std::string& key) const;
  bool has_relation(const std::string& name) const;

  bool deep_equals(const KnowledgeBase& o) const;

 private:
  void build_indexes();
  void validate() const;

  Options opts_;
  std::map<std::string, Concept> concepts_;
  std::map<std::string, Entity> entities_;
  std::set<std::string> relation_names_;
  std::map<std::string, ValueKind> attribute_kinds_;

  std::unordered_map<std::string, std::vector<std::string>> name_index_;
  std::unordered_map<std::string, std::vector<std::string>> lower_name_index_;
  std::unordered_map<std::string, std::string> concept_name_index_;
  // concept id -> all ancestor concept ids (including itself)
  std::unordered_map<std::string, std::unordered_set<std::string>> ancestors_;
  std::unordered_map<std::string, std::vector<std::string>> direct_members_;
};

std::string to_lower(const std::string& s);

}  // namespace koplqa
