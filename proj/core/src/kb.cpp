#include "koplqa/kb.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace koplqa {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

const char* direction_name(Direction d) {
  return d == Direction::Forward ? "forward" : "backward";
}

const char* candidate_kind_name(CandidateKind k) {
  switch (k) {
    case CandidateKind::Entity: return "entity";
    case CandidateKind::Relation: return "relation";
    case CandidateKind::Concept: return "concept";
    case CandidateKind::Attribute: return "attribute";
    case CandidateKind::Operator: return "operator";
  }
  return "entity";
}

namespace {

TypedValue parse_value(const json& jv, const std::string& where) {
  if (!jv.is_object() || !jv.contains("type"))
    throw KbError(where + ": attribute value must be an object with a type");
  auto kind = value_kind_from_name(jv.at("type").get<std::string>());
  if (!kind) throw KbError(where + ": unknown value type " + jv.at("type").dump());
  const json& raw = jv.at("value");
  switch (*kind) {
    case ValueKind::String:
      if (!raw.is_string()) throw KbError(where + ": string value expected");
      return TypedValue::str(raw.get<std::string>());
    case ValueKind::Quantity: {
      if (!raw.is_number()) throw KbError(where + ": numeric value expected");
      std::string unit = jv.value("unit", std::string{});
      return TypedValue::quantity(raw.get<double>(), unit);
    }
    case ValueKind::Date: {
      if (!raw.is_string()) throw KbError(where + ": date string expected");
      auto d = CalendarDate::parse(raw.get<std::string>());
      if (!d) throw KbError(where + ": invalid date " + raw.dump());
      return TypedValue::date(*d);
    }
    case ValueKind::Year:
      if (!raw.is_number_integer()) throw KbError(where + ": integer year expected");
      return TypedValue::year(raw.get<int64_t>());
  }
  throw KbError(where + ": unreachable value kind");
}

ordered_json value_to_json(const TypedValue& v) {
  ordered_json out;
  out["type"] = value_kind_name(v.kind);
  switch (v.kind) {
    case ValueKind::String: out["value"] = v.string_value; break;
    case ValueKind::Quantity:
      out["value"] = v.number_value;
      if (!v.unit.empty()) out["unit"] = v.unit;
      break;
    case ValueKind::Date: out["value"] = v.date_value.to_iso(); break;
    case ValueKind::Year: out["value"] = v.year_value; break;
  }
  return out;
}

}  // namespace

KnowledgeBase KnowledgeBase::load_file(const std::string& path, Options opts) {
  std::ifstream in(path);
  if (!in) throw KbError("cannot open KB file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_json_text(ss.str(), opts);
}

KnowledgeBase KnowledgeBase::load_json_text(const std::string& text, Options opts) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw KbError(std::string("KB parse error: ") + e.what());
  }
  if (!doc.is_object()) throw KbError("KB document must be a JSON object");

  KnowledgeBase kb;
  kb.opts_ = opts;

  for (const json& jc : doc.value("concepts", json::array())) {
    Concept c;
    c.id = jc.at("id").get<std::string>();
    c.name = jc.at("name").get<std::string>();
    if (c.name.empty()) throw KbError("concept " + c.id + ": empty name");
    for (const json& s : jc.value("subclassOf", json::array()))
      c.subclass_of.push_back(s.get<std::string>());
    for (const auto& s : c.subclass_of)
      if (s == c.id) throw KbError("concept " + c.id + ": subclassOf self-loop");
    if (!kb.concepts_.emplace(c.id, c).second)
      throw KbError("duplicate concept id: " + c.id);
  }

  for (const json& je : doc.value("entities", json::array())) {
    Entity e;
    e.id = je.at("id").get<std::string>();
    e.name = je.at("name").get<std::string>();
    if (e.name.empty()) throw KbError("entity " + e.id + ": empty name");
    for (const json& a : je.value("aliases", json::array()))
      e.aliases.push_back(a.get<std::string>());
    for (const json& c : je.value("instanceOf", json::array()))
      e.instance_of.push_back(c.get<std::string>());
    for (const json& ja : je.value("attributes", json::array())) {
      AttributeFact f;
      f.key = ja.at("key").get<std::string>();
      f.value = parse_value(ja.at("value"), "entity " + e.id + " attribute " + f.key);
      e.attributes.push_back(std::move(f));
    }
    for (const json& jr : je.value("relations", json::array())) {
      RelationFact f;
      f.predicate = jr.at("predicate").get<std::string>();
      f.object = jr.at("object").get<std::string>();
      std::string dir = jr.value("direction", "forward");
      if (dir == "forward") f.direction = Direction::Forward;
      else if (dir == "backward") f.direction = Direction::Backward;
      else throw KbError("entity " + e.id + ": bad relation direction " + dir);
      e.relations.push_back(std::move(f));
    }
    if (!kb.entities_.emplace(e.id, e).second)
      throw KbError("duplicate entity id: " + e.id);
  }

  kb.validate();
  kb.build_indexes();
  return kb;
}

void KnowledgeBase::validate() const {
  // Subclass edges resolve and the subclass graph is acyclic.
  for (const auto& [id, c] : concepts_) {
    for (const auto& parent : c.subclass_of)
      if (!concepts_.count(parent))
        throw KbError("concept " + id + ": dangling subclassOf target " + parent);
  }
  {
    // 0 = unvisited, 1 = on stack, 2 = done
    std::unordered_map<std::string, int> state;
    std::vector<std::pair<std::string, size_t>> stack;
    for (const auto& [root, _] : concepts_) {
      if (state[root]) continue;
      stack.push_back({root, 0});
      state[root] = 1;
      while (!stack.empty()) {
        auto& [id, next] = stack.back();
        const auto& parents = concepts_.at(id).subclass_of;
        if (next < parents.size()) {
          const std::string& p = parents[next++];
          if (state[p] == 1) throw KbError("subclass cycle through concept " + p);
          if (state[p] == 0) {
            state[p] = 1;
            stack.push_back({p, 0});
          }
        } else {
          state[id] = 2;
          stack.pop_back();
        }
      }
    }
  }

  std::map<std::string, std::pair<ValueKind, std::string>> key_kinds;
  for (const auto& [id, e] : entities_) {
    for (const auto& c : e.instance_of)
      if (!concepts_.count(c))
        throw KbError("entity " + id + ": dangling instanceOf target " + c);
    for (const auto& r : e.relations)
      if (!entities_.count(r.object))
        throw KbError("entity " + id + ": dangling relation object " + r.object);
    for (const auto& a : e.attributes) {
      auto [it, inserted] = key_kinds.emplace(a.key, std::make_pair(a.value.kind, id));
      if (!inserted && it->second.first != a.value.kind)
        throw KbError("attribute key " + a.key + " has kind " +
                      value_kind_name(a.value.kind) + " on entity " + id +
                      " but kind " + value_kind_name(it->second.first) +
                      " on entity " + it->second.second);
    }
  }

  // Label disjointness across the linker's non-entity candidate pools.
  std::set<std::string> concept_names, rel_names, attr_keys;
  for (const auto& [_, c] : concepts_) concept_names.insert(c.name);
  for (const auto& [_, e] : entities_) {
    for (const auto& r : e.relations) rel_names.insert(r.predicate);
    for (const auto& a : e.attributes) attr_keys.insert(a.key);
  }
  for (const auto& n : rel_names) {
    if (concept_names.count(n))
      throw KbError("label collision between relation and concept: " + n);
    if (attr_keys.count(n))
      throw KbError("label collision between relation and attribute: " + n);
  }
  for (const auto& n : attr_keys)
    if (concept_names.count(n))
      throw KbError("label collision between attribute and concept: " + n);
}

void KnowledgeBase::build_indexes() {
  for (const auto& [id, c] : concepts_) concept_name_index_.emplace(c.name, id);

  for (const auto& [id, c] : concepts_) {
    auto& anc = ancestors_[id];
    std::vector<std::string> work = {id};
    while (!work.empty()) {
      std::string cur = work.back();
      work.pop_back();
      if (!anc.insert(cur).second) continue;
      for (const auto& p : concepts_.at(cur).subclass_of) work.push_back(p);
    }
  }

  for (const auto& [id, e] : entities_) {
    name_index_[e.name].push_back(id);
    lower_name_index_[to_lower(e.name)].push_back(id);
    for (const auto& a : e.aliases) {
      name_index_[a].push_back(id);
      lower_name_index_[to_lower(a)].push_back(id);
    }
    for (const auto& c : e.instance_of) direct_members_[c].push_back(id);
    for (const auto& r : e.relations) relation_names_.insert(r.predicate);
    for (const auto& a : e.attributes) attribute_kinds_.emplace(a.key, a.value.kind);
  }
  auto dedup = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (auto& [_, v] : name_index_) dedup(v);
  for (auto& [_, v] : lower_name_index_) dedup(v);
  for (auto& [_, v] : direct_members_) dedup(v);
}

std::string KnowledgeBase::serialize() const {
  ordered_json doc;
  doc["concepts"] = ordered_json::array();
  for (const auto& [_, c] : concepts_) {
    ordered_json jc;
    jc["id"] = c.id;
    jc["name"] = c.name;
    jc["subclassOf"] = c.subclass_of;
    doc["concepts"].push_back(std::move(jc));
  }
  doc["entities"] = ordered_json::array();
  for (const auto& [_, e] : entities_) {
    ordered_json je;
    je["id"] = e.id;
    je["name"] = e.name;
    je["aliases"] = e.aliases;
    je["instanceOf"] = e.instance_of;
    je["attributes"] = ordered_json::array();
    for (const auto& a : e.attributes) {
      ordered_json ja;
      ja["key"] = a.key;
      ja["value"] = value_to_json(a.value);
      je["attributes"].push_back(std::move(ja));
    }
    je["relations"] = ordered_json::array();
    for (const auto& r : e.relations) {
      ordered_json jr;
      jr["predicate"] = r.predicate;
      jr["object"] = r.object;
      jr["direction"] = direction_name(r.direction);
      je["relations"].push_back(std::move(jr));
    }
    doc["entities"].push_back(std::move(je));
  }
  return doc.dump(2);
}

void KnowledgeBase::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw KbError("cannot write KB file: " + path);
  out << serialize() << "\n";
}

KbStats KnowledgeBase::stats() const {
  KbStats s;
  s.entities = entities_.size();
  s.relations = relation_names_.size();
  s.concepts = concepts_.size();
  s.attribute_keys = attribute_kinds_.size();
  for (const auto& [_, e] : entities_) {
    s.attribute_facts += e.attributes.size();
    s.relation_facts += e.relations.size();
  }
  return s;
}

const Entity* KnowledgeBase::entity(const std::string& id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

const Concept* KnowledgeBase::concept_by_id(const std::string& id) const {
  auto it = concepts_.find(id);
  return it == concepts_.end() ? nullptr : &it->second;
}

const Concept* KnowledgeBase::concept_by_name(const std::string& name) const {
  auto it = concept_name_index_.find(name);
  return it == concept_name_index_.end() ? nullptr : &concepts_.at(it->second);
}

std::vector<std::string> KnowledgeBase::lookup_by_name(const std::string& name) const {
  if (name.empty()) return {};
  if (auto it = name_index_.find(name); it != name_index_.end()) return it->second;
  if (auto it = lower_name_index_.find(to_lower(name)); it != lower_name_index_.end())
    return it->second;
  return {};
}

bool KnowledgeBase::is_member(const std::string& entity_id,
                              const std::string& concept_id) const {
  const Entity* e = entity(entity_id);
  if (!e) return false;
  for (const auto& c : e->instance_of) {
    if (c == concept_id) return true;
    if (opts_.transitive_subsumption) {
      auto it = ancestors_.find(c);
      if (it != ancestors_.end() && it->second.count(concept_id)) return true;
    }
  }
  return false;
}

std::vector<std::string> KnowledgeBase::members_of(const std::string& concept_id) const {
  std::vector<std::string> out;
  if (!opts_.transitive_subsumption) {
    auto it = direct_members_.find(concept_id);
    return it == direct_members_.end() ? out : it->second;
  }
  for (const auto& [cid, anc] : ancestors_) {
    if (!anc.count(concept_id)) continue;
    auto it = direct_members_.find(cid);
    if (it == direct_members_.end()) continue;
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Candidate> KnowledgeBase::candidates_of_kind(CandidateKind kind) const {
  std::vector<Candidate> out;
  switch (kind) {
    case CandidateKind::Entity:
      for (const auto& [id, e] : entities_) out.push_back({id, e.name, kind});
      break;
    case CandidateKind::Relation:
      for (const auto& r : relation_names_) out.push_back({r, r, kind});
      break;
    case CandidateKind::Concept:
      for (const auto& [id, c] : concepts_) out.push_back({id, c.name, kind});
      break;
    case CandidateKind::Attribute:
      for (const auto& [k, _] : attribute_kinds_) out.push_back({k, k, kind});
      break;
    case CandidateKind::Operator:
      out = {{"<", "<", kind}, {">", ">", kind}, {"=", "=", kind}};
      break;
  }
  return out;
}

bool KnowledgeBase::has_attribute_key(const std::string& key) const {
  return attribute_kinds_.count(key) > 0;
}

bool KnowledgeBase::has_relation(const std::string& name) const {
  return relation_names_.count(name) > 0;
}

bool KnowledgeBase::deep_equals(const KnowledgeBase& o) const {
  if (concepts_.size() != o.concepts_.size() || entities_.size() != o.entities_.size())
    return false;
  for (const auto& [id, c] : concepts_) {
    auto it = o.concepts_.find(id);
    if (it == o.concepts_.end() || it->second.name != c.name ||
        it->second.subclass_of != c.subclass_of)
      return false;
  }
  for (const auto& [id, e] : entities_) {
    auto it = o.entities_.find(id);
    if (it == o.entities_.end()) return false;
    const Entity& f = it->second;
    if (f.name != e.name || f.aliases != e.aliases || f.instance_of != e.instance_of ||
        f.attributes != e.attributes || f.relations != e.relations)
      return false;
  }
  return true;
}

}  // namespace koplqa
