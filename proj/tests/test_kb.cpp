#include "doctest.h"
#include "koplqa/kb.hpp"
#include "support/fixtures.hpp"

using namespace koplqa;

TEST_CASE("fixture KB loads with expected counts") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  KbStats s = kb.stats();
  CHECK(s.entities == 32);
  CHECK(s.relations == 4);
  CHECK(s.concepts == 11);
  CHECK(s.attribute_keys == 9);
  CHECK(s.attribute_facts > 0);
  CHECK(s.relation_facts > 0);
}

TEST_CASE("name lookup tiers") {
  const KnowledgeBase& kb = testsup::fixture_kb();

  SUBCASE("exact name") {
    auto ids = kb.lookup_by_name("Hubble");
    REQUIRE(ids.size() == 1);
    CHECK(ids[0] == "e-hubble");
  }
  SUBCASE("alias") {
    CHECK(kb.lookup_by_name("HST") == std::vector<std::string>{"e-hubble"});
    CHECK(kb.lookup_by_name("Hubble Space Telescope") ==
          std::vector<std::string>{"e-hubble"});
  }
  SUBCASE("case-insensitive tier only when the exact tier is empty") {
    CHECK(kb.lookup_by_name("hubble") == std::vector<std::string>{"e-hubble"});
    CHECK(kb.lookup_by_name("SATURN V") == std::vector<std::string>{"e-lv-1"});
  }
  SUBCASE("miss") {
    CHECK(kb.lookup_by_name("Voyager").empty());
    CHECK(kb.lookup_by_name("").empty());
  }
}

TEST_CASE("membership honors transitive subsumption") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  // Russia is a Country, Country subclassOf Entity
  CHECK(kb.is_member("e-russia", "c-country"));
  CHECK(kb.is_member("e-russia", "c-org"));
  CHECK_FALSE(kb.is_member("e-russia", "c-orbit"));
  CHECK(kb.is_member("e-hubble", "c-space-object"));

  auto members = kb.members_of("c-orbit");
  CHECK(members == std::vector<std::string>{"e-hst-orbit", "e-leo-a", "e-lmo-a",
                                            "e-lmo-b"});
}

TEST_CASE("subsumption can be switched off") {
  KnowledgeBase::Options opts;
  opts.transitive_subsumption = false;
  auto kb = KnowledgeBase::load_file(testsup::fixture_path("mini_space.json"), opts);
  CHECK(kb.is_member("e-russia", "c-country"));
  CHECK_FALSE(kb.is_member("e-russia", "c-org"));
  CHECK(kb.members_of("c-orbit").empty());
}

TEST_CASE("serialize / reload round trip") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  std::string text = kb.serialize();
  KnowledgeBase back = KnowledgeBase::load_json_text(text);
  CHECK(kb.deep_equals(back));
  CHECK(back.serialize() == text);
}

TEST_CASE("candidate pools") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  CHECK(kb.candidates_of_kind(CandidateKind::Entity).size() == 32);
  CHECK(kb.candidates_of_kind(CandidateKind::Concept).size() == 11);
  CHECK(kb.candidates_of_kind(CandidateKind::Relation).size() == 4);
  CHECK(kb.candidates_of_kind(CandidateKind::Attribute).size() == 9);
  auto ops = kb.candidates_of_kind(CandidateKind::Operator);
  REQUIRE(ops.size() == 3);
  CHECK(ops[0].label == "<");
  CHECK(ops[1].label == ">");
  CHECK(ops[2].label == "=");
}

TEST_CASE("load rejects malformed KBs") {
  SUBCASE("subclass cycle") {
    std::string text = R"({"concepts": [
      {"id": "a", "name": "A", "subclassOf": ["b"]},
      {"id": "b", "name": "B", "subclassOf": ["a"]}], "entities": []})";
    CHECK_THROWS_AS(KnowledgeBase::load_json_text(text), KbError);
  }
  SUBCASE("dangling subclassOf") {
    std::string text =
        R"({"concepts": [{"id": "a", "name": "A", "subclassOf": ["missing"]}],
            "entities": []})";
    CHECK_THROWS_AS(KnowledgeBase::load_json_text(text), KbError);
  }
  SUBCASE("dangling instanceOf") {
    std::string text = R"({"concepts": [], "entities": [
      {"id": "e1", "name": "E", "instanceOf": ["missing"]}]})";
    CHECK_THROWS_AS(KnowledgeBase::load_json_text(text), KbError);
  }
  SUBCASE("dangling relation object") {
    std::string text = R"({"concepts": [], "entities": [
      {"id": "e1", "name": "E",
       "relations": [{"predicate": "p", "object": "missing"}]}]})";
    CHECK_THROWS_AS(KnowledgeBase::load_json_text(text), KbError);
  }
  SUBCASE("attribute kind conflict across entities") {
    std::string text = R"({"concepts": [], "entities": [
      {"id": "e1", "name": "A",
       "attributes": [{"key": "k", "value": {"type": "year", "value": 2000}}]},
      {"id": "e2", "name": "B",
       "attributes": [{"key": "k", "value": {"type": "string", "value": "x"}}]}]})";
    CHECK_THROWS_AS(KnowledgeBase::load_json_text(text), KbError);
  }
  SUBCASE("label collision between relation and concept") {
    std::string text = R"({"concepts": [{"id": "c1", "name": "orbit"}],
      "entities": [
      {"id": "e1", "name": "A", "instanceOf": ["c1"],
       "relations": [{"predicate": "orbit", "object": "e1"}]}]})";
    CHECK_THROWS_AS(KnowledgeBase::load_json_text(text), KbError);
  }
  SUBCASE("duplicate entity id") {
    std::string text = R"({"concepts": [], "entities": [
      {"id": "e1", "name": "A"}, {"id": "e1", "name": "B"}]})";
    CHECK_THROWS_AS(KnowledgeBase::load_json_text(text), KbError);
  }
  SUBCASE("not json") {
    CHECK_THROWS_AS(KnowledgeBase::load_json_text("nope"), KbError);
  }
}
