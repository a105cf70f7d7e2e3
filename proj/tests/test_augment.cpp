#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "koplqa/augment.hpp"
#include "support/fixtures.hpp"

using namespace koplqa;

namespace {

std::vector<DatasetSample> manual_set() {
  return load_dataset(testsup::fixture_path("manual.jsonl"));
}

std::vector<std::pair<std::string, Program>> manual_pairs() {
  std::vector<std::pair<std::string, Program>> out;
  for (const auto& s : manual_set())
    if (s.question) out.emplace_back(*s.question, s.program);
  return out;
}

}  // namespace

TEST_CASE("manual dataset loads") {
  auto ds = manual_set();
  CHECK(ds.size() == 13);
  for (const auto& s : ds) {
    CHECK(s.question.has_value());
    CHECK(s.source == "manual");
  }
}

TEST_CASE("mutation preserves sketches and stays executable") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  for (const auto& sample : manual_set()) {
    CAPTURE(serialize_program(sample.program));
    std::string original = serialize_program(sample.program);
    MutationReport rep = mutate_program(sample.program, kb, 5, 99, "src");
    // the source program is never modified
    CHECK(serialize_program(sample.program) == original);
    std::set<std::string> seen{original};
    for (const auto& aug : rep.samples) {
      CHECK(sketch_of(aug.program) == sketch_of(sample.program));
      CHECK(aug.substitutions.size() >= 1);
      CHECK(aug.source_id == "src");
      CHECK(aug.temperature == doctest::Approx(0.75));
      CHECK_FALSE(aug.question.has_value());
      CHECK(slots_clean(validate_slots(aug.program, kb)));
      CHECK_NOTHROW(execute_program(kb, aug.program));
      CHECK(seen.insert(serialize_program(aug.program)).second);  // dedup
    }
    CHECK(rep.samples.size() + rep.skipped.size() >= 5);
  }
}

TEST_CASE("mutation is seed-reproducible") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  Program p = manual_set()[0].program;
  MutationReport a = mutate_program(p, kb, 5, 1234);
  MutationReport b = mutate_program(p, kb, 5, 1234);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i)
    CHECK(serialize_program(a.samples[i].program) ==
          serialize_program(b.samples[i].program));
}

TEST_CASE("mutation rejects programs that do not validate") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  Program bad = parse_program(
      R"([{"function":"Find","inputs":["Voyager"],"dependencies":[]},
          {"function":"What","inputs":[],"dependencies":[0]}])");
  CHECK_THROWS_AS(mutate_program(bad, kb, 3, 1), AugmentError);
}

TEST_CASE("acronym dictionary") {
  const AcronymDict& d = default_acronym_dict();
  CHECK(d.entries.size() == 14);
  CHECK(d.entries.front().first == "GEO");
  CHECK(d.entries.front().second == "Geostationary Orbit");

  AcronymDict loaded = load_acronym_dict(testsup::fixture_path("config/acronyms.json"));
  CHECK(loaded.entries.size() == 14);
  std::map<std::string, std::string> want(d.entries.begin(), d.entries.end());
  std::map<std::string, std::string> got(loaded.entries.begin(), loaded.entries.end());
  CHECK(want == got);
}

TEST_CASE("prompt construction") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  auto pairs = manual_pairs();

  AugmentedSample target;
  target.program = manual_set()[5].program;  // Find + QueryAttr

  SUBCASE("header, shots and trailing cue") {
    PromptBundle b = build_prompt(target, pairs, 8000);
    std::string text = b.render();
    CHECK(text.find("\"GEO\":\"Geostationary Orbit\"") != std::string::npos);
    CHECK(text.find("\"LMO\":\"LEO-MEO Crossing Orbits\"") != std::string::npos);
    CHECK(text.rfind("Question:") == text.size() - 9);
    CHECK_FALSE(b.used_fallback_pairs);
    REQUIRE(b.shots.size() >= 2);
    // same-sketch pairs come first
    Program first = parse_program(b.shots[0].first);
    CHECK(sketch_of(first) == sketch_of(target.program));
  }
  SUBCASE("size limit trims shots") {
    PromptBundle big = build_prompt(target, pairs, 8000);
    REQUIRE(big.shots.size() >= 2);
    PromptBundle small = build_prompt(target, pairs, big.render().size() - 1);
    CHECK(small.shots.size() < big.shots.size());
  }
  SUBCASE("impossible limit throws") {
    CHECK_THROWS_AS(build_prompt(target, pairs, 10), AugmentError);
  }
  SUBCASE("fallback pairs flagged when nothing shares sketch or relation") {
    AugmentedSample odd;
    odd.program = parse_program(
        R"([{"function":"FindAll","inputs":[],"dependencies":[]},
            {"function":"Relate","inputs":["launched_by"],"dependencies":[0]},
            {"function":"Relate","inputs":["launch_vehicle"],"dependencies":[1]},
            {"function":"Relate","inputs":["launched_by"],"dependencies":[2]},
            {"function":"What","inputs":[],"dependencies":[3]}])");
    (void)kb;
    PromptBundle b = build_prompt(odd, pairs, 8000);
    CHECK(b.used_fallback_pairs);
    CHECK_FALSE(b.shots.empty());
  }
}

TEST_CASE("replay generator") {
  ReplayGenerator gen({"first question?", "second question?"});
  PromptBundle dummy;
  CHECK(gen.generate(dummy) == "first question?");
  CHECK(gen.generate(dummy) == "second question?");
  CHECK_THROWS_AS(gen.generate(dummy), AugmentError);
}

TEST_CASE("dataset save / load round trip") {
  auto ds = manual_set();
  ds[0].question.reset();
  ds[0].source = "augmented";
  auto path = (std::filesystem::temp_directory_path() / "koplqa_ds_rt.jsonl").string();
  save_dataset(path, ds);
  auto back = load_dataset(path);
  REQUIRE(back.size() == ds.size());
  for (size_t i = 0; i < ds.size(); ++i) {
    CHECK(back[i].question == ds[i].question);
    CHECK(back[i].source == ds[i].source);
    CHECK(serialize_program(back[i].program) == serialize_program(ds[i].program));
  }
  std::filesystem::remove(path);
}

TEST_CASE("split keeps train and validation program-disjoint") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  auto manual = manual_set();

  std::vector<DatasetSample> augmented;
  for (const auto& s : manual) {
    MutationReport rep = mutate_program(s.program, kb, 6, 5);
    for (const auto& a : rep.samples) {
      DatasetSample ds;
      ds.program = a.program;
      ds.source = "augmented";
      augmented.push_back(ds);
    }
    // duplicated manual programs in the augmented pool must get filtered
    DatasetSample dup;
    dup.program = s.program;
    dup.source = "augmented";
    augmented.push_back(dup);
  }

  SplitResult split = split_dataset(manual, augmented, 0.1, 42);
  CHECK(split.validation.size() >=
        manual.size() + static_cast<size_t>(0.1 * augmented.size()) - 1);

  std::set<std::string> val_programs;
  for (const auto& s : split.validation)
    val_programs.insert(serialize_program(s.program));
  for (const auto& s : split.train)
    CHECK(val_programs.count(serialize_program(s.program)) == 0);

  // all manual samples are in validation
  size_t manual_in_val = 0;
  for (const auto& s : split.validation)
    if (s.source == "manual") ++manual_in_val;
  CHECK(manual_in_val == manual.size());

  // same seed, same split
  SplitResult again = split_dataset(manual, augmented, 0.1, 42);
  CHECK(again.train.size() == split.train.size());
  CHECK(again.validation.size() == split.validation.size());

  CHECK_THROWS_AS(split_dataset(manual, augmented, 1.5, 1), AugmentError);
}
