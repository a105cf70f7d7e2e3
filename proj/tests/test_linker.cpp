#include <set>

#include "doctest.h"
#include "koplqa/linker.hpp"
#include "support/fixtures.hpp"

using namespace koplqa;

namespace {

const TemplateStore& fixture_templates() {
  static const TemplateStore store =
      load_templates(testsup::fixture_path("templates.jsonl"));
  return store;
}

}  // namespace

TEST_CASE("template store loads") {
  const TemplateStore& store = fixture_templates();
  CHECK(store.size() == 9);
  for (const auto& t : store) {
    CHECK_FALSE(t.question.empty());
    CHECK_FALSE(t.program.calls.empty());
  }
}

TEST_CASE("sketch retrieval picks the nearest template") {
  const TemplateStore& store = fixture_templates();
  for (size_t i = 0; i < store.size(); ++i) {
    auto pred = predict_sketch(store[i].question, store);
    CHECK(pred.template_index == i);
    CHECK(pred.similarity == doctest::Approx(1.0));
    CHECK(pred.sketch == sketch_of(store[i].program));
  }
  // close paraphrase still lands on the right sketch
  auto pred = predict_sketch("Tell me the inclination of the orbit of Hubble", store);
  CHECK(pred.template_index == 0);
}

TEST_CASE("sketch ties break toward the lowest template index") {
  TemplateStore store;
  SketchTemplate a{"what is the mass of Saturn V",
                   parse_program(R"([{"function":"FindAll","inputs":[],"dependencies":[]}])")};
  SketchTemplate b = a;
  b.program = parse_program(
      R"([{"function":"FindAll","inputs":[],"dependencies":[]},
          {"function":"Count","inputs":[],"dependencies":[0]}])");
  store.push_back(a);
  store.push_back(b);
  auto pred = predict_sketch(a.question, store);
  CHECK(pred.template_index == 0);
  CHECK(pred.sketch.size() == 1);
}

TEST_CASE("empty template store is a sketch-stage error") {
  try {
    predict_sketch("anything", {});
    FAIL("expected LinkError");
  } catch (const LinkError& e) {
    CHECK(e.stage == "sketch");
  }
}

TEST_CASE("score_slot yields a proper distribution") {
  TrigramScorer scorer;
  const KnowledgeBase& kb = testsup::fixture_kb();
  auto scored = score_slot("what is the inclination of the orbit of Hubble",
                           kb.candidates_of_kind(CandidateKind::Attribute), scorer);
  double sum = 0.0;
  const CandidateScore* best = &scored[0];
  for (const auto& s : scored) {
    sum += s.probability;
    if (s.probability > best->probability) best = &s;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(best->candidate.label == "inclination");
}

TEST_CASE("link_arguments reproduces the fixture programs") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  TrigramScorer scorer;

  SUBCASE("entity / relation / attribute slots") {
    std::vector<LinkDecision> decisions;
    Program p = link_arguments(
        "What is the inclination of the orbit of Hubble?",
        sketch_of(fixture_templates()[0].program), kb, scorer, &decisions);
    CHECK(serialize_program(p) ==
          serialize_program(parse_program(
              testsup::slurp(testsup::fixture_path("programs/orbit_inclination.json")))));
    CHECK(decisions.size() == 3);
    for (const auto& d : decisions) {
      CHECK(d.probability > 0.0);
      CHECK(d.margin >= 0.0);
    }
  }
  SUBCASE("year literal and cue operator") {
    Program p = link_arguments("How many RocketDebris reentered before 2019?",
                               sketch_of(fixture_templates()[1].program), kb, scorer);
    CHECK(serialize_program(p) ==
          serialize_program(parse_program(
              testsup::slurp(testsup::fixture_path("programs/reentry_count.json")))));
  }
  SUBCASE("date literal") {
    Program p = link_arguments("How many Launch entries have an epoch on 2022-04-08?",
                               sketch_of(fixture_templates()[2].program), kb, scorer);
    CHECK(serialize_program(p) ==
          serialize_program(parse_program(
              testsup::slurp(testsup::fixture_path("programs/epoch_count.json")))));
  }
  SUBCASE("number literal with operator cue") {
    Program p = link_arguments("Is the mass of Saturn V greater than 1000 kg?",
                               sketch_of(fixture_templates()[6].program), kb, scorer);
    REQUIRE(p.calls.size() == 3);
    CHECK(p.calls[2].inputs == std::vector<std::string>{"1000", ">"});
  }
  SUBCASE("string literal from the observed value pool") {
    Program p = link_arguments("How many objects have objectClass Rocket Debris?",
                               sketch_of(fixture_templates()[7].program), kb, scorer);
    REQUIRE(p.calls.size() == 3);
    CHECK(p.calls[1].inputs ==
          std::vector<std::string>{"objectClass", "Rocket Debris"});
  }
  SUBCASE("missing literal is a link-stage error") {
    try {
      link_arguments("How many RocketDebris reentered early?",
                     sketch_of(fixture_templates()[1].program), kb, scorer);
      FAIL("expected LinkError");
    } catch (const LinkError& e) {
      CHECK(e.stage == "link");
    }
  }
}

TEST_CASE("answer_question end to end") {
  const KnowledgeBase& kb = testsup::fixture_kb();
  TrigramScorer scorer;
  PipelineResult r = answer_question("What is the inclination of the orbit of Hubble?",
                                     kb, fixture_templates(), scorer);
  CHECK(r.answer.rendered == "28.5 deg");
  CHECK_FALSE(r.decisions.empty());

  PipelineResult c = answer_question("How many RocketDebris reentered before 2019?",
                                     kb, fixture_templates(), scorer);
  CHECK(c.answer.rendered == "7");
}

TEST_CASE("negative batch sampling") {
  std::set<std::string> all, batch;
  for (int i = 0; i < 60; ++i) all.insert("e-" + std::to_string(100 + i));
  int k = 0;
  for (const auto& id : all)
    if (k++ % 3 == 0) batch.insert(id);

  SUBCASE("extras avoid the batch and clip to the pool") {
    NegativeBatch nb = build_negative_batch(batch, all, 10, 42);
    CHECK(nb.extras.size() == 10);
    for (const auto& id : nb.extras) {
      CHECK(all.count(id) == 1);
      CHECK(batch.count(id) == 0);
    }
    std::set<std::string> uniq(nb.extras.begin(), nb.extras.end());
    CHECK(uniq.size() == nb.extras.size());
    CHECK(nb.merged.size() == batch.size() + nb.extras.size());

    NegativeBatch clipped = build_negative_batch(batch, all, 1000, 42);
    CHECK(clipped.extras.size() == all.size() - batch.size());
  }
  SUBCASE("bit-reproducible per seed") {
    NegativeBatch a = build_negative_batch(batch, all, 10, 7);
    NegativeBatch b = build_negative_batch(batch, all, 10, 7);
    CHECK(a.extras == b.extras);
    NegativeBatch c = build_negative_batch(batch, all, 10, 8);
    CHECK(a.extras != c.extras);
  }
}
