#include "doctest.h"
#include "json.hpp"
#include "koplqa/evalkit.hpp"
#include "support/fixtures.hpp"

using namespace koplqa;

namespace {

std::vector<Program> fixture_golds() {
  std::vector<Program> out;
  for (const char* name : {"orbit_inclination.json", "reentry_count.json", "depth_filter.json",
                           "host_country.json", "epoch_count.json"}) {
    out.push_back(parse_program(
        testsup::slurp(testsup::fixture_path(std::string("programs/") + name))));
  }
  return out;
}

}  // namespace

TEST_CASE("perfect predictions score 1.0 everywhere") {
  auto golds = fixture_golds();
  EvalReport r = evaluate(golds, golds);
  CHECK(r.sample_count == golds.size());
  for (Component c : kAllComponents) CHECK(r.accuracy.at(c) == doctest::Approx(1.0));
  CHECK(r.overall_accuracy == doctest::Approx(1.0));
}

TEST_CASE("single slot corruption arithmetic") {
  auto golds = fixture_golds();
  auto preds = golds;
  // orbit_inclination Find("Hubble") -> Find("Russia"): one entity slot wrong
  preds[0].calls[0].inputs[0] = "Russia";
  EvalReport r = evaluate(preds, golds);

  // entity slots in the gold set: Hubble, State Remote Sensing Center
  CHECK(r.denominators.at(Component::Entity) == 2);
  CHECK(r.accuracy.at(Component::Entity) == doctest::Approx(0.5));
  // sketches all still match
  CHECK(r.accuracy.at(Component::Function) == doctest::Approx(1.0));
  // one of five programs no longer matches exactly
  CHECK(r.overall_accuracy == doctest::Approx(0.8));
  // untouched components stay perfect
  CHECK(r.accuracy.at(Component::Relation) == doctest::Approx(1.0));
  CHECK(r.accuracy.at(Component::Concept) == doctest::Approx(1.0));
  CHECK(r.accuracy.at(Component::Attribute) == doctest::Approx(1.0));
  CHECK(r.accuracy.at(Component::Operation) == doctest::Approx(1.0));
}

TEST_CASE("slot denominators count gold argument slots") {
  auto golds = fixture_golds();
  EvalReport r = evaluate(golds, golds);
  CHECK(r.denominators.at(Component::Entity) == 2);     // Hubble, SRSC
  CHECK(r.denominators.at(Component::Relation) == 3);   // orbit x2, host_country
  CHECK(r.denominators.at(Component::Concept) == 5);
  CHECK(r.denominators.at(Component::Attribute) == 4);  // inclination, Reentry, depth, epoch
  CHECK(r.denominators.at(Component::Operation) == 3);  // <, =, =
}

TEST_CASE("sketch mismatch forfeits every slot of the sample") {
  Program gold = parse_program(
      testsup::slurp(testsup::fixture_path("programs/orbit_inclination.json")));
  Program pred = parse_program(
      R"([{"function":"Find","inputs":["Hubble"],"dependencies":[]},
          {"function":"QueryAttr","inputs":["inclination"],"dependencies":[0]}])");
  MatchRecord rec = compare_programs(pred, gold);
  CHECK_FALSE(rec.sketch_match);
  CHECK_FALSE(rec.overall);
  CHECK(rec.slots.at(Component::Entity).total == 1);
  CHECK(rec.slots.at(Component::Entity).matched == 0);
  CHECK(rec.slots.at(Component::Attribute).matched == 0);
}

TEST_CASE("empty slot denominators default to accuracy 1.0") {
  Program p = parse_program(
      R"([{"function":"FindAll","inputs":[],"dependencies":[]},
          {"function":"Count","inputs":[],"dependencies":[0]}])");
  EvalReport r = evaluate({p}, {p});
  CHECK(r.denominators.at(Component::Entity) == 0);
  CHECK(r.accuracy.at(Component::Entity) == doctest::Approx(1.0));
  CHECK(r.accuracy.at(Component::Operation) == doctest::Approx(1.0));
}

TEST_CASE("input validation") {
  auto golds = fixture_golds();
  auto short_preds = std::vector<Program>(golds.begin(), golds.begin() + 2);
  CHECK_THROWS_AS(evaluate(short_preds, golds), EvalError);
  CHECK_THROWS_AS(evaluate({}, {}), EvalError);
}

TEST_CASE("report serializations") {
  auto golds = fixture_golds();
  EvalReport r = evaluate(golds, golds);
  auto doc = nlohmann::json::parse(r.to_json());
  CHECK(doc.at("components").at("entity").at("accuracy").get<double>() ==
        doctest::Approx(1.0));
  CHECK(doc.at("overall").at("denominator").get<size_t>() == golds.size());
  std::string table = r.render_table();
  CHECK(table.find("function") != std::string::npos);
  CHECK(table.find("overall") != std::string::npos);
}
