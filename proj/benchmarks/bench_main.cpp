#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "koplqa/linker.hpp"

using namespace koplqa;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string fixture(const std::string& rel) {
  return std::string(KOPLQA_FIXTURE_DIR) + "/" + rel;
}

const KnowledgeBase& mini_kb() {
  static const KnowledgeBase kb =
      KnowledgeBase::load_json_text(slurp(fixture("mini_space.json")));
  return kb;
}

const TemplateStore& templates() {
  static const TemplateStore store = load_templates(fixture("templates.jsonl"));
  return store;
}

KnowledgeBase synthetic_kb(int entities) {
  std::ostringstream js;
  js << R"({"concepts":[{"id":"c-w","name":"Widget","subclassOf":[]}],"entities":[)";
  for (int i = 0; i < entities; ++i) {
    if (i) js << ',';
    js << R"({"id":"e)" << i << R"(","name":"Widget )" << i
       << R"(","instanceOf":["c-w"]})";
  }
  js << "]}";
  return KnowledgeBase::load_json_text(js.str());
}

void BM_ExecuteFixtureProgram(benchmark::State& state) {
  Program p = parse_program(slurp(fixture("programs/reentry_count.json")));
  for (auto _ : state)
    benchmark::DoNotOptimize(execute_program(mini_kb(), p).rendered);
}
BENCHMARK(BM_ExecuteFixtureProgram);

void BM_FilterConceptCount(benchmark::State& state) {
  KnowledgeBase kb = synthetic_kb(static_cast<int>(state.range(0)));
  Program p = parse_program(
      R"([{"function":"FindAll","inputs":[],"dependencies":[]},
          {"function":"FilterConcept","inputs":["Widget"],"dependencies":[0]},
          {"function":"Count","inputs":[],"dependencies":[1]}])");
  for (auto _ : state)
    benchmark::DoNotOptimize(execute_program(kb, p).rendered);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterConceptCount)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_PredictSketch(benchmark::State& state) {
  const std::string q = "How many RocketDebris reentered before 2019?";
  for (auto _ : state)
    benchmark::DoNotOptimize(predict_sketch(q, templates()).template_index);
}
BENCHMARK(BM_PredictSketch);

void BM_AnswerQuestion(benchmark::State& state) {
  TrigramScorer scorer;
  const std::string q = "What is the inclination of the orbit of Hubble?";
  for (auto _ : state)
    benchmark::DoNotOptimize(
        answer_question(q, mini_kb(), templates(), scorer).answer.rendered);
}
BENCHMARK(BM_AnswerQuestion);

}  // namespace

BENCHMARK_MAIN();
