#include <filesystem>
#include <fstream>
#include <regex>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "koplqa/service.hpp"
#include "support/fixtures.hpp"

using namespace koplqa;
using nlohmann::json;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {
    std::filesystem::remove(path);
  }
  ~TempFile() { std::filesystem::remove(path); }
};

struct ServiceHarness {
  TempFile feedback_file{"koplqa_feedback_test.jsonl"};
  FeedbackLog log{feedback_file.path};
  TrigramScorer scorer;
  TemplateStore templates = load_templates(testsup::fixture_path("templates.jsonl"));
  QaService service{testsup::fixture_kb(), templates, scorer, log,
                    load_dataset(testsup::fixture_path("manual.jsonl"))};
};

}  // namespace

TEST_CASE("rfc3339 timestamps") {
  std::string ts = utc_timestamp_rfc3339();
  static const std::regex shape(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)");
  CHECK(std::regex_match(ts, shape));
}

TEST_CASE("feedback log appends valid jsonl with monotone ids and timestamps") {
  TempFile file("koplqa_feedback_log.jsonl");
  {
    FeedbackLog log(file.path);
    FeedbackRecord rec;
    rec.username = "alice";
    rec.question = "q1";
    rec.rating = "up";
    CHECK(log.append(rec) == 0);
    rec.username = "bob";
    rec.rating = "down";
    CHECK(log.append(rec) == 1);
  }
  {
    // reopening continues the id sequence
    FeedbackLog log(file.path);
    FeedbackRecord rec;
    rec.username = "carol";
    rec.question = "q2";
    CHECK(log.append(rec) == 2);
  }
  std::ifstream in(file.path);
  std::string line, prev_ts;
  size_t lines = 0;
  while (std::getline(in, line)) {
    json doc = json::parse(line);
    CHECK(doc.at("id").get<uint64_t>() == lines);
    std::string ts = doc.at("timestamp").get<std::string>();
    CHECK(ts >= prev_ts);
    prev_ts = ts;
    ++lines;
  }
  CHECK(lines == 3);
}

TEST_CASE("feedback log survives concurrent appends") {
  TempFile file("koplqa_feedback_mt.jsonl");
  FeedbackLog log(file.path);
  constexpr int kThreads = 4, kEach = 25;
  std::vector<std::thread> workers;
  for (int t = 0; t < kThreads; ++t)
    workers.emplace_back([&log, t] {
      for (int i = 0; i < kEach; ++i) {
        FeedbackRecord rec;
        rec.username = "worker" + std::to_string(t);
        rec.question = "q" + std::to_string(i);
        log.append(rec);
      }
    });
  for (auto& w : workers) w.join();

  std::ifstream in(file.path);
  std::string line;
  std::set<uint64_t> ids;
  while (std::getline(in, line)) {
    json doc = json::parse(line);  // every line is whole and valid
    ids.insert(doc.at("id").get<uint64_t>());
  }
  CHECK(ids.size() == kThreads * kEach);
}

TEST_CASE("POST /answer") {
  ServiceHarness h;
  int status = 0;
  std::string body = h.service.handle_answer(
      R"({"question": "What is the inclination of the orbit of Hubble?"})", status);
  CHECK(status == 200);
  json doc = json::parse(body);
  CHECK(doc.at("answer") == "28.5 deg");
  CHECK(doc.at("program").is_array());
  CHECK_FALSE(doc.at("decisions").empty());
  CHECK(doc.at("sketch_similarity").get<double>() > 0.9);

  status = 0;
  body = h.service.handle_answer(R"({"nope": 1})", status);
  CHECK(status == 400);
  CHECK(json::parse(body).at("error").at("stage") == "request");

  status = 0;
  body = h.service.handle_answer(
      R"({"question": "How many RocketDebris reentered soon?"})", status);
  CHECK(status == 400);
  CHECK(json::parse(body).at("error").at("stage") == "link");
}

TEST_CASE("POST /execute") {
  ServiceHarness h;
  int status = 0;
  json req;
  req["program"] = json::parse(
      testsup::slurp(testsup::fixture_path("programs/reentry_count.json")));
  std::string body = h.service.handle_execute(req.dump(), status);
  CHECK(status == 200);
  CHECK(json::parse(body).at("answer") == "7");

  status = 0;
  body = h.service.handle_execute(R"({"program": [{"function": "Nope"}]})", status);
  CHECK(status == 400);
  CHECK(json::parse(body).at("error").at("stage") == "parse");

  status = 0;
  body = h.service.handle_execute(
      R"({"program": [{"function":"FindAll","inputs":[],"dependencies":[]},
                      {"function":"FilterConcept","inputs":["Starship"],"dependencies":[0]}]})",
      status);
  CHECK(status == 400);
  CHECK(json::parse(body).at("error").at("stage") == "execute");
}

TEST_CASE("POST /feedback") {
  ServiceHarness h;
  int status = 0;
  std::string body = h.service.handle_feedback(
      R"({"username": "alice", "question": "q", "rating": "up", "comment": "nice"})",
      status);
  CHECK(status == 200);
  CHECK(json::parse(body).at("id").get<uint64_t>() == 0);

  status = 0;
  body = h.service.handle_feedback(R"({"username": "alice"})", status);
  CHECK(status == 400);

  status = 0;
  body = h.service.handle_feedback(
      R"({"username": "alice", "question": "q", "rating": "meh"})", status);
  CHECK(status == 400);
}

TEST_CASE("GET /validation/sample and /health") {
  ServiceHarness h;
  int status = 0;
  std::string body = h.service.handle_validation_sample(status);
  CHECK(status == 200);
  json doc = json::parse(body);
  CHECK(doc.at("question").is_string());
  CHECK(doc.at("program").is_array());

  status = 0;
  body = h.service.handle_health(status);
  CHECK(status == 200);
  json health = json::parse(body);
  CHECK(health.at("status") == "ok");
  CHECK(health.at("entities").get<size_t>() == 32);
  CHECK(health.at("templates").get<size_t>() == h.templates.size());
}

TEST_CASE("validation sample without data is a 404") {
  TempFile file("koplqa_feedback_empty.jsonl");
  FeedbackLog log(file.path);
  TrigramScorer scorer;
  TemplateStore templates = load_templates(testsup::fixture_path("templates.jsonl"));
  QaService service(testsup::fixture_kb(), templates, scorer, log, {});
  int status = 0;
  std::string body = service.handle_validation_sample(status);
  CHECK(status == 404);
  CHECK(json::parse(body).at("error").at("stage") == "validation");
}
