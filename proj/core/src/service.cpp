#include "koplqa/service.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "httplib.h"
#include "json.hpp"

namespace koplqa {

using nlohmann::json;
using nlohmann::ordered_json;

std::string utc_timestamp_rfc3339() {
  using namespace std::chrono;
  auto now = system_clock::now();
  std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[72];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

FeedbackLog::FeedbackLog(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++next_id_;
}

uint64_t FeedbackLog::append(FeedbackRecord record) {
  std::lock_guard lock(mutex_);
  record.timestamp = utc_timestamp_rfc3339();
  // monotone non-decreasing within one log file
  if (record.timestamp < last_timestamp_) record.timestamp = last_timestamp_;
  last_timestamp_ = record.timestamp;
  uint64_t id = next_id_++;
  ordered_json doc;
  doc["id"] = id;
  doc["timestamp"] = record.timestamp;
  doc["username"] = record.username;
  doc["question"] = record.question;
  doc["program"] = record.program_json;
  doc["answer"] = record.answer;
  doc["rating"] = record.rating;
  doc["comment"] = record.comment;
  std::ofstream out(path_, std::ios::app);
  out << doc.dump() << "\n";
  out.flush();
  return id;
}

namespace {

std::string error_body(const std::string& stage, const std::string& message) {
  ordered_json doc;
  doc["error"]["stage"] = stage;
  doc["error"]["message"] = message;
  return doc.dump();
}

ordered_json decisions_to_json(const std::vector<LinkDecision>& decisions) {
  ordered_json arr = ordered_json::array();
  for (const auto& d : decisions) {
    ordered_json jd;
    jd["call"] = d.call_index;
    jd["slot"] = d.slot_index;
    jd["kind"] = candidate_kind_name(d.chosen.kind);
    jd["chosen"] = d.chosen.label;
    jd["probability"] = d.probability;
    jd["margin"] = d.margin;
    arr.push_back(std::move(jd));
  }
  return arr;
}

}  // namespace

QaService::QaService(const KnowledgeBase& kb, const TemplateStore& templates,
                     const ScoringProvider& scorer, FeedbackLog& feedback,
                     std::vector<DatasetSample> validation_samples)
    : kb_(kb),
      templates_(templates),
      scorer_(scorer),
      feedback_(feedback),
      validation_(std::move(validation_samples)) {}

std::string QaService::handle_answer(const std::string& body, int& status) const {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("question") ||
      !doc.at("question").is_string()) {
    status = 400;
    return error_body("request", "body must be {\"question\": string}");
  }
  try {
    std::unique_lock<std::mutex> lock(scorer_mutex_, std::defer_lock);
    if (!scorer_.thread_safe()) lock.lock();
    PipelineResult r = answer_question(doc.at("question").get<std::string>(), kb_,
                                       templates_, scorer_);
    ordered_json out;
    out["program"] = json::parse(serialize_program(r.program));
    out["answer"] = r.answer.rendered;
    out["decisions"] = decisions_to_json(r.decisions);
    out["sketch_similarity"] = r.sketch.similarity;
    status = 200;
    return out.dump();
  } catch (const LinkError& e) {
    status = 400;
    return error_body(e.stage, e.what());
  } catch (const std::exception& e) {
    status = 400;
    return error_body("pipeline", e.what());
  }
}

std::string QaService::handle_execute(const std::string& body, int& status) const {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("program")) {
    status = 400;
    return error_body("request", "body must be {\"program\": [...]}");
  }
  try {
    Program p = parse_program(doc.at("program").dump());
    Answer a = execute_program(kb_, p);
    ordered_json out;
    out["answer"] = a.rendered;
    if (!a.warnings.empty()) out["warnings"] = a.warnings;
    status = 200;
    return out.dump();
  } catch (const ProgramError& e) {
    status = 400;
    return error_body("parse", e.what());
  } catch (const ExecError& e) {
    status = 400;
    return error_body("execute", e.what());
  }
}

std::string QaService::handle_feedback(const std::string& body, int& status) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("username") || !doc.contains("question")) {
    status = 400;
    return error_body("request", "body must carry username and question");
  }
  std::string rating = doc.value("rating", "none");
  if (rating != "up" && rating != "down" && rating != "none") {
    status = 400;
    return error_body("request", "rating must be up, down or none");
  }
  FeedbackRecord rec;
  rec.username = doc.at("username").get<std::string>();
  rec.question = doc.at("question").get<std::string>();
  if (doc.contains("program") && !doc.at("program").is_null())
    rec.program_json = doc.at("program").is_string()
                           ? doc.at("program").get<std::string>()
                           : doc.at("program").dump();
  rec.answer = doc.value("answer", "");
  rec.rating = rating;
  rec.comment = doc.value("comment", "");
  uint64_t id = feedback_.append(std::move(rec));
  ordered_json out;
  out["id"] = id;
  status = 200;
  return out.dump();
}

std::string QaService::handle_validation_sample(int& status) const {
  std::vector<const DatasetSample*> with_questions;
  for (const auto& s : validation_)
    if (s.question) with_questions.push_back(&s);
  if (with_questions.empty()) {
    status = 404;
    return error_body("validation", "no validation questions loaded");
  }
  size_t idx;
  {
    std::lock_guard lock(sample_mutex_);
    std::uniform_int_distribution<size_t> dist(0, with_questions.size() - 1);
    idx = dist(sample_rng_);
  }
  ordered_json out;
  out["question"] = *with_questions[idx]->question;
  out["program"] = json::parse(serialize_program(with_questions[idx]->program));
  status = 200;
  return out.dump();
}

std::string QaService::handle_health(int& status) const {
  KbStats s = kb_.stats();
  ordered_json out;
  out["status"] = "ok";
  out["entities"] = s.entities;
  out["relations"] = s.relations;
  out["concepts"] = s.concepts;
  out["attribute_keys"] = s.attribute_keys;
  out["templates"] = templates_.size();
  status = 200;
  return out.dump();
}

void QaService::install(httplib::Server& server) {
  server.Post("/answer", [this](const httplib::Request& req, httplib::Response& res) {
    int status = 500;
    std::string body = handle_answer(req.body, status);
    res.status = status;
    res.set_content(body, "application/json");
  });
  server.Post("/execute", [this](const httplib::Request& req, httplib::Response& res) {
    int status = 500;
    std::string body = handle_execute(req.body, status);
    res.status = status;
    res.set_content(body, "application/json");
  });
  server.Post("/feedback", [this](const httplib::Request& req, httplib::Response& res) {
    int status = 500;
    std::string body = handle_feedback(req.body, status);
    res.status = status;
    res.set_content(body, "application/json");
  });
  server.Get("/validation/sample",
             [this](const httplib::Request&, httplib::Response& res) {
               int status = 500;
               std::string body = handle_validation_sample(status);
               res.status = status;
               res.set_content(body, "application/json");
             });
  server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    int status = 500;
    std::string body = handle_health(status);
    res.status = status;
    res.set_content(body, "application/json");
  });
}

}  // namespace koplqa
