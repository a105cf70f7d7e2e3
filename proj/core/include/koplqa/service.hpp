#pragma once

#include <memory>
#include <mutex>

#include "koplqa/augment.hpp"
#include "koplqa/linker.hpp"

namespace httplib {
class Server;
}

namespace koplqa {

struct FeedbackRecord {
  std::string timestamp;  // RFC 3339 UTC, assigned on append
  std::string username;
  std::string question;
  std::string program_json;  // canonical serialization
  std::string answer;
  std::string rating = "none";  // up | down | none
  std::string comment;
};

// Append-only JSONL log with a single serialized writer; lines are written
// whole so the file stays valid JSONL under concurrent posts.
class FeedbackLog {
 public:
  explicit FeedbackLog(std::string path);
  uint64_t append(FeedbackRecord record);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::mutex mutex_;
  uint64_t next_id_ = 0;
  std::string last_timestamp_;
};

std::string utc_timestamp_rfc3339();

struct ServiceConfig {
  std::string kb_path;
  std::string template_path;
  std::string feedback_path = "feedback.jsonl";
  std::string validation_path;  // optional dataset JSONL for /validation/sample
  int port = 8080;
  std::string host = "127.0.0.1";
};

// Holds the loaded stores and wires the HTTP endpoints onto a server.
class QaService {
 public:
  QaService(const KnowledgeBase& kb, const TemplateStore& templates,
            const ScoringProvider& scorer, FeedbackLog& feedback,
            std::vector<DatasetSample> validation_samples = {});

  void install(httplib::Server& server);

  // Endpoint bodies, exposed for direct testing. Each returns the JSON
  // response and sets `status`.
  std::string handle_answer(const std::string& body, int& status) const;
  std::string handle_execute(const std::string& body, int& status) const;
  std::string handle_feedback(const std::string& body, int& status);
  std::string handle_validation_sample(int& status) const;
  std::string handle_health(int& status) const;

 private:
  const KnowledgeBase& kb_;
  const TemplateStore& templates_;
  const ScoringProvider& scorer_;
  FeedbackLog& feedback_;
  std::vector<DatasetSample> validation_;
  mutable std::mutex scorer_mutex_;  // used when the provider is not thread safe
  mutable std::mt19937_64 sample_rng_{std::random_device{}()};
  mutable std::mutex sample_mutex_;
};

}  // namespace koplqa
