#pragma once

#include <optional>
#include <random>

#include "koplqa/exec.hpp"
#include "koplqa/program.hpp"

namespace koplqa {

struct AugmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Substitution {
  int call_index = 0;
  int slot_index = 0;
  std::string old_arg;
  std::string new_arg;
  bool operator==(const Substitution&) const = default;
};

struct AugmentedSample {
  Program program;
  std::string source_id;
  std::vector<Substitution> substitutions;
  std::optional<std::string> question;  // filled by the external generator
  std::string model;
  double temperature = 0.75;
};

struct MutationOptions {
  // Keep samples whose result is empty but type-valid.
  bool keep_empty_results = true;
  size_t max_attempts_per_sample = 20;
};

struct MutationReport {
  std::vector<AugmentedSample> samples;
  std::vector<std::string> skipped;  // reasons for samples that could not be built
};

// Ontology-driven mutation: entity slots get a same-concept entity, attribute
// slots a key present on that concept's members, relation slots a predicate
// occurring there, concept slots follow the replaced entity, and literals are
// re-sampled from observed values. Every returned sample validates and
// executes; the sketch is preserved.
MutationReport mutate_program(const Program& p, const KnowledgeBase& kb, size_t count,
                              uint64_t seed, const std::string& source_id = "",
                              const MutationOptions& opts = {});

struct AcronymDict {
  std::vector<std::pair<std::string, std::string>> entries;
};

const AcronymDict& default_acronym_dict();  // the 14 orbit-class entries
AcronymDict load_acronym_dict(const std::string& path);

struct PromptBundle {
  std::string header;
  std::vector<std::pair<std::string, std::string>> shots;  // (program JSON, question)
  std::string target_program_json;
  bool used_fallback_pairs = false;

  std::string render() const;
};

PromptBundle build_prompt(const AugmentedSample& target,
                          const std::vector<std::pair<std::string, Program>>& manual_set,
                          size_t limit,
                          const AcronymDict& dict = default_acronym_dict());

// Transport for the external question generator; the core ships a replay
// client so no network is required.
class GeneratorClient {
 public:
  virtual ~GeneratorClient() = default;
  virtual std::string generate(const PromptBundle& prompt) = 0;
};

class ReplayGenerator : public GeneratorClient {
 public:
  explicit ReplayGenerator(std::vector<std::string> responses)
      : responses_(std::move(responses)) {}
  std::string generate(const PromptBundle&) override;

 private:
  std::vector<std::string> responses_;
  size_t next_ = 0;
};

struct DatasetSample {
  std::optional<std::string> question;
  Program program;
  std::string source;  // "manual" | "augmented"
};

std::vector<DatasetSample> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<DatasetSample>& samples);

struct SplitResult {
  std::vector<DatasetSample> train;
  std::vector<DatasetSample> validation;
};

// Validation = all manual samples + a seeded val_fraction of the augmented
// ones; any training sample whose canonical program string appears in
// validation is filtered out.
SplitResult split_dataset(const std::vector<DatasetSample>& manual,
                          const std::vector<DatasetSample>& augmented,
                          double val_fraction, uint64_t seed);

}  // namespace koplqa
