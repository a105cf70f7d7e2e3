#pragma once

#include <set>

#include "koplqa/exec.hpp"
#include "koplqa/program.hpp"
#include "koplqa/scorer.hpp"
#include "koplqa/textparse.hpp"

namespace koplqa {

struct LinkError : std::runtime_error {
  std::string stage;  // sketch | link | execute
  LinkError(std::string stage_, const std::string& msg)
      : std::runtime_error(stage_ + ": " + msg), stage(std::move(stage_)) {}
};

struct SketchTemplate {
  std::string question;
  Program program;
};

using TemplateStore = std::vector<SketchTemplate>;

TemplateStore load_templates(const std::string& path);

struct SketchPrediction {
  Sketch sketch;
  double similarity = 0.0;
  size_t template_index = 0;
};

// Nearest template under character-trigram cosine; ties broken by lowest
// template index.
SketchPrediction predict_sketch(const std::string& question,
                                const TemplateStore& templates);

struct CandidateScore {
  Candidate candidate;
  double raw = 0.0;
  double probability = 0.0;
};

std::vector<CandidateScore> score_slot(const std::string& context,
                                       const std::vector<Candidate>& candidates,
                                       const ScoringProvider& scorer);

struct LinkDecision {
  int call_index = 0;
  int slot_index = 0;
  Candidate chosen;
  double probability = 0.0;
  double margin = 0.0;  // probability gap to the runner-up
};

Program link_arguments(const std::string& question, const Sketch& sketch,
                       const KnowledgeBase& kb, const ScoringProvider& scorer,
                       std::vector<LinkDecision>* decisions = nullptr,
                       const CueRules& rules = default_cue_rules());

struct NegativeBatch {
  std::vector<std::string> batch_entities;  // sorted
  std::vector<std::string> extras;          // sampled order
  std::vector<std::string> merged;          // sorted union
};

// Extras drawn uniformly without replacement from all \ batch, clipped to the
// available pool; bit-reproducible for a fixed seed.
NegativeBatch build_negative_batch(const std::set<std::string>& batch_entities,
                                   const std::set<std::string>& all_entities,
                                   size_t n, uint64_t seed);

struct PipelineResult {
  SketchPrediction sketch;
  Program program;
  Answer answer;
  std::vector<LinkDecision> decisions;
};

PipelineResult answer_question(const std::string& question, const KnowledgeBase& kb,
                               const TemplateStore& templates,
                               const ScoringProvider& scorer,
                               const CueRules& rules = default_cue_rules());

}  // namespace koplqa
