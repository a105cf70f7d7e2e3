#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "koplqa/kb.hpp"

namespace koplqa {

// Sparse character-trigram count vector, unit-normalized on demand.
struct TrigramProfile {
  std::vector<std::pair<uint32_t, float>> entries;  // sorted by key
  double norm = 0.0;

  static TrigramProfile build(const std::string& text);
};

double trigram_cosine(const TrigramProfile& a, const TrigramProfile& b);
double trigram_cosine(const std::string& a, const std::string& b);

// Numerically stable softmax (max-subtraction).
std::vector<double> softmax(std::span<const double> raw);

// Raw scores for a candidate pool given one slot context. Implementations
// must either be safe for concurrent invocation or report thread_safe()
// false, in which case callers serialize.
class ScoringProvider {
 public:
  virtual ~ScoringProvider() = default;
  virtual std::vector<double> score(const std::string& context,
                                    const std::vector<Candidate>& candidates) const = 0;
  virtual bool thread_safe() const { return true; }
};

// Built-in lexical provider: trigram cosine between the slot context and the
// candidate label, plus 0.5 when the lowercased label occurs verbatim in the
// context.
class TrigramScorer : public ScoringProvider {
 public:
  std::vector<double> score(const std::string& context,
                            const std::vector<Candidate>& candidates) const override;
};

}  // namespace koplqa
