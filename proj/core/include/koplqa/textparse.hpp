#pragma once

#include <string>
#include <vector>

#include "koplqa/value.hpp"

namespace koplqa {

struct TimeMention {
  size_t begin = 0;
  size_t end = 0;  // past-the-end offset in the question
  bool is_date = false;
  CalendarDate date;  // valid when is_date
  int year = 0;
  char op = '=';  // cue-word hint: < > =
};

struct NumberMention {
  size_t begin = 0;
  size_t end = 0;
  double value = 0.0;
  std::string unit;
  char op = '=';
};

// Cue word -> comparison operator, applied over a token window preceding the
// mention. Shipped as a versioned config file; defaults cover the built-in
// grammar.
struct CueRules {
  int version = 1;
  int window_tokens = 3;
  std::vector<std::pair<std::string, char>> time_cues;
  std::vector<std::pair<std::string, char>> number_cues;
};

const CueRules& default_cue_rules();
CueRules load_cue_rules(const std::string& path);

// Recognizes 4-digit years (1900-2099), ISO dates, "8th of April 2022" and
// "April 8, 2022". Left to right, non-overlapping, earliest-longest match.
std::vector<TimeMention> extract_times(const std::string& question,
                                       const CueRules& rules = default_cue_rules());

// Decimal literals with an optionally attached unit token. Year-shaped
// integers already claimed by extract_times are excluded.
std::vector<NumberMention> extract_numbers(const std::string& question,
                                           const CueRules& rules = default_cue_rules());

}  // namespace koplqa
