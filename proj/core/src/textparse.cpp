#include "koplqa/textparse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "koplqa/kb.hpp"

namespace koplqa {

namespace {

struct RawMention {
  size_t begin = 0;
  size_t end = 0;
  bool is_date = false;
  CalendarDate date;
  int year = 0;
};

int month_number(std::string name) {
  name = to_lower(name);
  static const std::vector<std::string> months = {
      "january", "february", "march", "april", "may", "june",
      "july", "august", "september", "october", "november", "december"};
  for (size_t i = 0; i < months.size(); ++i) {
    if (name == months[i] || name == months[i].substr(0, 3)) return static_cast<int>(i + 1);
  }
  return 0;
}

const char* kMonthAlt =
    "January|February|March|April|May|June|July|August|September|October|"
    "November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sep|Oct|Nov|Dec";

char op_hint(const std::string& text, size_t begin,
             const std::vector<std::pair<std::string, char>>& cues, int window) {
  // tokens in the window immediately preceding the mention, nearest first
  std::vector<std::string> tokens;
  std::string cur;
  for (size_t i = 0; i < begin; ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  int seen = 0;
  for (auto it = tokens.rbegin(); it != tokens.rend() && seen < window; ++it, ++seen) {
    for (const auto& [cue, op] : cues)
      if (*it == cue) return op;
  }
  return '=';
}

std::vector<RawMention> raw_time_mentions(const std::string& q) {
  std::vector<RawMention> found;
  auto add = [&](size_t begin, size_t end, RawMention m) {
    m.begin = begin;
    m.end = end;
    found.push_back(m);
  };

  static const std::regex iso(R"((\d{4})-(\d{2})-(\d{2}))");
  static const std::regex day_of_month(
      std::string(R"((\d{1,2})(?:st|nd|rd|th)?\s+of\s+()") + kMonthAlt +
          R"()\s+(\d{4}))",
      std::regex::icase);
  static const std::regex month_day(
      std::string("(") + kMonthAlt + R"()\s+(\d{1,2}),?\s+(\d{4}))",
      std::regex::icase);
  static const std::regex bare_year(R"((?:^|[^\d-])((?:19|20)\d{2})(?:[^\d-]|$))");

  auto scan = [&](const std::regex& re, auto&& handle) {
    auto it = std::sregex_iterator(q.begin(), q.end(), re);
    for (; it != std::sregex_iterator(); ++it) handle(*it);
  };

  scan(iso, [&](const std::smatch& m) {
    auto d = CalendarDate::parse(m.str(0));
    if (!d) return;
    RawMention raw;
    raw.is_date = true;
    raw.date = *d;
    raw.year = d->year;
    add(static_cast<size_t>(m.position(0)),
        static_cast<size_t>(m.position(0) + m.length(0)), raw);
  });
  scan(day_of_month, [&](const std::smatch& m) {
    CalendarDate d{std::stoi(m.str(3)), month_number(m.str(2)), std::stoi(m.str(1))};
    if (!d.valid()) return;
    RawMention raw;
    raw.is_date = true;
    raw.date = d;
    raw.year = d.year;
    add(static_cast<size_t>(m.position(0)),
        static_cast<size_t>(m.position(0) + m.length(0)), raw);
  });
  scan(month_day, [&](const std::smatch& m) {
    CalendarDate d{std::stoi(m.str(3)), month_number(m.str(1)), std::stoi(m.str(2))};
    if (!d.valid()) return;
    RawMention raw;
    raw.is_date = true;
    raw.date = d;
    raw.year = d.year;
    add(static_cast<size_t>(m.position(0)),
        static_cast<size_t>(m.position(0) + m.length(0)), raw);
  });
  scan(bare_year, [&](const std::smatch& m) {
    RawMention raw;
    raw.year = std::stoi(m.str(1));
    add(static_cast<size_t>(m.position(1)),
        static_cast<size_t>(m.position(1) + m.length(1)), raw);
  });

  // earliest-longest, non-overlapping
  std::sort(found.begin(), found.end(), [](const RawMention& a, const RawMention& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.end > b.end;
  });
  std::vector<RawMention> kept;
  for (const auto& m : found) {
    if (!kept.empty() && m.begin < kept.back().end) continue;
    kept.push_back(m);
  }
  return kept;
}

}  // namespace

const CueRules& default_cue_rules() {
  static const CueRules rules = [] {
    CueRules r;
    r.time_cues = {{"before", '<'}, {"until", '<'}, {"prior", '<'},
                   {"after", '>'},  {"since", '>'}, {"in", '='},
                   {"on", '='},     {"for", '='}};
    r.number_cues = {{"more", '>'},  {"over", '>'},  {"greater", '>'},
                     {"above", '>'}, {"exceeding", '>'}, {"less", '<'},
                     {"under", '<'}, {"below", '<'}, {"fewer", '<'}};
    return r;
  }();
  return rules;
}

CueRules load_cue_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cue rule file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  CueRules r;
  r.version = doc.value("version", 1);
  r.window_tokens = doc.value("window_tokens", 3);
  const nlohmann::json time = doc.value("time", nlohmann::json::object());
  for (const auto& [word, op] : time.items())
    r.time_cues.emplace_back(word, op.get<std::string>().at(0));
  const nlohmann::json number = doc.value("number", nlohmann::json::object());
  for (const auto& [word, op] : number.items())
    r.number_cues.emplace_back(word, op.get<std::string>().at(0));
  return r;
}

std::vector<TimeMention> extract_times(const std::string& question,
                                       const CueRules& rules) {
  std::vector<TimeMention> out;
  for (const auto& raw : raw_time_mentions(question)) {
    if (!raw.is_date && (raw.year < 1900 || raw.year > 2099)) continue;
    TimeMention m;
    m.begin = raw.begin;
    m.end = raw.end;
    m.is_date = raw.is_date;
    m.date = raw.date;
    m.year = raw.year;
    m.op = op_hint(question, raw.begin, rules.time_cues, rules.window_tokens);
    out.push_back(m);
  }
  return out;
}

std::vector<NumberMention> extract_numbers(const std::string& question,
                                           const CueRules& rules) {
  auto times = extract_times(question, rules);
  auto claimed = [&](size_t begin, size_t end) {
    for (const auto& t : times)
      if (begin < t.end && t.begin < end) return true;
    return false;
  };

  std::vector<NumberMention> out;
  static const std::regex number(R"((\d+(?:\.\d+)?))");
  auto it = std::sregex_iterator(question.begin(), question.end(), number);
  for (; it != std::sregex_iterator(); ++it) {
    const std::smatch& m = *it;
    size_t begin = static_cast<size_t>(m.position(1));
    size_t end = begin + static_cast<size_t>(m.length(1));
    // must not continue a larger token (e.g. the tail of "2022-037")
    if (begin > 0) {
      unsigned char prev = static_cast<unsigned char>(question[begin - 1]);
      if (std::isdigit(prev) || prev == '.') continue;
    }
    if (end < question.size() &&
        (std::isdigit(static_cast<unsigned char>(question[end])) ||
         question[end] == '.'))
      continue;
    if (claimed(begin, end)) continue;

    NumberMention n;
    n.begin = begin;
    n.end = end;
    std::from_chars(question.data() + begin, question.data() + end, n.value);
    // unit: a letter word or symbol immediately following the literal
    size_t upos = end;
    if (upos < question.size() && question[upos] == ' ') ++upos;
    size_t ustart = upos;
    while (upos < question.size() &&
           (std::isalpha(static_cast<unsigned char>(question[upos])) ||
            question[upos] == '%'))
      ++upos;
    if (upos > ustart && (ustart == end || ustart == end + 1)) {
      std::string word = question.substr(ustart, upos - ustart);
      static const std::vector<std::string> stop = {
          "of", "and", "or", "the", "a", "an", "in", "on", "at", "is",
          "are", "with", "than", "to", "for", "have", "has", "that",
          "which", "what", "how", "objects", "entities", "satellites"};
      if (std::find(stop.begin(), stop.end(), to_lower(word)) == stop.end())
        n.unit = word;
    }
    n.op = op_hint(question, begin, rules.number_cues, rules.window_tokens);
    out.push_back(n);
  }
  return out;
}

}  // namespace koplqa
