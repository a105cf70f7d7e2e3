#include "koplqa/scorer.hpp"

#include <algorithm>
#include <cmath>

namespace koplqa {

TrigramProfile TrigramProfile::build(const std::string& text) {
  std::string s = to_lower(text);
  std::vector<uint32_t> keys;
  if (s.size() < 3) {
    uint32_t k = 0;
    for (char c : s) k = (k << 8) | static_cast<unsigned char>(c);
    if (!s.empty()) keys.push_back(k);
  } else {
    keys.reserve(s.size() - 2);
    for (size_t i = 0; i + 3 <= s.size(); ++i) {
      uint32_t k = (static_cast<uint32_t>(static_cast<unsigned char>(s[i])) << 16) |
                   (static_cast<uint32_t>(static_cast<unsigned char>(s[i + 1])) << 8) |
                   static_cast<uint32_t>(static_cast<unsigned char>(s[i + 2]));
      keys.push_back(k);
    }
  }
  std::sort(keys.begin(), keys.end());
  TrigramProfile p;
  for (size_t i = 0; i < keys.size();) {
    size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    p.entries.emplace_back(keys[i], static_cast<float>(j - i));
    i = j;
  }
  double sq = 0.0;
  for (const auto& [_, c] : p.entries) sq += static_cast<double>(c) * c;
  p.norm = std::sqrt(sq);
  return p;
}

double trigram_cosine(const TrigramProfile& a, const TrigramProfile& b) {
  if (a.entries.empty() || b.entries.empty()) return 0.0;
  double dot = 0.0;
  size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    if (a.entries[i].first < b.entries[j].first) ++i;
    else if (a.entries[i].first > b.entries[j].first) ++j;
    else dot += static_cast<double>(a.entries[i++].second) * b.entries[j++].second;
  }
  return dot / (a.norm * b.norm);
}

double trigram_cosine(const std::string& a, const std::string& b) {
  return trigram_cosine(TrigramProfile::build(a), TrigramProfile::build(b));
}

std::vector<double> softmax(std::span<const double> raw) {
  std::vector<double> out(raw.size());
  if (raw.empty()) return out;
  double mx = *std::max_element(raw.begin(), raw.end());
  double sum = 0.0;
  for (size_t i = 0; i < raw.size(); ++i) {
    out[i] = std::exp(raw[i] - mx);
    sum += out[i];
  }
  for (auto& p : out) p /= sum;
  return out;
}

std::vector<double> TrigramScorer::score(const std::string& context,
                                         const std::vector<Candidate>& candidates) const {
  TrigramProfile ctx = TrigramProfile::build(context);
  std::string lower_ctx = to_lower(context);
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    double s = trigram_cosine(ctx, TrigramProfile::build(c.label));
    if (!c.label.empty() && lower_ctx.find(to_lower(c.label)) != std::string::npos)
      s += 0.5;
    out.push_back(s);
  }
  return out;
}

}  // namespace koplqa
