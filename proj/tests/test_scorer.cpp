#include <cmath>
#include <random>

#include "doctest.h"
#include "koplqa/scorer.hpp"

using namespace koplqa;

TEST_CASE("softmax matches the worked example to four decimals") {
  std::vector<double> raw = {2.0, 1.0, 0.0};
  auto p = softmax(raw);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == doctest::Approx(0.6652).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.2447).epsilon(1e-4));
  CHECK(p[2] == doctest::Approx(0.0900).epsilon(1e-4));
}

TEST_CASE("softmax normalizes and is shift invariant") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-50.0, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> raw(97);
    for (auto& v : raw) v = dist(rng);
    auto p = softmax(raw);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);

    double shift = dist(rng);
    std::vector<double> shifted = raw;
    for (auto& v : shifted) v += shift;
    auto q = softmax(shifted);
    for (size_t i = 0; i < p.size(); ++i)
      CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-9));
  }
}

TEST_CASE("softmax stays finite under extreme scores") {
  std::vector<double> raw = {1000.0, 999.0, -1000.0};
  auto p = softmax(raw);
  double sum = 0.0;
  for (double v : p) {
    CHECK(std::isfinite(v));
    sum += v;
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("trigram cosine basics") {
  CHECK(trigram_cosine("inclination", "inclination") == doctest::Approx(1.0));
  CHECK(trigram_cosine("inclination", "Inclination") == doctest::Approx(1.0));
  CHECK(trigram_cosine("abcdef", "xyzuvw") == doctest::Approx(0.0));
  CHECK(trigram_cosine("", "anything") == doctest::Approx(0.0));
  double ab = trigram_cosine("rocket body", "rocket debris");
  CHECK(ab == doctest::Approx(trigram_cosine("rocket debris", "rocket body")));
  CHECK(ab > 0.0);
  CHECK(ab < 1.0);
  // short strings fall back to a single key
  CHECK(trigram_cosine("ab", "ab") == doctest::Approx(1.0));
  CHECK(trigram_cosine("ab", "cd") == doctest::Approx(0.0));
}

TEST_CASE("trigram scorer adds the exact-substring bonus") {
  TrigramScorer scorer;
  std::vector<Candidate> pool = {
      {"mass", "mass", CandidateKind::Attribute},
      {"height", "height", CandidateKind::Attribute},
  };
  auto raw = scorer.score("what is the mass of Saturn V", pool);
  REQUIRE(raw.size() == 2);
  CHECK(raw[0] > raw[1] + 0.4);  // bonus dominates
  CHECK(scorer.thread_safe());
}
