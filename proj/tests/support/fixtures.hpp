#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "koplqa/kb.hpp"

namespace testsup {

inline std::string fixture_path(const std::string& name) {
  return std::string(KOPLQA_FIXTURE_DIR "/") + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const koplqa::KnowledgeBase& fixture_kb() {
  static const koplqa::KnowledgeBase kb =
      koplqa::KnowledgeBase::load_file(fixture_path("mini_space.json"));
  return kb;
}

}  // namespace testsup
