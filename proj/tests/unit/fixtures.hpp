#pragma once

#include <string>

#include "hierdx/knowledge_base.hpp"

namespace hierdx::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(HIERDX_FIXTURES) + "/" + name;
}

inline const KnowledgeBase& paper_kb() {
  static const KnowledgeBase kb = load_kb_file(fixture_path("paper_y1.json"));
  return kb;
}

// Inputs X1..X5 = (0,1,1,1,1); golden outputs (Y1, Y2) = (0, 1).
inline NetValues paper_inputs() { return parse_input_vector(paper_kb(), "0,1,1,1,1"); }

}  // namespace hierdx::testing
