#pragma once

// JSON Lines score files: one object per sample,
//   {"id": "<string>", "probs": [[p11,...,p1C], ..., [pK1,...,pKC]]}
// Rows are probabilities (not logits). Loading enforces the ScorePool
// invariants and reports the 1-based line of the first violation.

#include <filesystem>
#include <istream>
#include <string>

#include "rads/signals.hpp"

namespace rads {

ScorePool parse_score_lines(std::istream& in);
ScorePool load_score_file(const std::filesystem::path& path);

std::string to_jsonl(const ScorePool& pool);
void write_score_file(const std::filesystem::path& path, const ScorePool& pool);

}  // namespace rads
