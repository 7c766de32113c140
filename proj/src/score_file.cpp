#include "rads/score_file.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "rads/error.hpp"
#include "rads/io.hpp"

namespace rads {

namespace {

using nlohmann::json;

ScoreEntry parse_entry(const std::string& text, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no) + ": ";
  json row;
  try {
    row = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(where + "malformed JSON (" + e.what() + ")");
  }
  if (!row.is_object()) throw ValidationError(where + "expected a JSON object");
  if (!row.contains("id") || !row["id"].is_string()) {
    throw ValidationError(where + "missing string field 'id'");
  }
  if (!row.contains("probs") || !row["probs"].is_array() || row["probs"].empty()) {
    throw ValidationError(where + "missing non-empty array field 'probs'");
  }
  const auto& probs = row["probs"];
  const std::size_t k = probs.size();
  if (!probs[0].is_array() || probs[0].size() < 2) {
    throw ValidationError(where + "each probs row must list at least 2 classes");
  }
  const std::size_t c = probs[0].size();
  ScoreEntry entry{row["id"].get<std::string>(),
                   Eigen::MatrixXd(static_cast<Eigen::Index>(k),
                                   static_cast<Eigen::Index>(c))};
  if (entry.id.empty()) throw ValidationError(where + "empty id");
  for (std::size_t r = 0; r < k; ++r) {
    const auto& prow = probs[r];
    if (!prow.is_array() || prow.size() != c) {
      throw ValidationError(where + "probs row " + std::to_string(r) +
                            " has inconsistent length");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!prow[j].is_number()) {
        throw ValidationError(where + "non-numeric probability in row " +
                              std::to_string(r));
      }
      const double p = prow[j].get<double>();
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw ValidationError(where + "probability outside [0,1] in row " +
                              std::to_string(r));
      }
      entry.probs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = p;
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw ValidationError(where + "probs row " + std::to_string(r) + " sums to " +
                            std::to_string(sum) + ", expected 1");
    }
  }
  return entry;
}

}  // namespace

ScorePool parse_score_lines(std::istream& in) {
  ScorePool pool;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ScoreEntry entry = parse_entry(line, line_no);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!pool.empty() && (entry.probs.rows() != pool.passes() ||
                          entry.probs.cols() != pool.classes())) {
      throw ValidationError(where + "shape " + std::to_string(entry.probs.rows()) +
                            "x" + std::to_string(entry.probs.cols()) +
                            " differs from earlier entries (" +
                            std::to_string(pool.passes()) + "x" +
                            std::to_string(pool.classes()) + ")");
    }
    if (!ids.insert(entry.id).second) {
      throw ValidationError(where + "duplicate id '" + entry.id + "'");
    }
    pool.entries.push_back(std::move(entry));
  }
  return pool;
}

ScorePool load_score_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open score file '" + path.string() + "'");
  try {
    return parse_score_lines(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string to_jsonl(const ScorePool& pool) {
  std::string out;
  for (const auto& e : pool.entries) {
    json probs = json::array();
    for (Eigen::Index r = 0; r < e.probs.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < e.probs.cols(); ++c) row.push_back(e.probs(r, c));
      probs.push_back(std::move(row));
    }
    json obj;
    obj["id"] = e.id;
    obj["probs"] = std::move(probs);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_score_file(const std::filesystem::path& path, const ScorePool& pool) {
  validate(pool);
  io::write_file_atomic(path, to_jsonl(pool));
}

}  // namespace rads
