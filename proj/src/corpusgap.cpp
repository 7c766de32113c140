#include "rads/corpusgap.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rads/error.hpp"
#include "rads/io.hpp"

namespace rads::corpusgap {

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

std::size_t shared_keys(const NgramVocab& a, const NgramVocab& b) {
  const NgramVocab& small = a.counts.size() <= b.counts.size() ? a : b;
  const NgramVocab& large = &small == &a ? b : a;
  std::size_t n = 0;
  for (const auto& [key, count] : small.counts) n += large.counts.count(key);
  return n;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

NgramVocab extract_vocab(const std::vector<std::string>& documents, int max_n,
                         std::string corpus_id) {
  if (max_n != 1 && max_n != 2) throw ParameterError("extract_vocab: max_n must be 1 or 2");
  NgramVocab vocab;
  vocab.corpus_id = std::move(corpus_id);
  for (const auto& doc : documents) {
    const auto tokens = tokenize(doc);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      ++vocab.counts[tokens[i]];
      if (max_n == 2 && i + 1 < tokens.size()) ++vocab.counts[tokens[i] + " " + tokens[i + 1]];
    }
  }
  return vocab;
}

double coverage(const NgramVocab& target, const NgramVocab& source) {
  if (target.empty()) throw ParameterError("coverage: empty target vocabulary");
  return static_cast<double>(shared_keys(target, source)) /
         static_cast<double>(target.counts.size());
}

double jaccard(const NgramVocab& a, const NgramVocab& b) {
  const std::size_t inter = shared_keys(a, b);
  const std::size_t uni = a.counts.size() + b.counts.size() - inter;
  if (uni == 0) throw ParameterError("jaccard: both vocabularies are empty");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double kl_divergence(const NgramVocab& p, const NgramVocab& q, const KlConfig& cfg) {
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) {
    throw ParameterError("kl_divergence: epsilon must be positive");
  }
  std::set<std::string_view> vocab;
  double total_p = 0.0;
  double total_q = 0.0;
  for (const auto& [key, count] : p.counts) {
    vocab.insert(key);
    total_p += static_cast<double>(count);
  }
  for (const auto& [key, count] : q.counts) {
    vocab.insert(key);
    total_q += static_cast<double>(count);
  }
  if (vocab.empty()) throw ParameterError("kl_divergence: empty union vocabulary");

  const double eps = cfg.epsilon;
  const double size = static_cast<double>(vocab.size());
  const double norm_p = total_p + eps * size;
  const double norm_q = total_q + eps * size;
  auto count_of = [](const NgramVocab& v, std::string_view key) {
    const auto it = v.counts.find(std::string(key));
    return it == v.counts.end() ? 0.0 : static_cast<double>(it->second);
  };
  double kl = 0.0;
  for (const auto key : vocab) {
    const double pv = (count_of(p, key) + eps) / norm_p;
    const double qv = (count_of(q, key) + eps) / norm_q;
    kl += pv * std::log(pv / qv);
  }
  // Rounding can leave a tiny negative residue for P == Q.
  return std::max(0.0, kl);
}

std::vector<TermScore> tfidf_top(const std::vector<std::string>& documents, int k) {
  if (documents.empty()) throw ParameterError("tfidf_top: empty corpus");
  if (k < 1) throw ParameterError("tfidf_top: k must be >= 1");

  std::map<std::string, std::int64_t> tf;
  std::map<std::string, std::int64_t> df;
  for (const auto& doc : documents) {
    std::set<std::string> seen;
    for (auto& tok : tokenize(doc)) {
      ++tf[tok];
      seen.insert(std::move(tok));
    }
    for (const auto& tok : seen) ++df[tok];
  }
  const double n = static_cast<double>(documents.size());
  std::vector<TermScore> scores;
  scores.reserve(tf.size());
  for (const auto& [term, count] : tf) {
    const double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(df[term]))) + 1.0;
    scores.push_back({term, static_cast<double>(count) * idf});
  }
  std::stable_sort(scores.begin(), scores.end(), [](const TermScore& a, const TermScore& b) {
    return a.score > b.score;
  });
  if (scores.size() > static_cast<std::size_t>(k)) scores.resize(static_cast<std::size_t>(k));
  return scores;
}

GapReport compare(const std::vector<std::string>& corpus_a,
                  const std::vector<std::string>& corpus_b, const GapConfig& cfg) {
  const NgramVocab a = extract_vocab(corpus_a, cfg.max_n, "a");
  const NgramVocab b = extract_vocab(corpus_b, cfg.max_n, "b");
  GapReport r;
  r.coverage_ab = coverage(b, a);
  r.coverage_ba = coverage(a, b);
  r.jaccard = jaccard(a, b);
  r.kl_ab = kl_divergence(a, b, cfg.kl);
  r.kl_ba = kl_divergence(b, a, cfg.kl);
  r.tfidf_top_a = tfidf_top(corpus_a, cfg.top_k);
  r.tfidf_top_b = tfidf_top(corpus_b, cfg.top_k);
  return r;
}

std::string to_json(const GapReport& report, int indent) {
  using nlohmann::ordered_json;
  auto terms = [](const std::vector<TermScore>& list) {
    ordered_json out = ordered_json::array();
    for (const auto& t : list) out.push_back({{"term", t.term}, {"score", t.score}});
    return out;
  };
  ordered_json j;
  j["coverage_ab"] = report.coverage_ab;
  j["coverage_ba"] = report.coverage_ba;
  j["jaccard"] = report.jaccard;
  j["kl_ab"] = report.kl_ab;
  j["kl_ba"] = report.kl_ba;
  j["tfidf_top_a"] = terms(report.tfidf_top_a);
  j["tfidf_top_b"] = terms(report.tfidf_top_b);
  return j.dump(indent) + "\n";
}

std::vector<std::string> load_corpus(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<std::string> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back(io::read_file(f));
    return docs;
  }
  std::istringstream in(io::read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ": line " + std::to_string(line_no) + ": ";
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw ValidationError(where + "malformed JSON");
    }
    if (!row.is_object() || !row.contains("text") || !row["text"].is_string()) {
      throw ValidationError(where + "expected an object with string field 'text'");
    }
    docs.push_back(row["text"].get<std::string>());
  }
  return docs;
}

}  // namespace rads::corpusgap
