#pragma once

// Lexical divergence between two text corpora: n-gram type coverage, Jaccard
// similarity, smoothed KL divergence and TF-IDF term profiles.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rads::corpusgap {

// Lowercased tokens of `text`. ASCII letters and digits form tokens together
// with any byte >= 0x80, so UTF-8 sequences stay inside the word they occur in;
// every other byte separates tokens.
std::vector<std::string> tokenize(std::string_view text);

struct NgramVocab {
  std::string corpus_id;
  std::map<std::string, std::int64_t> counts;  // n-grams joined by one space

  bool empty() const { return counts.empty(); }
};

// Unigrams, plus bigrams within each document when max_n == 2.
NgramVocab extract_vocab(const std::vector<std::string>& documents, int max_n = 2,
                         std::string corpus_id = {});

// Share of target n-gram types also present in source.
double coverage(const NgramVocab& target, const NgramVocab& source);

double jaccard(const NgramVocab& a, const NgramVocab& b);

struct KlConfig {
  double epsilon = 1e-9;
};

// KL(P || Q) in nats, both distributions smoothed by epsilon over the union
// vocabulary.
double kl_divergence(const NgramVocab& p, const NgramVocab& q, const KlConfig& cfg = {});

struct TermScore {
  std::string term;
  double score = 0.0;
};

// Sum over documents of raw count times ln((1 + N) / (1 + df)) + 1, over
// unigram tokens. Highest first, equal scores in term order.
std::vector<TermScore> tfidf_top(const std::vector<std::string>& documents, int k);

struct GapReport {
  double coverage_ab = 0.0;  // share of b's n-grams found in a
  double coverage_ba = 0.0;  // share of a's n-grams found in b
  double jaccard = 0.0;
  double kl_ab = 0.0;
  double kl_ba = 0.0;
  std::vector<TermScore> tfidf_top_a;
  std::vector<TermScore> tfidf_top_b;
};

struct GapConfig {
  int max_n = 2;
  KlConfig kl;
  int top_k = 10;
};

GapReport compare(const std::vector<std::string>& corpus_a,
                  const std::vector<std::string>& corpus_b, const GapConfig& cfg = {});

std::string to_json(const GapReport& report, int indent = 2);

// A directory holds one UTF-8 document per regular file, read in file-name
// order; any other path is read as JSON lines of {"id", "text"}.
std::vector<std::string> load_corpus(const std::string& path);

}  // namespace rads::corpusgap
