#include "rads/signals.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "rads/error.hpp"

namespace rads {

void validate(const ScorePool& pool) {
  if (pool.empty()) return;
  const auto k = pool.entries[0].probs.rows();
  const auto c = pool.entries[0].probs.cols();
  if (k < 1 || c < 2) {
    throw ValidationError("entry 0: probs must have at least 1 row and 2 columns");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < pool.entries.size(); ++i) {
    const auto& e = pool.entries[i];
    const std::string where = "entry " + std::to_string(i) + " (id '" + e.id + "')";
    if (e.id.empty()) throw ValidationError(where + ": empty id");
    if (!seen.insert(e.id).second) throw ValidationError(where + ": duplicate id");
    if (e.probs.rows() != k || e.probs.cols() != c) {
      throw ValidationError(where + ": shape " + std::to_string(e.probs.rows()) +
                            "x" + std::to_string(e.probs.cols()) +
                            " differs from " + std::to_string(k) + "x" +
                            std::to_string(c));
    }
    for (Eigen::Index r = 0; r < k; ++r) {
      const auto row = e.probs.row(r);
      if (!row.allFinite()) {
        throw ValidationError(where + ": row " + std::to_string(r) + " not finite");
      }
      if (row.minCoeff() < 0.0 || row.maxCoeff() > 1.0) {
        throw ValidationError(where + ": row " + std::to_string(r) +
                              " has entries outside [0,1]");
      }
      const double s = row.sum();
      if (std::abs(s - 1.0) > kRowSumTolerance) {
        throw ValidationError(where + ": row " + std::to_string(r) + " sums to " +
                              std::to_string(s));
      }
    }
  }
}

double entropy(const Eigen::Ref<const Eigen::VectorXd>& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    h -= p(i) * std::log(std::max(p(i), kProbFloor));
  }
  return h;
}

MeanPrediction aggregate(const Eigen::MatrixXd& probs) {
  if (probs.rows() == 0 || probs.cols() == 0) {
    throw ParameterError("aggregate: empty probability matrix");
  }
  if (!probs.allFinite()) throw NumericError("aggregate: non-finite probability");
  MeanPrediction out;
  out.p_bar = probs.colwise().mean().transpose();
  out.l_bar = out.p_bar.unaryExpr([](double p) { return std::log(std::max(p, kProbFloor)); });
  return out;
}

Entropies entropies(const Eigen::MatrixXd& probs) {
  const MeanPrediction mean = aggregate(probs);
  Entropies out;
  out.pe = entropy(mean.p_bar);
  double ee = 0.0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    ee += entropy(probs.row(r).transpose());
  }
  out.ee = ee / static_cast<double>(probs.rows());
  out.mi = std::max(0.0, out.pe - out.ee);
  return out;
}

std::vector<double> normalize_mi(std::span<const double> mis) {
  if (mis.empty()) throw ParameterError("normalize_mi: empty vector");
  for (double v : mis) {
    if (!std::isfinite(v)) throw NumericError("normalize_mi: non-finite value");
  }
  const auto [lo_it, hi_it] = std::minmax_element(mis.begin(), mis.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<double> out(mis.size(), 0.0);
  if (range <= 1e-12) return out;
  for (std::size_t i = 0; i < mis.size(); ++i) out[i] = (mis[i] - lo) / range;
  return out;
}

PriorEstimate estimate_priors(std::span<const SignalRecord> records) {
  if (records.empty()) throw ParameterError("estimate_priors: empty pool");
  std::size_t positives = 0;
  for (const auto& r : records) positives += r.pseudo_label == 1 ? 1 : 0;
  PriorEstimate out;
  out.n_pool = records.size();
  out.pi_plus = static_cast<double>(positives) / static_cast<double>(records.size());
  out.pi_minus = 1.0 - out.pi_plus;
  return out;
}

int pseudo_label(const Eigen::VectorXd& p_bar) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p_bar.size(); ++i) {
    if (p_bar(i) > p_bar(best)) best = i;
  }
  return static_cast<int>(best);
}

std::vector<SignalRecord> build_signals(const ScorePool& pool) {
  validate(pool);
  std::vector<SignalRecord> out;
  out.reserve(pool.size());
  std::vector<double> mis;
  mis.reserve(pool.size());
  for (const auto& e : pool.entries) {
    MeanPrediction mean = aggregate(e.probs);
    const Entropies h = entropies(e.probs);
    SignalRecord r;
    r.id = e.id;
    r.pseudo_label = pseudo_label(mean.p_bar);
    r.p_bar = std::move(mean.p_bar);
    r.l_bar = std::move(mean.l_bar);
    r.pe = h.pe;
    r.ee = h.ee;
    r.mi = h.mi;
    mis.push_back(h.mi);
    out.push_back(std::move(r));
  }
  if (!out.empty()) {
    const auto norm = normalize_mi(mis);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].mi_norm = norm[i];
  }
  return out;
}

}  // namespace rads
