#include "rads/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

namespace rads::report {

namespace {

std::string metric_fields(const harness::MetricRecord& m) {
  const std::string auc = m.roc_auc ? fmt::format("{}", *m.roc_auc) : std::string{};
  return fmt::format("{},{},{},{},{}", m.accuracy, m.f1, m.precision, m.recall, auc);
}

nlohmann::ordered_json metric_json(const harness::MetricRecord& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["f1"] = m.f1;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["roc_auc"] = m.roc_auc ? nlohmann::ordered_json(*m.roc_auc) : nlohmann::ordered_json();
  return j;
}

}  // namespace

std::string csv_header() {
  return "policy,budget,budget_used,seed,"
         "src_acc,src_f1,src_precision,src_recall,src_auc,"
         "tgt_acc,tgt_f1,tgt_precision,tgt_recall,tgt_auc,"
         "delta_f1,ci_low,ci_high";
}

std::string csv_row(const harness::TransferReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", r.policy, r.budget, r.budget_used, r.seed,
                     metric_fields(r.source), metric_fields(r.target), r.delta_f1,
                     r.ci_low, r.ci_high);
}

std::string to_csv(std::span<const harness::TransferReport> rows) {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) out += csv_row(r) + "\n";
  return out;
}

std::string to_json(std::span<const harness::TransferReport> rows, int indent) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["policy"] = r.policy;
    j["budget"] = r.budget;
    j["budget_used"] = r.budget_used;
    j["seed"] = r.seed;
    j["source"] = metric_json(r.source);
    j["target"] = metric_json(r.target);
    j["delta_f1"] = r.delta_f1;
    j["ci_low"] = r.ci_low;
    j["ci_high"] = r.ci_high;
    j["selected"] = r.selected;
    arr.push_back(std::move(j));
  }
  return arr.dump(indent) + "\n";
}

}  // namespace rads::report
