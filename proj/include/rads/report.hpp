#pragma once

// CSV and JSON export of transfer reports.

#include <span>
#include <string>

#include "rads/harness.hpp"

namespace rads::report {

// Header: policy,budget,budget_used,seed,src_acc,src_f1,src_precision,
// src_recall,src_auc,tgt_acc,...,tgt_auc,delta_f1,ci_low,ci_high.
// An undefined ROC-AUC is written as an empty field.
std::string csv_header();
std::string csv_row(const harness::TransferReport& r);
std::string to_csv(std::span<const harness::TransferReport> rows);

// Array of objects with the CSV fields, nested per-domain metrics and the
// selected ids.
std::string to_json(std::span<const harness::TransferReport> rows, int indent = 2);

}  // namespace rads::report
