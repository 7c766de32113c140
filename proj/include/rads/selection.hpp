#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rads {

// Outcome of any selection policy, RL or baseline.
struct SelectionResult {
  std::string policy;
  int budget = 0;
  std::vector<std::string> selected;      // in selection order
  std::vector<double> rewards;            // one per accepted step (may be empty)
  std::vector<double> episodes_return;    // RL training trace (may be empty)

  int budget_used() const { return static_cast<int>(selected.size()); }
};

// {"policy","budget","budget_used","selected","rewards"[,"episodes_return"]}
std::string to_json(const SelectionResult& result, int indent = 2);
SelectionResult parse_selection(std::string_view text);

}  // namespace rads
