#include "rads/selection.hpp"

#include <json.hpp>

#include "rads/error.hpp"

namespace rads {

std::string to_json(const SelectionResult& result, int indent) {
  nlohmann::ordered_json j;
  j["policy"] = result.policy;
  j["budget"] = result.budget;
  j["budget_used"] = result.budget_used();
  j["selected"] = result.selected;
  j["rewards"] = result.rewards;
  if (!result.episodes_return.empty()) j["episodes_return"] = result.episodes_return;
  return j.dump(indent) + "\n";
}

SelectionResult parse_selection(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SelectionResult r;
    r.policy = j.at("policy").get<std::string>();
    r.budget = j.at("budget").get<int>();
    r.selected = j.at("selected").get<std::vector<std::string>>();
    r.rewards = j.value("rewards", std::vector<double>{});
    r.episodes_return = j.value("episodes_return", std::vector<double>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed selection result: ") + e.what());
  }
}

}  // namespace rads
