#pragma once

#include "skeap/consistency/history.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>

namespace skeap::consistency {

nlohmann::json to_json(const OperationRecord& r);
OperationRecord record_from_json(const nlohmann::json& j);

// JSONL: an optional header line {"tie_policy": ...} followed by one record per line.
void write_history(std::ostream& out, const History& h);
History read_history(std::istream& in);

}  // namespace skeap::consistency
