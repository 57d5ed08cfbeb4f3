#pragma once

#include "skeap/heap/element.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace skeap::consistency {

enum class OpKind : std::uint8_t { insert, deletemin };

struct OperationRecord {
    NodeId node = 0;
    std::uint64_t seq = 0;
    OpKind kind = OpKind::insert;
    Element element;                  // inserts only
    std::optional<Element> returned;  // deletes only; nullopt is bottom
    std::uint64_t serial_index = 0;
    // Protocol-level assignment, informational: (priority, position) or bottom.
    bool assigned_bottom = false;
    std::uint64_t assigned_priority = 0;
    std::uint64_t assigned_position = 0;
    std::uint64_t epoch = 0;
};

// How the sequential heap breaks ties between equal priorities.
enum class TiePolicy : std::uint8_t {
    element_order,    // by the element's tiebreaker
    insertion_order,  // first inserted (in the serial order) leaves first
};

struct History {
    TiePolicy tie_policy = TiePolicy::element_order;
    std::vector<OperationRecord> records;
};

}  // namespace skeap::consistency
