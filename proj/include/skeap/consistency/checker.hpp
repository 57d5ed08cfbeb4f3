#pragma once

#include "skeap/consistency/history.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace skeap::consistency {

// An order is a permutation of record indices.
using Order = std::vector<std::size_t>;

struct OracleResult {
    std::vector<std::optional<Element>> returned;             // by record index, deletes only
    std::vector<std::pair<std::size_t, std::size_t>> matching;  // (insert record, delete record)
};

OracleResult sequential_oracle(const History& h, std::span<const std::size_t> order);

struct CheckResult {
    bool pass = true;
    std::string violation;
    std::vector<std::size_t> records;  // offending records, earliest first

    explicit operator bool() const noexcept { return pass; }
};

CheckResult check_serializable(const History& h, std::span<const std::size_t> order);
CheckResult check_local_consistency(const History& h, std::span<const std::size_t> order);
CheckResult check_heap_consistency(const History& h, std::span<const std::size_t> order);

// Records sorted by serial_index; throws if two records share an index.
Order serial_order(const History& h);

// Exhaustive search over orders (at most `max_ops` records) for one that is serializable and
// heap consistent, and locally consistent if requested.
std::optional<Order> brute_force_order(const History& h, bool require_local = false, std::size_t max_ops = 10);

struct Verdict {
    bool serializable = false;
    bool locally_consistent = false;
    bool heap_consistent = false;
    std::string violation;
};

Verdict evaluate(const History& h, std::span<const std::size_t> order);
nlohmann::json to_json(const Verdict& v);

}  // namespace skeap::consistency
