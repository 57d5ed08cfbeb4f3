#pragma once

#include "skeap/sim/bits.hpp"
#include "skeap/sim/types.hpp"

#include <compare>
#include <cstdint>
#include <string>

namespace skeap {

// Heap element. (priority, origin, seq) is globally unique and defines the total order;
// the payload rides along and is not part of the modeled message size.
struct Element {
    std::uint64_t priority = 0;
    NodeId origin = 0;
    std::uint64_t seq = 0;
    std::uint64_t payload = 0;

    friend std::strong_ordering operator<=>(const Element& a, const Element& b) noexcept {
        if (auto c = a.priority <=> b.priority; c != 0) return c;
        if (auto c = a.origin <=> b.origin; c != 0) return c;
        return a.seq <=> b.seq;
    }
    friend bool operator==(const Element& a, const Element& b) noexcept {
        return a.priority == b.priority && a.origin == b.origin && a.seq == b.seq;
    }
};

inline std::uint64_t element_bits(const Element& e) noexcept {
    return sim::natural_bits(e.priority) + sim::natural_bits(e.origin) + sim::natural_bits(e.seq);
}

inline std::string to_string(const Element& e) {
    return "(" + std::to_string(e.priority) + "," + std::to_string(e.origin) + "," + std::to_string(e.seq) + ")";
}

}  // namespace skeap
