#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>

namespace skeap::sim {

/// Modeled encoding cost of a natural number: ceil(log2(max(v,2)+1)) bits.
constexpr std::uint64_t natural_bits(std::uint64_t v) noexcept {
    return static_cast<std::uint64_t>(std::bit_width(std::max<std::uint64_t>(v, 2)));
}

/// Accumulates the cost of a message field by field.
class BitCounter {
public:
    constexpr BitCounter& natural(std::uint64_t v) noexcept {
        total_ += natural_bits(v);
        return *this;
    }
    constexpr BitCounter& interval(std::uint64_t lo, std::uint64_t hi) noexcept {
        return natural(lo).natural(hi);
    }
    constexpr BitCounter& add(std::uint64_t bits) noexcept {
        total_ += bits;
        return *this;
    }
    constexpr std::uint64_t total() const noexcept { return total_; }

private:
    std::uint64_t total_ = 0;
};

}  // namespace skeap::sim
