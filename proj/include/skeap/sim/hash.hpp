#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace skeap::sim {

// Domain tags keep the different uses of the public hash function apart.
enum class HashDomain : std::uint32_t {
    label = 1,
    position_key = 2,
    random_key = 3,
    sort_position = 4,
    sort_pair = 5,
    sample = 6,
    workload = 7,
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Full 64-bit output, read as the binary fraction 0.b1b2...b64 in [0,1).
std::uint64_t hash_bits(std::uint32_t tag, std::span<const std::uint64_t> inputs, std::uint64_t seed) noexcept;

inline std::uint64_t hash_bits(HashDomain tag, std::initializer_list<std::uint64_t> inputs, std::uint64_t seed) noexcept {
    return hash_bits(static_cast<std::uint32_t>(tag), std::span(inputs.begin(), inputs.size()), seed);
}

/// Maps the top 53 bits to a double in [0,1).
double to_unit(std::uint64_t bits) noexcept;

double hash_unit(std::uint32_t tag, std::span<const std::uint64_t> inputs, std::uint64_t seed) noexcept;

inline double hash_unit(HashDomain tag, std::initializer_list<std::uint64_t> inputs, std::uint64_t seed) noexcept {
    return hash_unit(static_cast<std::uint32_t>(tag), std::span(inputs.begin(), inputs.size()), seed);
}

/// Pair hash with h(i,j) = h(j,i): the pair is canonicalized to (min,max) first.
std::uint64_t hash_bits_symmetric(std::uint32_t tag, std::uint64_t i, std::uint64_t j, std::uint64_t seed) noexcept;
double hash_unit_symmetric(std::uint32_t tag, std::uint64_t i, std::uint64_t j, std::uint64_t seed) noexcept;

}  // namespace skeap::sim
