#include "skeap/sim/hash.hpp"

#include <algorithm>

namespace skeap::sim {

std::uint64_t mix64(std::uint64_t x) noexcept {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_bits(std::uint32_t tag, std::span<const std::uint64_t> inputs, std::uint64_t seed) noexcept {
    std::uint64_t h = mix64(seed ^ (static_cast<std::uint64_t>(tag) * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ inputs.size());
    for (std::uint64_t x : inputs) {
        h = mix64(h ^ mix64(x));
    }
    return h;
}

double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double hash_unit(std::uint32_t tag, std::span<const std::uint64_t> inputs, std::uint64_t seed) noexcept {
    return to_unit(hash_bits(tag, inputs, seed));
}

std::uint64_t hash_bits_symmetric(std::uint32_t tag, std::uint64_t i, std::uint64_t j, std::uint64_t seed) noexcept {
    const std::uint64_t pair[2] = {std::min(i, j), std::max(i, j)};
    return hash_bits(tag, pair, seed);
}

double hash_unit_symmetric(std::uint32_t tag, std::uint64_t i, std::uint64_t j, std::uint64_t seed) noexcept {
    return to_unit(hash_bits_symmetric(tag, i, j, seed));
}

}  // namespace skeap::sim
