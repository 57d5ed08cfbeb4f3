#pragma once

#include <cmath>
#include <cstdint>

namespace skeap::ldb {

// Labels and keys are 64-bit binary fractions of [0,1): value / 2^64.
using Label = std::uint64_t;

constexpr Label half_bit = Label{1} << 63;

constexpr Label left_label(Label middle) noexcept { return middle >> 1; }
constexpr Label right_label(Label middle) noexcept { return (middle >> 1) | half_bit; }

// One de Bruijn step: prepend bit b to the binary expansion.
constexpr Label prepend_bit(unsigned b, Label w) noexcept { return (b ? half_bit : 0) | (w >> 1); }

inline double label_to_real(Label x) noexcept { return std::ldexp(static_cast<double>(x), -64); }

inline Label label_from_real(double x) {
    if (!(x >= 0.0 && x < 1.0)) return 0;
    return static_cast<Label>(std::ldexp(x, 64));
}

}  // namespace skeap::ldb
