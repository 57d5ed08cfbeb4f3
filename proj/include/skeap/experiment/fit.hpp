#pragma once

#include <cstddef>
#include <span>

namespace skeap::experiment {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

// Ordinary least squares y = slope*x + intercept. Needs at least three distinct x values.
// A constant series has R^2 = 1 (nothing left unexplained).
LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys);

}  // namespace skeap::experiment
