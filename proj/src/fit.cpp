#include "skeap/experiment/fit.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace skeap::experiment {

LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("x and y differ in length");
    if (std::set<double>(xs.begin(), xs.end()).size() < 3) {
        throw std::invalid_argument("need at least three distinct x values to fit");
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    LinearFit f;
    f.points = xs.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (f.slope * xs[i] + f.intercept);
        ss_res += e * e;
    }
    f.r2 = syy == 0 ? 1.0 : std::max(0.0, 1.0 - ss_res / syy);
    return f;
}

}  // namespace skeap::experiment
