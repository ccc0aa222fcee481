#pragma once

#include <cstddef>

namespace fpl {

// Pairwise (cascade) summation: O(log n) error growth and a fixed association
// order, so totals do not depend on how the inputs were produced in parallel.
inline double pairwise_sum(const double* a, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += a[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

template <class Vec> double pairwise_sum(const Vec& v) {
    return pairwise_sum(v.data(), v.size());
}

} // namespace fpl
