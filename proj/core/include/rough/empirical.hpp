// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace rough {

/// Sorted samples plus the number of excluded (singular or capped) draws.
struct EmpiricalDist {
    std::vector<double> samples;
    std::size_t excluded = 0;
    std::uint64_t seed = 0;

    EmpiricalDist() = default;
    explicit EmpiricalDist(std::vector<double> s, std::size_t excl = 0, std::uint64_t sd = 0)
        : samples(std::move(s)), excluded(excl), seed(sd) {
        std::sort(samples.begin(), samples.end());
    }

    std::size_t size() const { return samples.size(); }
    double excluded_fraction() const {
        const std::size_t total = samples.size() + excluded;
        return total ? static_cast<double>(excluded) / static_cast<double>(total) : 0.0;
    }
    /// Fraction of samples within tol of value.
    double mass_near(double value, double tol) const {
        auto lo = std::lower_bound(samples.begin(), samples.end(), value - tol);
        auto hi = std::upper_bound(samples.begin(), samples.end(), value + tol);
        return samples.empty() ? 0.0 : static_cast<double>(hi - lo) / static_cast<double>(samples.size());
    }
};

}  // namespace rough
