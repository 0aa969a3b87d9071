#pragma once

// Shared generators and oracles for the test suites. Everything here is
// deliberately independent of the library's internals: loops instead of
// Eigen expressions, own RNG mapping, hand-rolled Box-Muller.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gafs/data.hpp"
#include "gafs/types.hpp"

namespace testsupport {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double normal(std::mt19937_64& rng) {
    // Box-Muller; discards the second variate for simplicity.
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Synthetic feature-recovery instance: `informative` of the `dims` features
/// carry a 3-cluster Gaussian structure, the rest are uniform noise. Cluster
/// means sit at 0, shift and 2*shift on every informative dim (unit variance,
/// pairwise center distances shift*sqrt(ninf) and 2*shift*sqrt(ninf), at
/// least 4 sigma apart for any shift >= 1.3 at ninf = 10). Cluster sizes are
/// imbalanced 3:2:1.
struct SyntheticData {
    gafs::DataMatrix data;             // dims x samples, raw (unscaled)
    std::vector<int> labels;           // 1..3
    std::vector<int> informative;      // 0-based feature indices, sorted
};

inline SyntheticData make_synthetic(std::uint64_t seed, int dims = 100, int informative_count = 10,
                                    int samples = 300, double shift = 3.5) {
    std::mt19937_64 rng(seed);
    SyntheticData out;

    // Pick the informative feature positions without replacement.
    std::vector<int> all(dims);
    for (int i = 0; i < dims; ++i) all[i] = i;
    for (int i = 0; i < informative_count; ++i) {
        const int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(dims - i));
        std::swap(all[i], all[j]);
    }
    out.informative.assign(all.begin(), all.begin() + informative_count);
    std::sort(out.informative.begin(), out.informative.end());

    const int size1 = samples / 2;
    const int size2 = samples / 3;

    out.data.values.resize(dims, samples);
    out.labels.resize(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        const int cluster = s < size1 ? 0 : (s < size1 + size2 ? 1 : 2);
        out.labels[static_cast<std::size_t>(s)] = cluster + 1;
        for (int f = 0; f < dims; ++f) out.data.values(f, s) = uniform01(rng);
        for (int q = 0; q < informative_count; ++q) {
            out.data.values(out.informative[static_cast<std::size_t>(q)], s) =
                shift * cluster + normal(rng);
        }
    }
    return out;
}

inline int count_informative_in_top(const std::vector<int>& top, const std::vector<int>& informative) {
    int hits = 0;
    for (int f : top) {
        for (int g : informative) {
            if (f == g) {
                ++hits;
                break;
            }
        }
    }
    return hits;
}

}  // namespace testsupport
