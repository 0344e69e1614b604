#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "collections.hpp"
#include "space.hpp"

namespace sparselab {

inline double log_plus(double n) { return std::max(1.0, std::log2(n)); }

// Partition of a collection by the size of the average ⟨f⟩_R against the
// base threshold t = δλ/log_+N: bucket 0 holds averages above t, bucket s ≥ 1
// holds averages in (t·2^{-s}, t·2^{-s+1}].  Sets with zero average land in
// a sentinel bucket and never take part in covering unions.
struct Stratification {
    static constexpr int kZeroBucket = std::numeric_limits<int>::max();

    double lambda = 0;
    double delta = 0;
    int n_families = 1;
    double c = 1.0 - 1.0 / std::sqrt(2.0); // covering-chain constant
    double threshold = 0;                  // t

    std::vector<double> averages;          // ⟨f⟩_R per set
    std::vector<int> bucket_of;            // per set; kZeroBucket for zero average
    std::vector<std::vector<int>> buckets; // s → set indices, zero bucket excluded
    int max_bucket = -1;
};

inline Stratification stratify_by_average(const SparseCollection& col,
                                          const CellFunction<double>& f,
                                          double lambda, double delta, int n_families) {
    if (!(lambda > 0)) throw std::domain_error("stratify: lambda must be positive");
    if (!(delta > 0 && delta < 1)) throw std::domain_error("stratify: delta in (0,1)");
    if (n_families < 1) throw std::domain_error("stratify: N must be >= 1");

    Stratification st;
    st.lambda = lambda;
    st.delta = delta;
    st.n_families = n_families;
    st.threshold = delta * lambda / log_plus(static_cast<double>(n_families));

    const std::size_t n = col.size();
    st.averages.resize(n);
    st.bucket_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = average(f, col.set(i));
        st.averages[i] = a;
        if (a == 0) {
            st.bucket_of[i] = Stratification::kZeroBucket;
            continue;
        }
        int s = 0;
        double gate = st.threshold; // bucket s ≥ 1 needs a ≤ t·2^{-s+1}
        while (a <= gate) {
            ++s;
            gate /= 2;
        }
        st.bucket_of[i] = s;
        if (s > st.max_bucket) st.max_bucket = s;
    }
    st.buckets.assign(static_cast<std::size_t>(st.max_bucket + 1), {});
    for (std::size_t i = 0; i < n; ++i)
        if (st.bucket_of[i] != Stratification::kZeroBucket)
            st.buckets[static_cast<std::size_t>(st.bucket_of[i])].push_back(
                static_cast<int>(i));
    return st;
}

} // namespace sparselab
