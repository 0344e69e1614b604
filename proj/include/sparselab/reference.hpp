#pragma once

#include <cstdint>
#include <vector>

#include "collections.hpp"
#include "operators.hpp"
#include "space.hpp"

namespace sparselab {

// ===========================================================================
// Direct-from-definition evaluators.  Deliberately naive: every cell asks
// every set whether it belongs and recomputes averages by plain summation,
// sharing no accumulation machinery with the operational implementations.
// Meant for exact (rational) cross-checks on small spaces.
// ===========================================================================

template <class S>
S brute_average(const MeasSet& set, const CellFunction<S>& f) {
    S acc(0);
    for (std::int64_t c = set.min_cell(); c <= set.max_cell(); ++c)
        if (set.contains_cell(c)) acc += abs_of<S>(f[c]);
    return acc / S(set.cell_count());
}

template <class S>
CellFunction<S> brute_sparse(const DyadicSpace& sp, const std::vector<MeasSet>& sets,
                             const CellFunction<S>& f) {
    CellFunction<S> out = CellFunction<S>::zero(sp);
    for (std::int64_t c = 0; c < sp.cell_count(); ++c) {
        S acc(0);
        for (const auto& set : sets)
            if (set.contains_cell(c)) acc += brute_average(set, f);
        out[c] = acc;
    }
    return out;
}

template <class S>
CellFunction<S> brute_maximal(const DyadicSpace& sp, const std::vector<MeasSet>& sets,
                              const CellFunction<S>& f) {
    CellFunction<S> out = CellFunction<S>::zero(sp);
    for (std::int64_t c = 0; c < sp.cell_count(); ++c) {
        S best(0);
        for (const auto& set : sets)
            if (set.contains_cell(c)) {
                const S a = brute_average(set, f);
                if (a > best) best = a;
            }
        out[c] = best;
    }
    return out;
}

template <class S>
CellFunction<S> brute_max_sparse(const std::vector<SparseCollection>& members,
                                 const CellFunction<S>& f) {
    const DyadicSpace& sp = members.front().space();
    CellFunction<S> out = CellFunction<S>::zero(sp);
    for (std::int64_t c = 0; c < sp.cell_count(); ++c) {
        S best(0);
        for (const auto& col : members) {
            S acc(0);
            for (const auto& set : col.sets())
                if (set.contains_cell(c)) acc += brute_average(set, f);
            if (acc > best) best = acc;
        }
        out[c] = best;
    }
    return out;
}

/// Σ ⟨f⟩_R^α 1_{G(R)} with an integer α, before the 1/α root.
template <class S>
CellFunction<S> brute_alpha_power_sum(const AlphaSpec& spec, const CellFunction<S>& f,
                                      int alpha) {
    const DyadicSpace& sp = spec.sources.space();
    CellFunction<S> out = CellFunction<S>::zero(sp);
    for (std::int64_t c = 0; c < sp.cell_count(); ++c) {
        S acc(0);
        for (std::size_t i = 0; i < spec.targets.size(); ++i)
            if (spec.targets[i].contains_cell(c)) {
                const S a = brute_average(spec.sources.set(i), f);
                S pw(1);
                for (int k = 0; k < alpha; ++k) pw *= a;
                acc += pw;
            }
        out[c] = acc;
    }
    return out;
}

/// Membership count per cell; strict subsets of R0 when given, all members
/// otherwise.
inline CellFunction<double> brute_overlap(const SparseCollection& col,
                                          const std::optional<MeasSet>& R0 = std::nullopt) {
    const DyadicSpace& sp = col.space();
    CellFunction<double> out = CellFunction<double>::zero(sp);
    for (std::int64_t c = 0; c < sp.cell_count(); ++c) {
        int n = 0;
        for (const auto& s : col.sets()) {
            if (R0 && !(s != *R0 && s.subset_of(*R0))) continue;
            if (s.contains_cell(c)) ++n;
        }
        out[c] = n;
    }
    return out;
}

} // namespace sparselab
