#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "collections.hpp"
#include "stratify.hpp"

namespace sparselab {

// ===========================================================================
// Core kernels.  Averages are plain means over cells (uniform measure), so
// every kernel below works unchanged for double and for exact rationals.
// All per-cell accumulations add non-negative terms in a fixed order; in
// double this keeps outputs monotone in f and never below any single term,
// which the domination tests rely on.
// ===========================================================================

/// Λ_S f = Σ_S ⟨f⟩_S 1_S over the collection's sets, in family order.
template <class S>
CellFunction<S> apply_sparse(const SparseCollection& col, const CellFunction<S>& f) {
    CellFunction<S> out = CellFunction<S>::zero(f.space);
    for (std::size_t i = 0; i < col.size(); ++i) {
        const MeasSet& set = col.set(i);
        const S avg = average(f, set);
        for (const auto& r : set.ranges())
            for (std::int64_t c = r.begin; c < r.end; ++c)
                out.values[static_cast<std::size_t>(c)] += avg;
    }
    return out;
}

/// M_B f = sup_B ⟨f⟩_B 1_B over an arbitrary family (no laminarity needed).
template <class S>
CellFunction<S> apply_maximal(std::span<const MeasSet> family, const CellFunction<S>& f) {
    CellFunction<S> out = CellFunction<S>::zero(f.space);
    for (const MeasSet& set : family) {
        const S avg = average(f, set);
        for (const auto& r : set.ranges())
            for (std::int64_t c = r.begin; c < r.end; ++c) {
                auto& v = out.values[static_cast<std::size_t>(c)];
                if (avg > v) v = avg;
            }
    }
    return out;
}

// ===========================================================================
// Families of sparse collections and the maximal sparse operator
// ===========================================================================

class OperatorFamily {
public:
    explicit OperatorFamily(std::vector<SparseCollection> members)
        : members_(std::move(members)) {
        if (members_.empty())
            throw std::invalid_argument("OperatorFamily: at least one collection");
        std::vector<MeasSet> all;
        for (const auto& m : members_)
            all.insert(all.end(), m.sets().begin(), m.sets().end());
        union_sets_ = dedup_family(std::move(all));
    }

    const std::vector<SparseCollection>& members() const { return members_; }
    std::size_t count() const { return members_.size(); }
    const DyadicSpace& space() const { return members_.front().space(); }

    /// All distinct sets across the members (for the maximal function M_S).
    const std::vector<MeasSet>& union_sets() const { return union_sets_; }

private:
    std::vector<SparseCollection> members_;
    std::vector<MeasSet> union_sets_;
};

/// Λ_G f = max_k Λ_{S_k} f.
template <class S>
CellFunction<S> apply_max_sparse(const OperatorFamily& fam, const CellFunction<S>& f) {
    CellFunction<S> out = apply_sparse(fam.members().front(), f);
    for (std::size_t k = 1; k < fam.count(); ++k) {
        CellFunction<S> next = apply_sparse(fam.members()[k], f);
        for (std::size_t c = 0; c < out.values.size(); ++c)
            if (next.values[c] > out.values[c]) out.values[c] = next.values[c];
    }
    return out;
}

// ===========================================================================
// Generalized operator (Σ_R ⟨f⟩_R^α 1_{G(R)})^{1/α}
// ===========================================================================

/// Base collection plus a target set G(R) per member and the exponent α.
struct AlphaSpec {
    SparseCollection sources;
    std::vector<MeasSet> targets; // parallel to sources.sets(); G(R) ⊆ R
    double alpha = 1.0;

    static AlphaSpec identity(SparseCollection col, double alpha = 1.0) {
        AlphaSpec a;
        a.targets = col.sets();
        a.sources = std::move(col);
        a.alpha = alpha;
        return a;
    }

    void validate() const {
        if (targets.size() != sources.size())
            throw std::invalid_argument("AlphaSpec: one target per source");
        if (!(alpha > 0))
            throw std::invalid_argument("AlphaSpec: alpha must be positive");
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (targets[i].empty())
                throw std::invalid_argument("AlphaSpec: empty target");
            if (!targets[i].subset_of(sources.set(i)))
                throw std::invalid_argument("AlphaSpec: G(R) must sit inside R");
        }
    }
};

/// Σ_R ⟨f⟩_R^α 1_{G(R)} without the final root.  For rational scalars α must
/// be a positive integer so the sum stays exact.
template <class S>
CellFunction<S> alpha_power_sum(const AlphaSpec& spec, const CellFunction<S>& f) {
    const double a = spec.alpha;
    const bool integral = (a == std::floor(a)) && a >= 1;
    if constexpr (!std::is_same_v<S, double>) {
        if (!integral)
            throw std::domain_error("alpha_power_sum: exact path needs integer alpha");
    }
    CellFunction<S> out = CellFunction<S>::zero(f.space);
    for (std::size_t i = 0; i < spec.targets.size(); ++i) {
        const S avg = average(f, spec.sources.set(i));
        S term(0);
        if (a == 1.0)
            term = avg;
        else if (integral)
            term = int_pow(avg, static_cast<unsigned>(a));
        else if constexpr (std::is_same_v<S, double>)
            term = std::pow(avg, a);
        for (const auto& r : spec.targets[i].ranges())
            for (std::int64_t c = r.begin; c < r.end; ++c)
                out.values[static_cast<std::size_t>(c)] += term;
    }
    return out;
}

/// The rooted operator.  α = 1 skips both power and root, so with G = id it
/// reproduces apply_sparse bit for bit.
inline CellFunction<double> apply_alpha_sparse(const AlphaSpec& spec,
                                               const CellFunction<double>& f) {
    CellFunction<double> out = alpha_power_sum(spec, f);
    if (spec.alpha != 1.0)
        for (auto& v : out.values)
            if (v != 0.0) v = std::pow(v, 1.0 / spec.alpha);
    return out;
}

// ===========================================================================
// Overlap counting
// ===========================================================================

/// Σ 1_S counted over strict subsets of R_0 (R_0 must be a member); without
/// R_0 every member counts.  Integer-valued.
inline CellFunction<double> overlap_function(const SparseCollection& col,
                                             const std::optional<MeasSet>& R0 = std::nullopt) {
    const DyadicSpace& sp = col.space();
    if (R0 && !col.family().index_of(*R0))
        throw std::domain_error("overlap_function: R_0 is not a member");
    std::vector<std::int64_t> diff(static_cast<std::size_t>(sp.cell_count()) + 1, 0);
    for (std::size_t i = 0; i < col.size(); ++i) {
        const MeasSet& s = col.set(i);
        if (R0 && !(s != *R0 && s.subset_of(*R0))) continue;
        for (const auto& r : s.ranges()) {
            diff[static_cast<std::size_t>(r.begin)] += 1;
            diff[static_cast<std::size_t>(r.end)] -= 1;
        }
    }
    CellFunction<double> out = CellFunction<double>::zero(sp);
    std::int64_t run = 0;
    for (std::int64_t c = 0; c < sp.cell_count(); ++c) {
        run += diff[static_cast<std::size_t>(c)];
        out[c] = static_cast<double>(run);
    }
    return out;
}

// ===========================================================================
// Linearization of the max over collections
// ===========================================================================

/// E_k = cells where k is the lowest index attaining max_j Λ_{S_j} f.
struct LinearizationPartition {
    std::vector<int> index_of;    // per cell
    std::vector<MeasSet> regions; // per k (possibly empty sets)
};

template <class S>
LinearizationPartition linearize(const OperatorFamily& fam, const CellFunction<S>& f) {
    const std::int64_t cells = fam.space().cell_count();
    std::vector<CellFunction<S>> vals;
    vals.reserve(fam.count());
    for (const auto& m : fam.members()) vals.push_back(apply_sparse(m, f));

    LinearizationPartition part;
    part.index_of.assign(static_cast<std::size_t>(cells), 0);
    for (std::int64_t c = 0; c < cells; ++c) {
        int arg = 0;
        for (std::size_t k = 1; k < vals.size(); ++k)
            if (vals[k].values[static_cast<std::size_t>(c)] >
                vals[static_cast<std::size_t>(arg)].values[static_cast<std::size_t>(c)])
                arg = static_cast<int>(k);
        part.index_of[static_cast<std::size_t>(c)] = arg;
    }
    for (std::size_t k = 0; k < fam.count(); ++k) {
        std::vector<CellRange> runs;
        std::int64_t start = -1;
        for (std::int64_t c = 0; c < cells; ++c) {
            const bool in = part.index_of[static_cast<std::size_t>(c)] == static_cast<int>(k);
            if (in && start < 0) start = c;
            if (!in && start >= 0) {
                runs.push_back({start, c});
                start = -1;
            }
        }
        if (start >= 0) runs.push_back({start, cells});
        part.regions.push_back(MeasSet::from_ranges(std::move(runs)));
    }
    return part;
}

/// Σ_k Σ_{R∈S_k} ⟨f⟩_R 1_{E_k ∩ R}, accumulated exactly like apply_sparse so
/// the reconstruction identity holds bit for bit.
template <class S>
CellFunction<S> reconstruct_from_partition(const OperatorFamily& fam,
                                           const CellFunction<S>& f,
                                           const LinearizationPartition& part) {
    CellFunction<S> out = CellFunction<S>::zero(f.space);
    for (std::size_t k = 0; k < fam.count(); ++k) {
        const auto& col = fam.members()[k];
        for (std::size_t i = 0; i < col.size(); ++i) {
            const MeasSet& set = col.set(i);
            const S avg = average(f, set);
            for (const auto& r : set.ranges())
                for (std::int64_t c = r.begin; c < r.end; ++c)
                    if (part.index_of[static_cast<std::size_t>(c)] == static_cast<int>(k))
                        out.values[static_cast<std::size_t>(c)] += avg;
        }
    }
    return out;
}

// ===========================================================================
// Level-set covering chain
// ===========================================================================

/// Outcome of the covering check for {Λ_G f > λ}: the level set must lie in
/// the union of all bucket-0 sets with the high-multiplicity regions of the
/// buckets s ≥ 1.
struct LevelCoverReport {
    double lambda = 0;
    double delta = 0;
    double c = 1.0 - 1.0 / std::sqrt(2.0);
    std::int64_t level_cells = 0;
    std::int64_t uncovered_cells = 0;
    std::vector<std::int64_t> uncovered_sample; // at most 16 cell ids

    bool covered() const { return uncovered_cells == 0; }
};

inline LevelCoverReport verify_level_cover(const OperatorFamily& fam,
                                           const CellFunction<double>& f,
                                           double lambda, double delta) {
    if (!(lambda > 0)) throw std::domain_error("verify_level_cover: lambda > 0");
    if (!(delta > 0 && delta < 1)) throw std::domain_error("verify_level_cover: delta in (0,1)");

    LevelCoverReport rep;
    rep.lambda = lambda;
    rep.delta = delta;

    const std::int64_t cells = fam.space().cell_count();
    const double logN = log_plus(static_cast<double>(fam.count()));
    const CellFunction<double> lam = apply_max_sparse(fam, f);

    std::vector<char> covered(static_cast<std::size_t>(cells), 0);
    std::vector<std::int64_t> diff(static_cast<std::size_t>(cells) + 1, 0);
    for (const auto& col : fam.members()) {
        const Stratification st =
            stratify_by_average(col, f, lambda, delta, static_cast<int>(fam.count()));
        for (int s = 0; s <= st.max_bucket; ++s) {
            const auto& bucket = st.buckets[static_cast<std::size_t>(s)];
            if (bucket.empty()) continue;
            if (s == 0) {
                for (int i : bucket)
                    col.set(static_cast<std::size_t>(i)).for_each_cell([&](std::int64_t c) {
                        covered[static_cast<std::size_t>(c)] = 1;
                    });
                continue;
            }
            std::fill(diff.begin(), diff.end(), 0);
            for (int i : bucket)
                for (const auto& r : col.set(static_cast<std::size_t>(i)).ranges()) {
                    diff[static_cast<std::size_t>(r.begin)] += 1;
                    diff[static_cast<std::size_t>(r.end)] -= 1;
                }
            const double thr =
                rep.c * std::pow(2.0, 0.5 * s - 1.0) * logN / delta;
            std::int64_t run = 0;
            for (std::int64_t c = 0; c < cells; ++c) {
                run += diff[static_cast<std::size_t>(c)];
                if (static_cast<double>(run) > thr) covered[static_cast<std::size_t>(c)] = 1;
            }
        }
    }

    for (std::int64_t c = 0; c < cells; ++c) {
        if (!(lam[c] > lambda)) continue;
        ++rep.level_cells;
        if (!covered[static_cast<std::size_t>(c)]) {
            ++rep.uncovered_cells;
            if (rep.uncovered_sample.size() < 16) rep.uncovered_sample.push_back(c);
        }
    }
    return rep;
}

} // namespace sparselab
