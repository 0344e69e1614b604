#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "collections.hpp"
#include "covers.hpp"
#include "operators.hpp"
#include "rng.hpp"
#include "space.hpp"

namespace sparselab {

// ===========================================================================
// Discrete directions as shears.  A direction of slope a/2^L displaces
// column x vertically by floor(a*x / 2^L) cells (wrapping mod 2^L), which
// keeps rasterized measures exact and families laminar.  Slopes steeper
// than 1 swap the roles of the axes instead of growing |a|.
// ===========================================================================

struct ShearDirection {
    std::int64_t shear = 0; // a in slope a/2^L
    bool axis_swapped = false;
    std::string label;
};

inline ShearDirection make_direction(const DyadicSpace& sp, std::int64_t shear,
                                     bool axis_swapped = false) {
    if (sp.dim != 2) throw std::domain_error("shear directions need a 2-D space");
    if (shear < -sp.cells_per_axis() || shear > sp.cells_per_axis())
        throw std::domain_error("shear slope out of range [-1, 1]");
    ShearDirection d;
    d.shear = shear;
    d.axis_swapped = axis_swapped;
    d.label = std::to_string(shear) + "/" + std::to_string(sp.cells_per_axis()) +
              (axis_swapped ? " (swapped)" : "");
    return d;
}

/// One-cell-high sheared rectangle: columns I = [col_begin, col_end), base
/// row `band`, one cell per column.
struct ShearRect {
    std::int64_t col_begin = 0;
    std::int64_t col_end = 0;
    std::int64_t band = 0;
};

inline MeasSet shear_rect_cells(const DyadicSpace& sp, const ShearDirection& dir,
                                const ShearRect& rect) {
    const std::int64_t n = sp.cells_per_axis();
    std::vector<CellRange> runs;
    runs.reserve(static_cast<std::size_t>(rect.col_end - rect.col_begin));
    for (std::int64_t t = rect.col_begin; t < rect.col_end; ++t) {
        const std::int64_t disp = detail::floor_div(dir.shear * t, n);
        const std::int64_t other = ((rect.band + disp) % n + n) % n;
        const std::int64_t cell =
            dir.axis_swapped ? other * n + t : t * n + other;
        runs.push_back({cell, cell + 1});
    }
    return MeasSet::from_ranges(std::move(runs));
}

/// A direction together with its rectangles: one tower of nested column
/// intervals per transverse band, bands pairwise disjoint.
struct ShearRectangleFamily {
    DyadicSpace space;
    ShearDirection direction;
    std::vector<ShearRect> rects;         // metadata, family order
    std::vector<SparseCollection> bands;  // per-band laminar collections
    SparseCollection merged;              // all bands as one laminar family
};

/// density ∈ (0, 1]: fraction of rows that carry a band.  Per band a full
/// column tower from the whole width down to a seeded depth.
inline ShearRectangleFamily build_shear_family(const DyadicSpace& sp,
                                               const ShearDirection& dir,
                                               std::uint64_t seed, double density) {
    if (sp.dim != 2) throw std::domain_error("build_shear_family: 2-D space required");
    if (dir.shear < -sp.cells_per_axis() || dir.shear > sp.cells_per_axis())
        throw std::domain_error("build_shear_family: slope out of range");
    if (!(density > 0.0 && density <= 1.0))
        throw std::domain_error("build_shear_family: density in (0, 1]");

    const std::int64_t n = sp.cells_per_axis();
    const auto n_bands =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(density * static_cast<double>(n)));

    Rng rng(seed);
    // distinct band rows via partial Fisher-Yates over [0, n)
    std::vector<std::int64_t> rows(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    for (std::int64_t i = 0; i < n_bands; ++i) {
        const std::int64_t j =
            i + static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
    rows.resize(static_cast<std::size_t>(n_bands));
    std::sort(rows.begin(), rows.end());

    ShearRectangleFamily fam;
    fam.space = sp;
    fam.direction = dir;
    std::vector<MeasSet> all;
    const int max_depth = std::min(sp.depth, 6);
    for (std::int64_t band : rows) {
        const int depth =
            max_depth < 2 ? max_depth
                          : 2 + static_cast<int>(rng.next_below(
                                    static_cast<std::uint64_t>(max_depth - 1)));
        std::vector<MeasSet> sets;
        std::int64_t b = 0, e = n;
        for (int j = 0; j <= depth; ++j) {
            ShearRect r{b, e, band};
            fam.rects.push_back(r);
            sets.push_back(shear_rect_cells(sp, dir, r));
            const std::int64_t half = (e - b) / 2;
            if (half == 0) break;
            if (rng.next_bool()) b += half;
            else e -= half;
        }
        fam.bands.emplace_back(SparseCollection::from_sets(sp, sets));
        all.insert(all.end(), sets.begin(), sets.end());
    }
    fam.merged = SparseCollection::from_sets(sp, std::move(all));
    return fam;
}

/// M_V f: max over directions of the per-direction maximal function.
template <class S>
CellFunction<S> directional_maximal(const std::vector<ShearRectangleFamily>& fams,
                                    const CellFunction<S>& f) {
    CellFunction<S> out = CellFunction<S>::zero(f.space);
    for (const auto& fam : fams) {
        CellFunction<S> m = apply_maximal<S>(fam.merged.sets(), f);
        for (std::size_t c = 0; c < out.values.size(); ++c)
            if (m.values[c] > out.values[c]) out.values[c] = m.values[c];
    }
    return out;
}

/// Pointwise check of  M_S f ≤ M_V f  with S the union of every family's
/// rectangles.  Must never report a violation.
struct MVDominationReport {
    std::int64_t violations = 0;
    std::optional<std::int64_t> first_cell;
    bool ok() const { return violations == 0; }
};

template <class S>
MVDominationReport verify_MV_domination(const std::vector<ShearRectangleFamily>& fams,
                                        const CellFunction<S>& f) {
    std::vector<MeasSet> all;
    for (const auto& fam : fams)
        all.insert(all.end(), fam.merged.sets().begin(), fam.merged.sets().end());
    all = dedup_family(std::move(all));
    const CellFunction<S> lhs = apply_maximal<S>(all, f);
    const CellFunction<S> rhs = directional_maximal(fams, f);
    MVDominationReport rep;
    for (std::size_t c = 0; c < lhs.values.size(); ++c)
        if (lhs.values[c] > rhs.values[c]) {
            ++rep.violations;
            if (!rep.first_cell) rep.first_cell = static_cast<std::int64_t>(c);
        }
    return rep;
}

} // namespace sparselab
