#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "collections.hpp"
#include "space.hpp"

namespace sparselab {

// ===========================================================================
// Shifted dyadic grids on an ambient line.
//
// The base space [0,1) at depth L embeds at offset 1 into the ambient line
// [0,4), cut into 4*2^L cells of the same size.  Three grids are used: grid 0
// is the plain dyadic one; grids 1 and 2 shift each scale by roughly 1/3 and
// 2/3 of a block.  The shift of scale n is (a * inv3(n)) mod n where inv3 is
// the inverse of 3 mod n; consecutive scales then agree modulo the smaller
// block size, so each grid is laminar.
// ===========================================================================

namespace detail {

inline std::int64_t inv3_mod_pow2(std::int64_t n) {
    // n a power of two; returns x with 3x ≡ 1 (mod n)
    if (n == 1) return 0;
    return (n % 3 == 1) ? (2 * n + 1) / 3 : (n + 1) / 3;
}

inline std::int64_t grid_shift(int grid, std::int64_t n) {
    return (grid * inv3_mod_pow2(n)) % n;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t n) {
    return (a >= 0) ? a / n : -((-a + n - 1) / n);
}

} // namespace detail

/// Three shifted dyadic grids plus, for each input interval, the chosen
/// covering block.  Blocks live on the ambient line; the base space's cell i
/// is ambient cell offset + i.
struct FiniteMartingaleCover {
    DyadicSpace base;
    DyadicSpace ambient;
    std::int64_t offset = 0;
    double constant = 8.0;

    struct Image {
        int grid = 0;
        CellRange block; // ambient cells, already clipped to [0, 4*2^L)
    };
    std::vector<Image> images;                  // parallel to the input list
    std::vector<MartingaleCollection> grids;    // used blocks, grouped by grid
};

/// Smallest shifted-dyadic block covering the ambient interval [b, e).
/// Ties prefer smaller scales, then lower grid index.  A full-ambient block
/// always exists in grid 0, so the search cannot fail.
inline FiniteMartingaleCover::Image best_block(std::int64_t b, std::int64_t e,
                                               std::int64_t ambient_cells) {
    FiniteMartingaleCover::Image best;
    std::int64_t best_len = -1;
    for (std::int64_t n = 1; n <= ambient_cells; n *= 2) {
        if (n < e - b) continue;
        for (int grid = 0; grid < 3; ++grid) {
            const std::int64_t o = detail::grid_shift(grid, n);
            if (detail::floor_div(b - o, n) != detail::floor_div(e - 1 - o, n))
                continue;
            const std::int64_t k = detail::floor_div(b - o, n);
            const std::int64_t lo = std::max<std::int64_t>(k * n + o, 0);
            const std::int64_t hi = std::min((k + 1) * n + o, ambient_cells);
            if (lo > b || hi < e) continue; // clipping must not lose coverage
            if (best_len < 0 || hi - lo < best_len) {
                best_len = hi - lo;
                best = {grid, {lo, hi}};
            }
        }
    }
    if (best_len < 0)
        throw std::logic_error("best_block: no covering block found");
    return best;
}

/// Covers every (contiguous) interval of a 1-D collection by a shifted-dyadic
/// block of at most 8x its measure.
inline FiniteMartingaleCover cover_shifted_grids(const DyadicSpace& space,
                                                 const std::vector<MeasSet>& intervals) {
    if (space.dim != 1)
        throw std::domain_error("cover_shifted_grids: 1-D spaces only");
    FiniteMartingaleCover cover;
    cover.base = space;
    cover.ambient = DyadicSpace{1, space.depth + 2};
    cover.offset = space.cell_count();
    cover.constant = 8.0;

    std::vector<std::vector<MeasSet>> used(3);
    for (const auto& iv : intervals) {
        if (iv.empty() || iv.ranges().size() != 1)
            throw std::domain_error("cover_shifted_grids: members must be intervals");
        const std::int64_t b = iv.min_cell() + cover.offset;
        const std::int64_t e = iv.max_cell() + 1 + cover.offset;
        auto img = best_block(b, e, cover.ambient.cell_count());
        if (img.block.length() > cover.constant * iv.cell_count())
            throw std::logic_error("cover_shifted_grids: covering ratio above 8");
        used[static_cast<std::size_t>(img.grid)].push_back(
            MeasSet::single_range(img.block.begin, img.block.end));
        cover.images.push_back(img);
    }
    for (int g = 0; g < 3; ++g)
        cover.grids.push_back(MartingaleCollection::from_laminar(
            cover.ambient, dedup_family(used[static_cast<std::size_t>(g)])));
    return cover;
}

// ===========================================================================
// Domination of a 1-D interval collection by ≤ 3 laminar collections
// ===========================================================================

/// The grouped image collections: for f ≥ 0 extended by zero to the ambient
/// line, the original sparse operator is pointwise at most
/// constant * (sum of the parts' sparse operators).
struct MartingaleDomination {
    DyadicSpace ambient;
    std::int64_t offset = 0;
    double constant = 8.0;
    std::vector<SparseCollection> parts; // nonempty grids only, ambient sets
};

inline MartingaleDomination dominate_by_martingale(const SparseCollection& s,
                                                   const FiniteMartingaleCover& cover) {
    if (s.size() != cover.images.size())
        throw std::domain_error("dominate_by_martingale: cover does not match collection");
    MartingaleDomination dom;
    dom.ambient = cover.ambient;
    dom.offset = cover.offset;
    dom.constant = cover.constant;
    for (const auto& grid : cover.grids)
        if (!grid.empty()) dom.parts.emplace_back(grid);
    return dom;
}

/// Zero-padded embedding of a base-line function into the ambient line.
template <class S>
CellFunction<S> embed_line(const CellFunction<S>& f, const DyadicSpace& ambient,
                           std::int64_t offset) {
    CellFunction<S> g = CellFunction<S>::zero(ambient);
    for (std::int64_t i = 0; i < f.space.cell_count(); ++i)
        g[offset + i] = f[i];
    return g;
}

} // namespace sparselab
