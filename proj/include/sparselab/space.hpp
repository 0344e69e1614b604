#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "meas_set.hpp"

namespace sparselab {

// ---------------------------------------------------------------------------
// DyadicSpace: the unit cube [0,1)^d cut into 2^(d*L) congruent cells, each
// carrying measure 2^(-d*L).  Cells are indexed row-major: axis 0 is the
// slowest-varying coordinate, axis d-1 the fastest.  With d*L kept at or
// below 26 significand bits every cell measure, and every sum of cell
// measures, is an exact double.
// ---------------------------------------------------------------------------
struct DyadicSpace {
    int dim   = 1;
    int depth = 0;

    std::int64_t cells_per_axis() const { return std::int64_t{1} << depth; }
    std::int64_t cell_count() const { return std::int64_t{1} << (dim * depth); }
    double cell_measure() const { return std::ldexp(1.0, -dim * depth); }

    MeasSet whole() const { return MeasSet::single_range(0, cell_count()); }

    friend bool operator==(const DyadicSpace&, const DyadicSpace&) = default;
};

inline constexpr int kMaxSpaceBits = 26;

/// Validated constructor; `max_bits` caps dim*depth (exact-double budget).
inline DyadicSpace build_space(int dim, int depth, int max_bits = kMaxSpaceBits) {
    if (dim < 1) throw std::domain_error("build_space: dim must be >= 1");
    if (depth < 0) throw std::domain_error("build_space: depth must be >= 0");
    if (dim * depth > max_bits)
        throw std::length_error("build_space: dim*depth exceeds cell budget (" +
                                std::to_string(max_bits) + " bits)");
    return DyadicSpace{dim, depth};
}

// ---------------------------------------------------------------------------
// Dyadic cubes
// ---------------------------------------------------------------------------

/// Axis-aligned dyadic cube: side length 2^-level, corner at coord * 2^-level.
struct DyadicCube {
    int level = 0;
    std::vector<std::int64_t> coord; // size == dim, each in [0, 2^level)
};

inline DyadicCube root_cube(const DyadicSpace& s) {
    return DyadicCube{0, std::vector<std::int64_t>(static_cast<std::size_t>(s.dim), 0)};
}

inline void check_cube(const DyadicSpace& s, const DyadicCube& q) {
    if (q.level < 0 || q.level > s.depth)
        throw std::domain_error("cube level outside [0, depth]");
    if (static_cast<int>(q.coord.size()) != s.dim)
        throw std::domain_error("cube coordinate arity != dim");
    for (auto c : q.coord)
        if (c < 0 || c >= (std::int64_t{1} << q.level))
            throw std::domain_error("cube coordinate out of range");
}

/// Cells of a cube as a MeasSet: 2^((d-1)(L-level)) runs of 2^(L-level) cells.
inline MeasSet cube_cells(const DyadicSpace& s, const DyadicCube& q) {
    check_cube(s, q);
    const std::int64_t w = std::int64_t{1} << (s.depth - q.level); // cells per axis
    std::vector<CellRange> runs;
    runs.reserve(static_cast<std::size_t>(1) << ((s.dim - 1) * (s.depth - q.level)));
    // iterate the first dim-1 axes; the last axis contributes a contiguous run
    std::vector<std::int64_t> off(static_cast<std::size_t>(s.dim), 0);
    while (true) {
        std::int64_t base = 0;
        for (int a = 0; a < s.dim; ++a)
            base = base * s.cells_per_axis() + q.coord[static_cast<std::size_t>(a)] * w +
                   off[static_cast<std::size_t>(a)];
        runs.push_back({base, base + w});
        int a = s.dim - 2;
        for (; a >= 0; --a) {
            if (++off[static_cast<std::size_t>(a)] < w) break;
            off[static_cast<std::size_t>(a)] = 0;
        }
        if (a < 0) break;
    }
    return MeasSet::from_ranges(std::move(runs));
}

/// The 2^d children of a cube, ordered row-major by child coordinate.
inline std::vector<DyadicCube> cube_children(const DyadicSpace& s, const DyadicCube& q) {
    check_cube(s, q);
    if (q.level >= s.depth)
        throw std::domain_error("cube at finest level has no children");
    std::vector<DyadicCube> kids;
    const int n = 1 << s.dim;
    kids.reserve(static_cast<std::size_t>(n));
    for (int mask = 0; mask < n; ++mask) {
        DyadicCube c{q.level + 1, q.coord};
        for (int a = 0; a < s.dim; ++a)
            c.coord[static_cast<std::size_t>(a)] =
                2 * q.coord[static_cast<std::size_t>(a)] + ((mask >> (s.dim - 1 - a)) & 1);
        kids.push_back(std::move(c));
    }
    return kids;
}

// ---------------------------------------------------------------------------
// CellFunction: a scalar field sampled on the finest cells.  S is double for
// the fast paths and an exact rational type for the certification paths.
// ---------------------------------------------------------------------------
template <class S>
struct CellFunction {
    DyadicSpace space;
    std::vector<S> values;

    static CellFunction constant(const DyadicSpace& s, const S& v) {
        return {s, std::vector<S>(static_cast<std::size_t>(s.cell_count()), v)};
    }

    static CellFunction zero(const DyadicSpace& s) { return constant(s, S(0)); }

    /// Indicator of a set of cells.
    static CellFunction indicator(const DyadicSpace& s, const MeasSet& set) {
        CellFunction f = zero(s);
        set.for_each_cell([&](std::int64_t c) { f.values[static_cast<std::size_t>(c)] = S(1); });
        return f;
    }

    S& operator[](std::int64_t c) { return values[static_cast<std::size_t>(c)]; }
    const S& operator[](std::int64_t c) const { return values[static_cast<std::size_t>(c)]; }
};

/// Sum of |f| over the cells of `set` (no measure factor).
template <class S>
S abs_cell_sum(const CellFunction<S>& f, const MeasSet& set) {
    using std::abs;
    S acc(0);
    for (const auto& r : set.ranges())
        for (std::int64_t c = r.begin; c < r.end; ++c)
            acc += abs(f.values[static_cast<std::size_t>(c)]);
    return acc;
}

/// Average of |f| over a set: (1/mu(B)) * integral_B |f|.  Because all cells
/// share one measure, this reduces to a plain mean over the set's cells and
/// is exact in rational arithmetic.
template <class S>
S average(const CellFunction<S>& f, const MeasSet& set) {
    if (set.empty()) throw std::domain_error("average over empty set");
    return abs_cell_sum(f, set) / S(set.cell_count());
}

/// L^p norm with respect to the cell measure; p >= 1 or infinity.
inline double lp_norm(const CellFunction<double>& f, double p) {
    if (std::isinf(p)) {
        double m = 0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1)) throw std::domain_error("lp_norm: p must be >= 1");
    double acc = 0;
    for (double v : f.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * f.space.cell_measure(), 1.0 / p);
}

/// mu{ |f| > lambda }, strict inequality.  Exact: a count of cells times the
/// exact cell measure.
template <class S, class T>
double distribution(const CellFunction<S>& f, const T& lambda) {
    using std::abs;
    std::int64_t n = 0;
    for (const auto& v : f.values)
        if (abs(v) > S(lambda)) ++n;
    return static_cast<double>(n) * f.space.cell_measure();
}

/// Cells where |f| > lambda, as a set.
template <class S, class T>
MeasSet super_level_set(const CellFunction<S>& f, const T& lambda) {
    using std::abs;
    std::vector<CellRange> runs;
    const std::int64_t n = f.space.cell_count();
    std::int64_t start = -1;
    for (std::int64_t c = 0; c < n; ++c) {
        const bool in = abs(f.values[static_cast<std::size_t>(c)]) > S(lambda);
        if (in && start < 0) start = c;
        if (!in && start >= 0) {
            runs.push_back({start, c});
            start = -1;
        }
    }
    if (start >= 0) runs.push_back({start, n});
    return MeasSet::from_ranges(std::move(runs));
}

} // namespace sparselab
