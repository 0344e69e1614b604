#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sparselab {

/// Half-open run [begin, end) of finest-cell indices.
struct CellRange {
    std::int64_t begin = 0;
    std::int64_t end   = 0;

    std::int64_t length() const { return end - begin; }
    friend bool operator==(const CellRange&, const CellRange&) = default;
};

// ---------------------------------------------------------------------------
// MeasSet: a measurable set stored as sorted, disjoint, coalesced cell runs.
//
// The representation is canonical, so two MeasSets describe the same set of
// cells iff their range vectors compare equal.  All operations are O(#ranges)
// or O(#ranges log #ranges); nothing here ever materialises per-cell storage.
// ---------------------------------------------------------------------------
class MeasSet {
public:
    MeasSet() = default;

    /// Normalises arbitrary (possibly unsorted / overlapping) input runs.
    static MeasSet from_ranges(std::vector<CellRange> rs) {
        for (const auto& r : rs)
            if (r.begin < 0 || r.end < r.begin)
                throw std::invalid_argument("MeasSet: malformed cell range");
        std::sort(rs.begin(), rs.end(), [](const CellRange& a, const CellRange& b) {
            return a.begin < b.begin || (a.begin == b.begin && a.end < b.end);
        });
        std::vector<CellRange> out;
        for (const auto& r : rs) {
            if (r.begin == r.end) continue;
            if (!out.empty() && r.begin <= out.back().end)
                out.back().end = std::max(out.back().end, r.end);
            else
                out.push_back(r);
        }
        return MeasSet(std::move(out));
    }

    static MeasSet single_range(std::int64_t begin, std::int64_t end) {
        return from_ranges({CellRange{begin, end}});
    }

    static MeasSet single_cell(std::int64_t cell) {
        return single_range(cell, cell + 1);
    }

    bool empty() const { return ranges_.empty(); }
    std::int64_t cell_count() const { return cells_; }
    const std::vector<CellRange>& ranges() const { return ranges_; }

    std::int64_t min_cell() const { return ranges_.front().begin; }
    std::int64_t max_cell() const { return ranges_.back().end - 1; }

    bool contains_cell(std::int64_t cell) const {
        auto it = std::upper_bound(
            ranges_.begin(), ranges_.end(), cell,
            [](std::int64_t c, const CellRange& r) { return c < r.begin; });
        return it != ranges_.begin() && cell < std::prev(it)->end;
    }

    /// Number of cells in (*this) ∩ other.
    std::int64_t intersection_count(const MeasSet& other) const {
        std::int64_t n = 0;
        auto a = ranges_.begin();
        auto b = other.ranges_.begin();
        while (a != ranges_.end() && b != other.ranges_.end()) {
            const std::int64_t lo = std::max(a->begin, b->begin);
            const std::int64_t hi = std::min(a->end, b->end);
            if (lo < hi) n += hi - lo;
            (a->end < b->end) ? ++a : ++b;
        }
        return n;
    }

    bool intersects(const MeasSet& other) const {
        auto a = ranges_.begin();
        auto b = other.ranges_.begin();
        while (a != ranges_.end() && b != other.ranges_.end()) {
            if (std::max(a->begin, b->begin) < std::min(a->end, b->end)) return true;
            (a->end < b->end) ? ++a : ++b;
        }
        return false;
    }

    bool disjoint_from(const MeasSet& other) const { return !intersects(other); }

    bool subset_of(const MeasSet& other) const {
        return intersection_count(other) == cells_;
    }

    MeasSet intersect(const MeasSet& other) const {
        std::vector<CellRange> out;
        auto a = ranges_.begin();
        auto b = other.ranges_.begin();
        while (a != ranges_.end() && b != other.ranges_.end()) {
            const std::int64_t lo = std::max(a->begin, b->begin);
            const std::int64_t hi = std::min(a->end, b->end);
            if (lo < hi) out.push_back({lo, hi});
            (a->end < b->end) ? ++a : ++b;
        }
        return MeasSet(std::move(out)); // already sorted and disjoint
    }

    MeasSet unite(const MeasSet& other) const {
        std::vector<CellRange> all = ranges_;
        all.insert(all.end(), other.ranges_.begin(), other.ranges_.end());
        return from_ranges(std::move(all));
    }

    /// Cells of (*this) that are not in other.
    MeasSet setminus(const MeasSet& other) const {
        std::vector<CellRange> out;
        auto b = other.ranges_.begin();
        for (auto r : ranges_) {
            std::int64_t cur = r.begin;
            while (b != other.ranges_.end() && b->end <= cur) ++b;
            auto bb = b;
            while (bb != other.ranges_.end() && bb->begin < r.end) {
                if (cur < bb->begin) out.push_back({cur, bb->begin});
                cur = std::max(cur, bb->end);
                ++bb;
            }
            if (cur < r.end) out.push_back({cur, r.end});
        }
        return MeasSet(std::move(out));
    }

    template <class Fn>
    void for_each_cell(Fn&& fn) const {
        for (const auto& r : ranges_)
            for (std::int64_t c = r.begin; c < r.end; ++c)
                fn(c);
    }

    friend bool operator==(const MeasSet&, const MeasSet&) = default;

    /// Canonical ordering: by cell count descending, then lexicographic on
    /// ranges.  Gives deterministic dedup/sort for set families.
    friend bool before(const MeasSet& a, const MeasSet& b) {
        if (a.cells_ != b.cells_) return a.cells_ > b.cells_;
        const auto& ra = a.ranges_;
        const auto& rb = b.ranges_;
        for (std::size_t i = 0; i < std::min(ra.size(), rb.size()); ++i) {
            if (ra[i].begin != rb[i].begin) return ra[i].begin < rb[i].begin;
            if (ra[i].end != rb[i].end) return ra[i].end < rb[i].end;
        }
        return ra.size() < rb.size();
    }

private:
    explicit MeasSet(std::vector<CellRange> rs) : ranges_(std::move(rs)) {
        for (const auto& r : ranges_) cells_ += r.length();
    }

    std::vector<CellRange> ranges_;
    std::int64_t cells_ = 0;
};

/// Sort a family canonically and drop duplicates (set semantics).
inline std::vector<MeasSet> dedup_family(std::vector<MeasSet> sets) {
    std::sort(sets.begin(), sets.end(),
              [](const MeasSet& a, const MeasSet& b) { return before(a, b); });
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    return sets;
}

} // namespace sparselab
