#include <catch2/catch_amalgamated.hpp>

#include <sparselab/meas_set.hpp>
#include <sparselab/rng.hpp>

#include <set>
#include <vector>

using namespace sparselab;

namespace {

// independent per-cell model for cross-checking the run-based operations
std::set<std::int64_t> cells_of(const MeasSet& s) {
    std::set<std::int64_t> out;
    s.for_each_cell([&](std::int64_t c) { out.insert(c); });
    return out;
}

MeasSet random_set(Rng& rng, std::int64_t universe) {
    std::vector<CellRange> runs;
    const int k = static_cast<int>(rng.next_below(4)) + 1;
    for (int i = 0; i < k; ++i) {
        const std::int64_t b = rng.next_in(0, universe - 1);
        const std::int64_t e = rng.next_in(b + 1, universe);
        runs.push_back({b, e});
    }
    return MeasSet::from_ranges(std::move(runs));
}

} // namespace

TEST_CASE("from_ranges canonicalizes arbitrary input", "[meas_set]") {
    SECTION("unsorted overlapping runs coalesce") {
        const MeasSet s = MeasSet::from_ranges({{5, 9}, {0, 3}, {2, 6}, {9, 9}});
        CHECK(s.ranges() == std::vector<CellRange>{{0, 9}});
        CHECK(s.cell_count() == 9);
    }
    SECTION("adjacent runs merge") {
        const MeasSet s = MeasSet::from_ranges({{0, 2}, {2, 4}});
        CHECK(s.ranges().size() == 1);
    }
    SECTION("empty runs vanish") {
        CHECK(MeasSet::from_ranges({{3, 3}}).empty());
        CHECK(MeasSet{}.empty());
    }
    SECTION("malformed runs rejected") {
        CHECK_THROWS_AS(MeasSet::from_ranges({{4, 2}}), std::invalid_argument);
        CHECK_THROWS_AS(MeasSet::from_ranges({{-1, 2}}), std::invalid_argument);
    }
    SECTION("canonical form makes equality structural") {
        CHECK(MeasSet::from_ranges({{0, 2}, {4, 6}}) ==
              MeasSet::from_ranges({{4, 6}, {0, 1}, {1, 2}}));
    }
}

TEST_CASE("point queries", "[meas_set]") {
    const MeasSet s = MeasSet::from_ranges({{2, 4}, {8, 10}});
    CHECK(s.contains_cell(2));
    CHECK(s.contains_cell(3));
    CHECK_FALSE(s.contains_cell(4));
    CHECK_FALSE(s.contains_cell(0));
    CHECK(s.contains_cell(9));
    CHECK_FALSE(s.contains_cell(10));
    CHECK(s.min_cell() == 2);
    CHECK(s.max_cell() == 9);
    CHECK(MeasSet::single_cell(7) == MeasSet::single_range(7, 8));
}

TEST_CASE("set algebra agrees with a per-cell model", "[meas_set]") {
    Rng rng(0xBEE5);
    for (int trial = 0; trial < 60; ++trial) {
        const MeasSet a = random_set(rng, 64);
        const MeasSet b = random_set(rng, 64);
        const auto ca = cells_of(a);
        const auto cb = cells_of(b);

        std::set<std::int64_t> want;
        for (auto c : ca)
            if (cb.count(c)) want.insert(c);
        CHECK(cells_of(a.intersect(b)) == want);
        CHECK(a.intersection_count(b) == static_cast<std::int64_t>(want.size()));
        CHECK(a.intersection_count(b) == b.intersection_count(a));
        CHECK(a.intersects(b) == !want.empty());
        CHECK(a.disjoint_from(b) == want.empty());

        want = ca;
        want.insert(cb.begin(), cb.end());
        CHECK(cells_of(a.unite(b)) == want);

        want.clear();
        for (auto c : ca)
            if (!cb.count(c)) want.insert(c);
        CHECK(cells_of(a.setminus(b)) == want);

        CHECK(a.subset_of(a.unite(b)));
        CHECK(a.intersect(b).subset_of(a));
        CHECK(a.setminus(b).disjoint_from(b));
        CHECK(a.setminus(b).unite(a.intersect(b)) == a);
    }
}

TEST_CASE("subset relation", "[meas_set]") {
    const MeasSet big = MeasSet::from_ranges({{0, 8}, {12, 16}});
    CHECK(MeasSet::single_range(2, 5).subset_of(big));
    CHECK(MeasSet::from_ranges({{0, 2}, {13, 14}}).subset_of(big));
    CHECK_FALSE(MeasSet::single_range(6, 13).subset_of(big));
    CHECK(MeasSet{}.subset_of(big));
}

TEST_CASE("canonical family order and dedup", "[meas_set]") {
    const MeasSet a = MeasSet::single_range(0, 8);  // largest first
    const MeasSet b = MeasSet::single_range(0, 4);
    const MeasSet c = MeasSet::single_range(4, 8);  // same size as b, later start
    CHECK(before(a, b));
    CHECK(before(b, c));
    CHECK_FALSE(before(c, b));

    auto fam = dedup_family({c, b, a, b, c});
    REQUIRE(fam.size() == 3);
    CHECK(fam[0] == a);
    CHECK(fam[1] == b);
    CHECK(fam[2] == c);
}
