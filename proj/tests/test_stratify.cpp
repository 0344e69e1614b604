#include <catch2/catch_amalgamated.hpp>

#include <sparselab/collections.hpp>
#include <sparselab/rng.hpp>
#include <sparselab/stratify.hpp>

using namespace sparselab;

TEST_CASE("log_plus floors at one", "[stratify]") {
    CHECK(log_plus(1.0) == 1.0);
    CHECK(log_plus(2.0) == 1.0);
    CHECK(log_plus(8.0) == 3.0);
    CHECK(log_plus(0.5) == 1.0);
}

TEST_CASE("averages split into dyadic buckets below the threshold", "[stratify]") {
    // three disjoint intervals with averages 2, 0.75 and 0.3
    const DyadicSpace sp = build_space(1, 3);
    const auto col = SparseCollection::from_sets(sp, {MeasSet::single_range(0, 2),
                                                      MeasSet::single_range(2, 4),
                                                      MeasSet::single_range(4, 6)});
    CellFunction<double> f = CellFunction<double>::zero(sp);
    f[0] = f[1] = 2.0;
    f[2] = f[3] = 0.75;
    f[4] = f[5] = 0.3;

    // lambda = 2, delta = 1/2, N = 1 puts the base threshold t at 1
    const auto st = stratify_by_average(col, f, 2.0, 0.5, 1);
    CHECK(st.threshold == 1.0);
    REQUIRE(st.max_bucket == 2);
    CHECK(st.buckets[0] == std::vector<int>{0}); // 2 > 1
    CHECK(st.buckets[1] == std::vector<int>{1}); // 1/2 < 0.75 <= 1
    CHECK(st.buckets[2] == std::vector<int>{2}); // 1/4 < 0.3 <= 1/2
}

TEST_CASE("zero averages are quarantined", "[stratify]") {
    const DyadicSpace sp = build_space(1, 3);
    const auto col = SparseCollection::from_sets(sp, {MeasSet::single_range(0, 4)});
    const auto st =
        stratify_by_average(col, CellFunction<double>::zero(sp), 1.0, 0.5, 2);
    CHECK(st.bucket_of[0] == Stratification::kZeroBucket);
    CHECK(st.max_bucket == -1);
}

TEST_CASE("buckets partition the collection", "[stratify]") {
    const DyadicSpace sp = build_space(1, 7);
    const auto col = build_random_sparse(sp, 77, 0.5, 10);
    Rng rng(0x57A7);
    CellFunction<double> f = CellFunction<double>::zero(sp);
    for (auto& v : f.values) v = rng.next_unit();

    const auto st = stratify_by_average(col, f, 1.5, 0.3, 4);
    CHECK(st.threshold == 0.3 * 1.5 / log_plus(4.0));

    std::vector<int> seen(col.size(), 0);
    for (int s = 0; s <= st.max_bucket; ++s)
        for (int i : st.buckets[static_cast<std::size_t>(s)]) {
            ++seen[static_cast<std::size_t>(i)];
            const double a = st.averages[static_cast<std::size_t>(i)];
            if (s == 0) {
                CHECK(a > st.threshold);
            } else {
                CHECK(a > st.threshold * std::ldexp(1.0, -s));
                CHECK(a <= st.threshold * std::ldexp(1.0, -s + 1));
            }
        }
    for (std::size_t i = 0; i < col.size(); ++i) {
        const bool zero = st.bucket_of[i] == Stratification::kZeroBucket;
        CHECK(seen[i] == (zero ? 0 : 1));
    }
}

TEST_CASE("stratify validates its parameters", "[stratify]") {
    const DyadicSpace sp = build_space(1, 3);
    const auto col = SparseCollection::from_sets(sp, {sp.whole()});
    const auto f = CellFunction<double>::constant(sp, 1.0);
    CHECK_THROWS_AS(stratify_by_average(col, f, 0.0, 0.5, 1), std::domain_error);
    CHECK_THROWS_AS(stratify_by_average(col, f, 1.0, 0.0, 1), std::domain_error);
    CHECK_THROWS_AS(stratify_by_average(col, f, 1.0, 1.0, 1), std::domain_error);
    CHECK_THROWS_AS(stratify_by_average(col, f, 1.0, 0.5, 0), std::domain_error);
}
