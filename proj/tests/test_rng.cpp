#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fairboost/rng.hpp"

using namespace fairboost;

TEST_CASE("identical seeds give identical streams") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams") {
    Rng a(1), b(2);
    int differing = 0;
    for (int i = 0; i < 64; ++i) differing += a.next_u64() != b.next_u64();
    CHECK(differing > 60);
}

TEST_CASE("next_double lies in [0, 1)") {
    Rng r(7);
    for (int i = 0; i < 10000; ++i) {
        double v = r.next_double();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("next_below respects the bound and covers all residues") {
    Rng r(42);
    std::vector<int> hits(10, 0);
    for (int i = 0; i < 10000; ++i) {
        auto v = r.next_below(10);
        REQUIRE(v < 10);
        ++hits[static_cast<std::size_t>(v)];
    }
    for (int h : hits) CHECK(h > 800);  // ~1000 expected per bucket
}

TEST_CASE("next_below(1) is always zero") {
    Rng r(9);
    for (int i = 0; i < 100; ++i) CHECK(r.next_below(1) == 0);
}

TEST_CASE("shuffle produces a permutation, deterministically") {
    std::vector<int> v(25);
    for (int i = 0; i < 25; ++i) v[static_cast<std::size_t>(i)] = i;
    std::vector<int> a = v, b = v;
    Rng r1(5), r2(5);
    r1.shuffle(a);
    r2.shuffle(b);
    CHECK(a == b);
    std::sort(b.begin(), b.end());
    CHECK(b == v);
}

TEST_CASE("shuffle visits all orderings of a 3-element vector roughly uniformly") {
    std::map<std::vector<int>, int> counts;
    for (std::uint64_t seed = 0; seed < 6000; ++seed) {
        std::vector<int> v{0, 1, 2};
        Rng r(seed);
        r.shuffle(v);
        ++counts[v];
    }
    REQUIRE(counts.size() == 6);
    for (const auto& [perm, count] : counts) {
        CHECK(count > 800);
        CHECK(count < 1200);
    }
}

TEST_CASE("next_weighted follows the cumulative weights") {
    // weights {1, 0, 3}: index 1 unreachable, index 2 about 3x index 0
    std::vector<double> cumulative{1.0, 1.0, 4.0};
    Rng r(11);
    int hits[3] = {0, 0, 0};
    const int draws = 40000;
    for (int i = 0; i < draws; ++i) ++hits[r.next_weighted(cumulative)];
    CHECK(hits[1] == 0);
    CHECK(hits[0] > draws / 4 - 600);
    CHECK(hits[0] < draws / 4 + 600);
    CHECK(hits[2] > 3 * draws / 4 - 600);
}

TEST_CASE("derive_seed separates stages and is order sensitive") {
    std::uint64_t base = 42;
    std::set<std::uint64_t> seen;
    seen.insert(derive_seed(base, stage::kSplit));
    seen.insert(derive_seed(base, stage::kPreprocess));
    seen.insert(derive_seed(base, stage::kModel));
    seen.insert(derive_seed(base, stage::kTransform));
    seen.insert(derive_seed(base, stage::kFolds));
    seen.insert(derive_seed(base, stage::kBagging));
    seen.insert(derive_seed(base, stage::kSubsample));
    CHECK(seen.size() == 7);

    CHECK(derive_seed(base, 1, 2) != derive_seed(base, 2, 1));
    CHECK(derive_seed(base, 1, 2) == derive_seed(base, 1, 2));
    CHECK(derive_seed(base) != base);
}

TEST_CASE("derived streams decorrelate adjacent seed indices") {
    // Weak sanity check: streams from consecutive seed indices should not
    // share leading values.
    for (std::uint64_t i = 0; i < 50; ++i) {
        Rng a(derive_seed(7, i));
        Rng b(derive_seed(7, i + 1));
        CHECK(a.next_u64() != b.next_u64());
    }
}
