#include <doctest.h>

#include <set>

#include "clu/rng.hpp"

using namespace clu;

TEST_SUITE("rng") {
    TEST_CASE("same seed reproduces the stream") {
        Rng a(42), b(42);
        for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    }

    TEST_CASE("uniform stays in [0,1) and covers the range") {
        Rng rng(7);
        double lo = 1.0, hi = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const double u = rng.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            lo = std::min(lo, u);
            hi = std::max(hi, u);
        }
        CHECK(lo < 0.01);
        CHECK(hi > 0.99);
    }

    TEST_CASE("below is bounded and hits every residue") {
        Rng rng(9);
        std::set<std::uint64_t> seen;
        for (int i = 0; i < 2000; ++i) seen.insert(rng.below(7));
        CHECK(seen.size() == 7);
        CHECK(*seen.rbegin() == 6);
    }

    TEST_CASE("normal has roughly unit variance") {
        Rng rng(11);
        double sum = 0.0, sq = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const double x = rng.normal();
            sum += x;
            sq += x * x;
        }
        const double mean = sum / n;
        const double var = sq / n - mean * mean;
        CHECK(std::abs(mean) < 0.05);
        CHECK(std::abs(var - 1.0) < 0.05);
    }

    TEST_CASE("fork produces independent, reproducible substreams") {
        Rng root(123);
        Rng a = root.fork(1);
        Rng b = root.fork(2);
        Rng a2 = root.fork(1);
        CHECK(a.next_u64() == a2.next_u64());
        CHECK(a.next_u64() != b.next_u64());
    }

    TEST_CASE("state round-trip restores the stream") {
        Rng rng(55);
        rng.next_u64();
        const Rng::State s = rng.state();
        const std::uint64_t expect = rng.next_u64();
        Rng copy(s);
        CHECK(copy.next_u64() == expect);
    }

    TEST_CASE("sample_without_replacement yields distinct indices") {
        Rng rng(3);
        const auto picks = rng.sample_without_replacement(10, 10);
        std::set<std::size_t> unique(picks.begin(), picks.end());
        CHECK(unique.size() == 10);
    }
}
