#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "clu/buffer.hpp"
#include "clu/errors.hpp"

using namespace clu;

namespace {

ReservoirBuffer::Item item(std::int64_t id, int label = 0) {
    ReservoirBuffer::Item it;
    it.id = id;
    it.features = Eigen::VectorXd::Constant(1, static_cast<double>(id));
    it.label = label;
    return it;
}

}  // namespace

TEST_SUITE("buffer") {
    TEST_CASE("fill phase keeps everything") {
        ReservoirBuffer buf(3, Rng(1));
        for (int i = 0; i < 3; ++i) buf.observe(item(i));
        CHECK(buf.size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(buf.contains(i));
    }

    TEST_CASE("reservoir inclusion probability is C/N (Monte Carlo)") {
        const std::size_t capacity = 8;
        const int stream = 32;
        const int trials = 10000;
        std::vector<int> included(stream, 0);
        for (int trial = 0; trial < trials; ++trial) {
            ReservoirBuffer buf(capacity, Rng(static_cast<std::uint64_t>(trial) * 2654435761ull + 17));
            for (int i = 0; i < stream; ++i) buf.observe(item(i));
            for (int i = 0; i < stream; ++i)
                if (buf.contains(i)) ++included[static_cast<std::size_t>(i)];
        }
        const double p = static_cast<double>(capacity) / stream;
        const double sigma = std::sqrt(p * (1.0 - p) / trials);
        for (int i = 0; i < stream; ++i) {
            const double freq = static_cast<double>(included[static_cast<std::size_t>(i)]) / trials;
            CHECK(std::abs(freq - p) <= 3.0 * sigma);
        }
    }

    TEST_CASE("duplicate observation is rejected") {
        ReservoirBuffer buf(4, Rng(2));
        buf.observe(item(7));
        CHECK_THROWS_AS(buf.observe(item(7)), DuplicateIdError);
    }

    TEST_CASE("erase by class removes every match and reports the count") {
        ReservoirBuffer buf(8, Rng(3));
        for (int i = 0; i < 4; ++i) buf.observe(item(i, 0));
        for (int i = 4; i < 7; ++i) buf.observe(item(i, 1));
        CHECK(buf.erase_classes({0}) == 4);
        CHECK(buf.size() == 3);
        for (const auto& it : buf.items()) CHECK(it.label != 0);
    }

    TEST_CASE("erasing a class with no matches is a no-op") {
        ReservoirBuffer buf(4, Rng(4));
        buf.observe(item(1, 0));
        CHECK(buf.erase_classes({9}) == 0);
        CHECK(buf.size() == 1);
        CHECK(buf.capacity() == 4);
    }

    TEST_CASE("sampling never yields erased ids") {
        ReservoirBuffer buf(16, Rng(5));
        for (int i = 0; i < 16; ++i) buf.observe(item(i, i % 2));
        buf.erase_classes({1});
        for (int round = 0; round < 50; ++round) {
            const Batch b = buf.sample_batch(4);
            for (auto id : b.ids) CHECK(id % 2 == 0);
        }
    }

    TEST_CASE("erased ids never resurrect") {
        ReservoirBuffer buf(4, Rng(6));
        buf.observe(item(1));
        buf.erase_ids({1, 2});
        CHECK(buf.tombstoned(1));
        CHECK(buf.tombstoned(2));  // tombstoned even though never stored
        CHECK_FALSE(buf.observe(item(1)));
        CHECK_FALSE(buf.observe(item(2)));
        CHECK(buf.size() == 0);
    }

    TEST_CASE("determinism: same seed and order give identical contents") {
        ReservoirBuffer a(8, Rng(42)), b(8, Rng(42));
        for (int i = 0; i < 100; ++i) {
            a.observe(item(i));
            b.observe(item(i));
        }
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.items()[i].id == b.items()[i].id);
    }

    TEST_CASE("full-size sample is a permutation of the buffer") {
        ReservoirBuffer buf(6, Rng(7));
        for (int i = 0; i < 6; ++i) buf.observe(item(i));
        const Batch b = buf.sample_batch(6);
        std::set<std::int64_t> ids(b.ids.begin(), b.ids.end());
        CHECK(ids.size() == 6);
    }

    TEST_CASE("oversized requests sample with replacement") {
        ReservoirBuffer buf(3, Rng(8));
        for (int i = 0; i < 3; ++i) buf.observe(item(i));
        const Batch b = buf.sample_batch(10);
        CHECK(b.size() == 10);
    }

    TEST_CASE("sample frequencies are uniform (chi-square)") {
        const int m = 20;
        ReservoirBuffer buf(static_cast<std::size_t>(m), Rng(9));
        for (int i = 0; i < m; ++i) buf.observe(item(i));
        std::vector<int> counts(static_cast<std::size_t>(m), 0);
        const int draws = 10000;
        for (int d = 0; d < draws; ++d) {
            const Batch b = buf.sample_batch(1);
            ++counts[static_cast<std::size_t>(b.ids[0])];
        }
        const double expected = static_cast<double>(draws) / m;
        double chi2 = 0.0;
        for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
        // 0.99 quantile of chi-square with 19 degrees of freedom.
        CHECK(chi2 < 36.191);
    }

    TEST_CASE("sampling an empty buffer is an error") {
        ReservoirBuffer buf(4, Rng(10));
        CHECK_THROWS_AS(buf.sample_batch(1), ValidationError);
        buf.observe(item(1));
        buf.erase_ids({1});
        CHECK_THROWS_AS(buf.sample_batch(1), ValidationError);
    }

    TEST_CASE("seen_count stays monotone unless recounting is enabled") {
        ReservoirBuffer keep(4, Rng(11), /*recount_on_erase=*/false);
        ReservoirBuffer recount(4, Rng(11), /*recount_on_erase=*/true);
        for (int i = 0; i < 4; ++i) {
            keep.observe(item(i, 0));
            recount.observe(item(i, 0));
        }
        keep.erase_classes({0});
        recount.erase_classes({0});
        CHECK(keep.seen_count() == 4);
        CHECK(recount.seen_count() == 0);
    }

    TEST_CASE("snapshot round-trip restores contents, tombstones and rng") {
        ReservoirBuffer buf(8, Rng(12));
        for (int i = 0; i < 30; ++i) buf.observe(item(i, i % 3));
        std::int64_t erased_id = -1;
        for (const auto& it : buf.items())
            if (it.label == 2) erased_id = it.id;
        REQUIRE(erased_id >= 0);
        buf.erase_classes({2});
        ReservoirBuffer copy = ReservoirBuffer::from_snapshot(buf.snapshot());
        REQUIRE(copy.size() == buf.size());
        for (std::size_t i = 0; i < buf.size(); ++i) CHECK(copy.items()[i].id == buf.items()[i].id);
        CHECK(copy.seen_count() == buf.seen_count());
        // Future draws coincide.
        const Batch a = buf.sample_batch(3);
        const Batch b = copy.sample_batch(3);
        CHECK(a.ids == b.ids);
        // Tombstones survive.
        CHECK(copy.tombstoned(erased_id));
    }
}
