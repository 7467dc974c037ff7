#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "clu/model.hpp"
#include "clu/rng.hpp"

namespace clu {

/// Capacity-bounded reservoir-sampled store approximating the remaining set.
///
/// observe() runs classic reservoir sampling over the stream of surviving
/// samples. erase() removes everything matching a class- or id-predicate and
/// tombstones the ids so they can never re-enter. By default seen_count stays
/// monotone across erasures, which preserves the reservoir guarantee for the
/// surviving stream; recount_on_erase switches to decrementing.
///
/// Single writer, externally serialized; reads between mutations are safe.
class ReservoirBuffer {
public:
    struct Item {
        std::int64_t id = 0;
        Eigen::VectorXd features;
        int label = 0;
    };

    ReservoirBuffer(std::size_t capacity, Rng rng, bool recount_on_erase = false);

    /// Reservoir step. Throws DuplicateIdError for an id already stored;
    /// returns false (no-op) for ids that were erased earlier.
    bool observe(Item item);

    /// Convenience: observe every row of a batch (ids required).
    void observe_batch(const Batch& batch);

    std::size_t erase_classes(const std::vector<int>& classes);
    std::size_t erase_ids(const std::vector<std::int64_t>& ids);

    /// n draws: without replacement when n <= size, with replacement
    /// otherwise. Throws ValidationError when empty.
    Batch sample_batch(std::size_t n);

    /// All stored items as one batch (insertion order). Throws when empty.
    Batch contents() const;

    /// Stored items of the given classes.
    Batch contents_of_classes(const std::vector<int>& classes) const;

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t seen_count() const { return seen_; }
    bool empty() const { return items_.empty(); }
    bool contains(std::int64_t id) const { return present_.count(id) > 0; }
    bool tombstoned(std::int64_t id) const { return erased_.count(id) > 0; }

    const std::vector<Item>& items() const { return items_; }
    Rng& rng() { return rng_; }
    bool recount_on_erase() const { return recount_; }

    /// Checkpoint support: full state round-trip.
    struct Snapshot {
        std::size_t capacity = 0;
        std::uint64_t seen = 0;
        bool recount = false;
        Rng::State rng_state{};
        std::vector<Item> items;
        std::vector<std::int64_t> tombstones;  // sorted
    };
    Snapshot snapshot() const;
    static ReservoirBuffer from_snapshot(const Snapshot& snap);

private:
    std::size_t capacity_;
    Rng rng_;
    bool recount_;
    std::uint64_t seen_ = 0;
    std::vector<Item> items_;
    std::unordered_set<std::int64_t> present_;
    std::unordered_set<std::int64_t> erased_;
};

}  // namespace clu
