#include "clu/buffer.hpp"

#include <algorithm>

#include "clu/errors.hpp"

namespace clu {

ReservoirBuffer::ReservoirBuffer(std::size_t capacity, Rng rng, bool recount_on_erase)
    : capacity_(capacity), rng_(rng), recount_(recount_on_erase) {
    if (capacity_ == 0) throw ValidationError("ReservoirBuffer: capacity must be positive");
}

bool ReservoirBuffer::observe(Item item) {
    if (present_.count(item.id))
        throw DuplicateIdError("ReservoirBuffer: sample id " + std::to_string(item.id) +
                               " is already stored");
    if (erased_.count(item.id)) return false;  // erased ids never resurrect

    ++seen_;
    if (items_.size() < capacity_) {
        present_.insert(item.id);
        items_.push_back(std::move(item));
        return true;
    }
    const std::uint64_t slot = rng_.below(seen_);
    if (slot >= capacity_) return false;
    present_.erase(items_[static_cast<std::size_t>(slot)].id);
    present_.insert(item.id);
    items_[static_cast<std::size_t>(slot)] = std::move(item);
    return true;
}

void ReservoirBuffer::observe_batch(const Batch& batch) {
    if (batch.ids.size() != static_cast<std::size_t>(batch.size()))
        throw ValidationError("observe_batch: batch must carry sample ids");
    for (int i = 0; i < batch.size(); ++i) {
        Item item;
        item.id = batch.ids[static_cast<std::size_t>(i)];
        item.features = batch.features.row(i);
        item.label = batch.labels[i];
        observe(std::move(item));
    }
}

std::size_t ReservoirBuffer::erase_classes(const std::vector<int>& classes) {
    std::size_t removed = 0;
    std::vector<Item> kept;
    kept.reserve(items_.size());
    for (Item& item : items_) {
        if (std::find(classes.begin(), classes.end(), item.label) != classes.end()) {
            present_.erase(item.id);
            erased_.insert(item.id);
            ++removed;
        } else {
            kept.push_back(std::move(item));
        }
    }
    items_ = std::move(kept);
    if (recount_) seen_ -= std::min<std::uint64_t>(seen_, removed);
    return removed;
}

std::size_t ReservoirBuffer::erase_ids(const std::vector<std::int64_t>& ids) {
    const std::unordered_set<std::int64_t> target(ids.begin(), ids.end());
    std::size_t removed = 0;
    std::vector<Item> kept;
    kept.reserve(items_.size());
    for (Item& item : items_) {
        if (target.count(item.id)) {
            present_.erase(item.id);
            erased_.insert(item.id);
            ++removed;
        } else {
            kept.push_back(std::move(item));
        }
    }
    // Ids requested for erasure are tombstoned even when not currently held.
    for (std::int64_t id : ids) erased_.insert(id);
    items_ = std::move(kept);
    if (recount_) seen_ -= std::min<std::uint64_t>(seen_, removed);
    return removed;
}

Batch ReservoirBuffer::sample_batch(std::size_t n) {
    if (items_.empty())
        throw ValidationError("ReservoirBuffer: cannot sample from an empty buffer (no remaining data)");
    if (n == 0) throw ValidationError("ReservoirBuffer: batch size must be positive");

    std::vector<std::size_t> picks;
    if (n > items_.size()) {
        picks.resize(n);
        for (std::size_t i = 0; i < n; ++i) picks[i] = static_cast<std::size_t>(rng_.below(items_.size()));
    } else {
        picks = rng_.sample_without_replacement(items_.size(), n);
    }

    Batch b;
    b.features.resize(static_cast<Eigen::Index>(n), items_.front().features.size());
    b.labels.resize(static_cast<Eigen::Index>(n));
    b.ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Item& item = items_[picks[i]];
        b.features.row(static_cast<Eigen::Index>(i)) = item.features;
        b.labels[static_cast<Eigen::Index>(i)] = item.label;
        b.ids.push_back(item.id);
    }
    return b;
}

Batch ReservoirBuffer::contents() const {
    if (items_.empty()) throw ValidationError("ReservoirBuffer: buffer is empty");
    Batch b;
    b.features.resize(static_cast<Eigen::Index>(items_.size()), items_.front().features.size());
    b.labels.resize(static_cast<Eigen::Index>(items_.size()));
    b.ids.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        b.features.row(static_cast<Eigen::Index>(i)) = items_[i].features;
        b.labels[static_cast<Eigen::Index>(i)] = items_[i].label;
        b.ids.push_back(items_[i].id);
    }
    return b;
}

Batch ReservoirBuffer::contents_of_classes(const std::vector<int>& classes) const {
    std::vector<const Item*> matching;
    for (const Item& item : items_)
        if (std::find(classes.begin(), classes.end(), item.label) != classes.end())
            matching.push_back(&item);
    Batch b;
    if (matching.empty()) return b;
    b.features.resize(static_cast<Eigen::Index>(matching.size()), matching.front()->features.size());
    b.labels.resize(static_cast<Eigen::Index>(matching.size()));
    b.ids.reserve(matching.size());
    for (std::size_t i = 0; i < matching.size(); ++i) {
        b.features.row(static_cast<Eigen::Index>(i)) = matching[i]->features;
        b.labels[static_cast<Eigen::Index>(i)] = matching[i]->label;
        b.ids.push_back(matching[i]->id);
    }
    return b;
}

ReservoirBuffer::Snapshot ReservoirBuffer::snapshot() const {
    Snapshot snap;
    snap.capacity = capacity_;
    snap.seen = seen_;
    snap.recount = recount_;
    snap.rng_state = rng_.state();
    snap.items = items_;
    snap.tombstones.assign(erased_.begin(), erased_.end());
    std::sort(snap.tombstones.begin(), snap.tombstones.end());
    return snap;
}

ReservoirBuffer ReservoirBuffer::from_snapshot(const Snapshot& snap) {
    ReservoirBuffer buf(snap.capacity, Rng(snap.rng_state), snap.recount);
    buf.seen_ = snap.seen;
    buf.items_ = snap.items;
    for (const Item& item : buf.items_) buf.present_.insert(item.id);
    buf.erased_.insert(snap.tombstones.begin(), snap.tombstones.end());
    return buf;
}

}  // namespace clu
