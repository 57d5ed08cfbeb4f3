#pragma once

#include "skeap/ldb/tree_ops.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace skeap::heap {

using ldb::Interval;

// Priorities are indices 0..P-1 here; 0 is the most prioritized.
struct BatchEntry {
    std::vector<std::uint64_t> inserts;
    std::uint64_t deletes = 0;
    friend bool operator==(const BatchEntry&, const BatchEntry&) = default;
};

// Alternating insert-count vectors and delete counts.
struct Batch {
    std::size_t priorities = 0;
    std::vector<BatchEntry> entries;

    std::uint64_t insert_count() const noexcept;
    std::uint64_t delete_count() const noexcept;
    bool empty() const noexcept { return insert_count() == 0 && delete_count() == 0; }
    friend bool operator==(const Batch& a, const Batch& b) { return a.entries == b.entries; }
};

struct BufferedOp {
    bool is_insert = false;
    std::uint32_t priority = 0;
};

Batch snapshot_batch(std::span<const BufferedOp> ops, std::size_t priorities);
Batch combine(const Batch& a, const Batch& b);

struct DeleteRange {
    std::uint32_t priority = 0;
    Interval range;
    friend bool operator==(const DeleteRange&, const DeleteRange&) = default;
};

// One batch entry's positions: an insert interval per priority, the delete ranges in
// priority order, and the number of deletes that find the heap empty.
struct EntryShare {
    std::vector<Interval> inserts;
    std::vector<DeleteRange> deletes;
    std::uint64_t bottom = 0;

    std::uint64_t delete_slots() const noexcept;
    friend bool operator==(const EntryShare&, const EntryShare&) = default;
};

struct Share {
    std::vector<EntryShare> entries;
    friend bool operator==(const Share&, const Share&) = default;
};

struct AnchorState {
    std::vector<std::uint64_t> first;
    std::vector<std::uint64_t> last;

    explicit AnchorState(std::size_t priorities = 0) : first(priorities, 1), last(priorities, 0) {}
    std::uint64_t size(std::size_t p) const noexcept { return last[p] + 1 - first[p]; }
    bool invariant_holds() const noexcept;
};

Share anchor_assign(AnchorState& state, const Batch& b);

// Splits `share` over `parts` (own batch first, then children in label order) by
// consuming positions in that order.
std::vector<Share> decompose(const Share& share, std::span<const Batch> parts);

// Position assigned to one buffered request.
struct Slot {
    bool bottom = false;
    std::uint32_t priority = 0;
    std::uint64_t position = 0;
    std::size_t entry = 0;
    friend bool operator==(const Slot&, const Slot&) = default;
};

// Per-request slots for a node's own share, in issue order of `ops`.
std::vector<Slot> assign_slots(const Share& own, std::span<const BufferedOp> ops);

std::uint64_t batch_bits(const Batch& b) noexcept;
std::uint64_t share_bits(const Share& s) noexcept;

std::string to_string(const Batch& b);
std::string to_string(const EntryShare& e);

}  // namespace skeap::heap
