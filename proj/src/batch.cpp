#include "skeap/heap/batch.hpp"

#include "skeap/sim/bits.hpp"
#include "skeap/sim/types.hpp"

#include <algorithm>

namespace skeap::heap {

std::uint64_t Batch::insert_count() const noexcept {
    std::uint64_t total = 0;
    for (const auto& e : entries)
        for (auto c : e.inserts) total += c;
    return total;
}

std::uint64_t Batch::delete_count() const noexcept {
    std::uint64_t total = 0;
    for (const auto& e : entries) total += e.deletes;
    return total;
}

std::uint64_t EntryShare::delete_slots() const noexcept {
    std::uint64_t total = bottom;
    for (const auto& d : deletes) total += d.range.size();
    return total;
}

bool AnchorState::invariant_holds() const noexcept {
    for (std::size_t p = 0; p < first.size(); ++p)
        if (first[p] > last[p] + 1) return false;
    return true;
}

Batch snapshot_batch(std::span<const BufferedOp> ops, std::size_t priorities) {
    Batch b;
    b.priorities = priorities;
    bool after_delete = true;  // forces a fresh entry for the first request
    for (const auto& op : ops) {
        if (b.entries.empty() || (op.is_insert && after_delete)) {
            b.entries.push_back(BatchEntry{std::vector<std::uint64_t>(priorities, 0), 0});
        }
        if (op.is_insert) {
            if (op.priority >= priorities) throw std::invalid_argument("priority out of range");
            ++b.entries.back().inserts[op.priority];
            after_delete = false;
        } else {
            ++b.entries.back().deletes;
            after_delete = true;
        }
    }
    return b;
}

Batch combine(const Batch& a, const Batch& b) {
    Batch out;
    out.priorities = std::max(a.priorities, b.priorities);
    const std::size_t len = std::max(a.entries.size(), b.entries.size());
    out.entries.assign(len, BatchEntry{std::vector<std::uint64_t>(out.priorities, 0), 0});
    for (const Batch* src : {&a, &b}) {
        for (std::size_t j = 0; j < src->entries.size(); ++j) {
            const auto& e = src->entries[j];
            for (std::size_t p = 0; p < e.inserts.size(); ++p) out.entries[j].inserts[p] += e.inserts[p];
            out.entries[j].deletes += e.deletes;
        }
    }
    return out;
}

Share anchor_assign(AnchorState& state, const Batch& b) {
    if (state.first.size() < b.priorities) throw std::invalid_argument("anchor state has too few priorities");
    const std::size_t P = state.first.size();
    Share share;
    for (const auto& entry : b.entries) {
        EntryShare es;
        es.inserts.assign(P, Interval{});
        for (std::size_t p = 0; p < entry.inserts.size(); ++p) {
            const auto c = entry.inserts[p];
            if (c == 0) continue;
            es.inserts[p] = Interval::of(state.last[p] + 1, state.last[p] + c);
            state.last[p] += c;
        }
        std::uint64_t rem = entry.deletes;
        for (std::uint32_t p = 0; p < P && rem > 0; ++p) {
            const auto avail = state.size(p);
            if (avail == 0) continue;
            const auto take = std::min(rem, avail);
            es.deletes.push_back(DeleteRange{p, Interval::of(state.first[p], state.first[p] + take - 1)});
            state.first[p] += take;
            rem -= take;
        }
        es.bottom = rem;
        share.entries.push_back(std::move(es));
    }
    return share;
}

namespace {

// Hands out consecutive delete slots (ranges first, bottom last) of one entry.
class DeleteCursor {
public:
    explicit DeleteCursor(const EntryShare& es) : es_(es) {}

    void take(std::uint64_t count, EntryShare& out) {
        while (count > 0) {
            if (range_ < es_.deletes.size()) {
                const auto& d = es_.deletes[range_];
                const std::uint64_t left = d.range.size() - offset_;
                const std::uint64_t t = std::min(count, left);
                const std::uint64_t lo = d.range.lo + offset_;
                if (!out.deletes.empty() && out.deletes.back().priority == d.priority &&
                    out.deletes.back().range.hi + 1 == lo) {
                    out.deletes.back().range.hi = lo + t - 1;
                } else {
                    out.deletes.push_back(DeleteRange{d.priority, Interval::of(lo, lo + t - 1)});
                }
                offset_ += t;
                count -= t;
                if (offset_ == d.range.size()) {
                    ++range_;
                    offset_ = 0;
                }
            } else {
                if (count > es_.bottom - bottom_used_) throw SimulationFault("delete share too small for sub-batches");
                bottom_used_ += count;
                out.bottom += count;
                count = 0;
            }
        }
    }

    bool exhausted() const noexcept { return range_ == es_.deletes.size() && bottom_used_ == es_.bottom; }

private:
    const EntryShare& es_;
    std::size_t range_ = 0;
    std::uint64_t offset_ = 0;
    std::uint64_t bottom_used_ = 0;
};

}  // namespace

std::vector<Share> decompose(const Share& share, std::span<const Batch> parts) {
    std::vector<Share> out(parts.size());
    std::size_t len = 0;
    for (const auto& b : parts) len = std::max(len, b.entries.size());
    if (len > share.entries.size()) throw SimulationFault("sub-batches longer than the share");
    for (std::size_t j = 0; j < share.entries.size(); ++j) {
        const EntryShare& es = share.entries[j];
        const std::size_t P = es.inserts.size();
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (j < parts[k].entries.size()) out[k].entries.push_back(EntryShare{std::vector<Interval>(P), {}, 0});
        }
        for (std::size_t p = 0; p < P; ++p) {
            std::vector<std::uint64_t> counts(parts.size(), 0);
            for (std::size_t k = 0; k < parts.size(); ++k) {
                if (j < parts[k].entries.size() && p < parts[k].entries[j].inserts.size())
                    counts[k] = parts[k].entries[j].inserts[p];
            }
            const auto pieces = ldb::split_interval(es.inserts[p], counts);
            for (std::size_t k = 0; k < parts.size(); ++k) {
                if (j < parts[k].entries.size()) out[k].entries[j].inserts[p] = pieces[k];
            }
        }
        DeleteCursor cursor(es);
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (j < parts[k].entries.size()) cursor.take(parts[k].entries[j].deletes, out[k].entries[j]);
        }
        if (!cursor.exhausted()) throw SimulationFault("delete share larger than sub-batches");
    }
    return out;
}

std::vector<Slot> assign_slots(const Share& own, std::span<const BufferedOp> ops) {
    std::vector<Slot> slots;
    slots.reserve(ops.size());
    std::size_t j = 0;
    bool started = false, after_delete = false;
    std::vector<std::uint64_t> used_ins;
    std::uint64_t used_del = 0;
    for (const auto& op : ops) {
        if (!started || (op.is_insert && after_delete)) {
            if (started) ++j;
            started = true;
            if (j >= own.entries.size()) throw SimulationFault("share has fewer entries than the buffer");
            used_ins.assign(own.entries[j].inserts.size(), 0);
            used_del = 0;
        }
        const EntryShare& es = own.entries[j];
        if (op.is_insert) {
            const Interval iv = es.inserts.at(op.priority);
            if (used_ins[op.priority] >= iv.size()) throw SimulationFault("insert share exhausted");
            slots.push_back(Slot{false, op.priority, iv.lo + used_ins[op.priority]++, j});
            after_delete = false;
        } else {
            std::uint64_t k = used_del++;
            bool placed = false;
            for (const auto& d : es.deletes) {
                if (k < d.range.size()) {
                    slots.push_back(Slot{false, d.priority, d.range.lo + k, j});
                    placed = true;
                    break;
                }
                k -= d.range.size();
            }
            if (!placed) {
                if (k >= es.bottom) throw SimulationFault("delete share exhausted");
                slots.push_back(Slot{true, 0, 0, j});
            }
            after_delete = true;
        }
    }
    return slots;
}

std::uint64_t batch_bits(const Batch& b) noexcept {
    sim::BitCounter bits;
    for (const auto& e : b.entries) {
        for (auto c : e.inserts) bits.natural(c);
        bits.natural(e.deletes);
    }
    return bits.total();
}

std::uint64_t share_bits(const Share& s) noexcept {
    sim::BitCounter bits;
    for (const auto& e : s.entries) {
        for (const auto& iv : e.inserts) bits.add(ldb::interval_bits(iv));
        for (const auto& d : e.deletes) bits.natural(d.priority).add(ldb::interval_bits(d.range));
        bits.natural(e.bottom);
    }
    return bits.total();
}

std::string to_string(const Batch& b) {
    std::string s = "(";
    for (std::size_t j = 0; j < b.entries.size(); ++j) {
        if (j) s += ",";
        s += "(";
        for (std::size_t p = 0; p < b.entries[j].inserts.size(); ++p) {
            if (p) s += ",";
            s += std::to_string(b.entries[j].inserts[p]);
        }
        s += ")," + std::to_string(b.entries[j].deletes);
    }
    return s + ")";
}

std::string to_string(const EntryShare& e) {
    std::string s = "((";
    for (std::size_t p = 0; p < e.inserts.size(); ++p) {
        if (p) s += ",";
        s += ldb::to_string(e.inserts[p]);
    }
    s += "),(";
    for (std::size_t p = 0; p < e.inserts.size(); ++p) {
        if (p) s += ",";
        Interval iv;
        for (const auto& d : e.deletes)
            if (d.priority == p) iv = d.range;
        s += ldb::to_string(iv);
    }
    s += ")";
    if (e.bottom) s += ",bottom=" + std::to_string(e.bottom);
    return s + ")";
}

}  // namespace skeap::heap
