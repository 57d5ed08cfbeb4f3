#include "skeap/proto/const_heap.hpp"

#include "skeap/sim/hash.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace skeap::proto {

using consistency::OpKind;

ConstHeap::ConstHeap(const ldb::Topology& topo, std::size_t priorities, std::uint64_t seed)
    : topo_(topo), priorities_(priorities), seed_(seed), anchor_(priorities), vstate_(topo.virtual_count()),
      next_seq_(topo.node_count(), 0) {
    if (priorities == 0) throw std::invalid_argument("need at least one priority");
    for (Address a = 0; a < vstate_.size(); ++a) {
        vstate_[a].child_batches.assign(topo_.children(a).size(), std::nullopt);
        vstate_[a].own.priorities = priorities_;
    }
}

std::uint64_t ConstHeap::insert(NodeId node, std::uint32_t priority, std::uint64_t payload) {
    return insert_at(ldb::vaddr(node, ldb::VKind::middle), priority, payload);
}

std::uint64_t ConstHeap::deletemin(NodeId node) { return deletemin_at(ldb::vaddr(node, ldb::VKind::middle)); }

std::uint64_t ConstHeap::insert_at(Address vnode, std::uint32_t priority, std::uint64_t payload) {
    if (priority >= priorities_) throw std::invalid_argument("priority out of range");
    return issue(vnode, true, priority, payload);
}

std::uint64_t ConstHeap::deletemin_at(Address vnode) { return issue(vnode, false, 0, 0); }

std::uint64_t ConstHeap::issue(Address vnode, bool is_insert, std::uint32_t priority, std::uint64_t payload) {
    const NodeId node = ldb::vowner(vnode);
    const std::uint64_t seq = next_seq_.at(node)++;
    consistency::OperationRecord rec;
    rec.node = node;
    rec.seq = seq;
    rec.kind = is_insert ? OpKind::insert : OpKind::deletemin;
    if (is_insert) rec.element = Element{priority, node, seq, payload};
    record_of_[{node, seq}] = records_.size();
    vstate_.at(vnode).buffer.push_back(Op{records_.size(), heap::BufferedOp{is_insert, priority}, payload});
    records_.push_back(rec);
    serial_keys_.push_back(SerialKey{std::numeric_limits<std::uint64_t>::max(), 0, 0, 0, seq});
    ++outstanding_;
    return seq;
}

void ConstHeap::send(Address src, Address dst, Message m) {
    if (engine_ == nullptr) throw SimulationFault("protocol not attached to an engine");
    engine_->send(src, dst, std::move(m));
}

Label ConstHeap::position_key(std::uint64_t p, std::uint64_t pos) const {
    return sim::hash_bits(sim::HashDomain::position_key, {p, pos}, seed_);
}

void ConstHeap::activate(NodeId node) {
    for (const auto& g : workload_.generate()) {
        issue(ldb::vaddr(node, ldb::VKind::middle), g.is_insert, static_cast<std::uint32_t>(g.priority % priorities_),
              0);
    }
    for (auto kind : {ldb::VKind::left, ldb::VKind::middle, ldb::VKind::right}) try_phase1(ldb::vaddr(node, kind));
}

void ConstHeap::try_phase1(Address v) {
    VState& s = vstate_[v];
    if (s.halted || s.waiting || s.children_in < s.child_batches.size()) return;
    s.inflight = std::move(s.buffer);
    s.buffer.clear();
    std::vector<heap::BufferedOp> ops;
    ops.reserve(s.inflight.size());
    for (const auto& o : s.inflight) ops.push_back(o.op);
    s.own = heap::snapshot_batch(ops, priorities_);
    s.own_quiet = s.own.empty() && workload_.closed();
    heap::Batch combined = s.own;
    for (const auto& c : s.child_batches) combined = heap::combine(combined, *c);
    const bool quiet = s.own_quiet && s.children_quiet;
    s.waiting = true;
    if (v == topo_.root()) {
        anchor_process(combined, quiet);
    } else {
        send(v, *topo_.parent(v), BatchUp{s.epoch, std::move(combined), quiet});
    }
}

void ConstHeap::anchor_process(const heap::Batch& combined, bool quiet) {
    const Address root = topo_.root();
    if (quiet) {
        halt(root);
        return;
    }
    anchor_batches_.push_back(combined);
    const heap::Share share = heap::anchor_assign(anchor_, combined);
    if (!anchor_.invariant_holds()) throw SimulationFault("anchor invariant violated");
    apply_share(root, share);
}

void ConstHeap::halt(Address v) {
    VState& s = vstate_[v];
    s.halted = true;
    for (Address c : topo_.children(v)) send(v, c, ShareDown{s.epoch, {}, true});
}

void ConstHeap::apply_share(Address v, const heap::Share& share) {
    VState& s = vstate_[v];
    std::vector<heap::Batch> parts;
    parts.reserve(s.child_batches.size() + 1);
    parts.push_back(s.own);
    for (const auto& c : s.child_batches) parts.push_back(*c);
    const auto shares = heap::decompose(share, parts);
    const auto children = topo_.children(v);
    for (std::size_t i = 0; i < children.size(); ++i) send(v, children[i], ShareDown{s.epoch, shares[i + 1], false});

    std::vector<heap::BufferedOp> ops;
    ops.reserve(s.inflight.size());
    for (const auto& o : s.inflight) ops.push_back(o.op);
    const auto slots = heap::assign_slots(shares[0], ops);
    const std::uint64_t rank = topo_.dfs_rank(v);
    for (std::size_t k = 0; k < s.inflight.size(); ++k) {
        const Op& op = s.inflight[k];
        const heap::Slot& slot = slots[k];
        auto& rec = records_[op.record];
        rec.epoch = s.epoch;
        rec.assigned_bottom = slot.bottom;
        rec.assigned_priority = slot.priority;
        rec.assigned_position = slot.position;
        serial_keys_[op.record] = SerialKey{s.epoch, slot.entry, op.op.is_insert ? 0u : 1u, rank, rec.seq};
        const OpRef ref{rec.node, rec.seq};
        if (op.op.is_insert) {
            --outstanding_;
            start_put(v, slot.priority, slot.position, rec.element, ref);
        } else if (slot.bottom) {
            complete_delete(op.record, std::nullopt);
        } else {
            start_get(v, slot.priority, slot.position, ref);
        }
    }
    if (keep_shares_) applied_[{s.epoch, v}] = shares[0];
    s.inflight.clear();
    for (auto& c : s.child_batches) c.reset();
    s.children_in = 0;
    s.children_quiet = true;
    s.waiting = false;
    ++s.epoch;
    if (v == topo_.root()) workload_.observe_epoch(s.epoch);
}

void ConstHeap::start_put(Address v, std::uint32_t p, std::uint64_t pos, const Element& e, OpRef op) {
    DhtPut m;
    m.route = ldb::start_route(topo_, v, position_key(p, pos));
    m.inputs = KeyInputs{{p, pos, 0}, 2};
    m.element = e;
    m.op = op;
    on_put(v, m);
}

void ConstHeap::start_get(Address v, std::uint32_t p, std::uint64_t pos, OpRef op) {
    DhtGet m;
    m.route = ldb::start_route(topo_, v, position_key(p, pos));
    m.inputs = KeyInputs{{p, pos, 0}, 2};
    m.requester = v;
    m.op = op;
    on_get(v, m);
}

void ConstHeap::on_put(Address at, const DhtPut& m) {
    DhtPut fwd = m;
    if (auto next = ldb::next_hop(topo_, at, fwd.route)) {
        send(at, *next, std::move(fwd));
        return;
    }
    if (auto waiting = vstate_[at].store.put(fwd.route.key, fwd.element)) {
        send(at, waiting->requester, DhtReply{waiting->op, fwd.element});
    }
}

void ConstHeap::on_get(Address at, const DhtGet& m) {
    DhtGet fwd = m;
    if (auto next = ldb::next_hop(topo_, at, fwd.route)) {
        send(at, *next, std::move(fwd));
        return;
    }
    if (auto e = vstate_[at].store.get(fwd.route.key, GetWait{fwd.requester, fwd.op})) {
        send(at, fwd.requester, DhtReply{fwd.op, *e});
    }
}

void ConstHeap::complete_delete(std::size_t record, std::optional<Element> e) {
    records_[record].returned = e;
    --outstanding_;
}

void ConstHeap::deliver(const sim::Envelope<Message>& env) {
    const Address at = env.dst;
    VState& s = vstate_[at];
    if (const auto* up = std::get_if<BatchUp>(&env.payload)) {
        const auto children = topo_.children(at);
        const auto it = std::find(children.begin(), children.end(), env.src);
        if (it == children.end()) throw SimulationFault("batch from a non-child");
        auto& slot = s.child_batches[static_cast<std::size_t>(it - children.begin())];
        if (slot || up->epoch != s.epoch) throw SimulationFault("batch for the wrong epoch");
        slot = up->batch;
        ++s.children_in;
        s.children_quiet = s.children_quiet && up->quiet;
    } else if (const auto* down = std::get_if<ShareDown>(&env.payload)) {
        if (down->halt) {
            halt(at);
        } else {
            if (down->epoch != s.epoch || !s.waiting) throw SimulationFault("share for the wrong epoch");
            apply_share(at, down->share);
        }
    } else if (const auto* put = std::get_if<DhtPut>(&env.payload)) {
        on_put(at, *put);
    } else if (const auto* get = std::get_if<DhtGet>(&env.payload)) {
        on_get(at, *get);
    } else if (const auto* reply = std::get_if<DhtReply>(&env.payload)) {
        complete_delete(record_of_.at({reply->op.node, reply->op.seq}), reply->element);
    } else {
        throw SimulationFault("unexpected message for SKEAP");
    }
}

bool ConstHeap::finished() const noexcept { return vstate_[topo_.root()].halted && outstanding_ == 0; }

consistency::History ConstHeap::history() const {
    consistency::History h;
    h.tie_policy = consistency::TiePolicy::insertion_order;
    h.records = records_;
    std::vector<std::size_t> idx(records_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (serial_keys_[a] != serial_keys_[b]) return serial_keys_[a] < serial_keys_[b];
        return a < b;
    });
    for (std::size_t r = 0; r < idx.size(); ++r) h.records[idx[r]].serial_index = r;
    return h;
}

}  // namespace skeap::proto
