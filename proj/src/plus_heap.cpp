#include "skeap/plus/plus_heap.hpp"

#include "skeap/ldb/routing.hpp"
#include "skeap/sim/hash.hpp"

#include <algorithm>
#include <numeric>

namespace skeap::plus {

using consistency::OpKind;
using namespace proto;

PlusHeap::PlusHeap(const ldb::Topology& topo, std::uint64_t seed, kselect::SelectorConfig cfg)
    : WaveProtocol(topo, seed, cfg), ops_(topo.node_count()), stores_(topo.virtual_count()),
      next_seq_(topo.node_count(), 0) {}

std::uint64_t PlusHeap::insert(NodeId node, std::uint64_t priority, std::uint64_t payload) {
    return issue(node, true, priority, payload);
}

std::uint64_t PlusHeap::deletemin(NodeId node) { return issue(node, false, 0, 0); }

std::uint64_t PlusHeap::issue(NodeId node, bool is_insert, std::uint64_t priority, std::uint64_t payload) {
    const std::uint64_t seq = next_seq_.at(node)++;
    consistency::OperationRecord rec;
    rec.node = node;
    rec.seq = seq;
    rec.kind = is_insert ? OpKind::insert : OpKind::deletemin;
    if (is_insert) rec.element = Element{priority, node, seq, payload};
    const std::size_t idx = records_.size();
    record_of_[{node, seq}] = idx;
    records_.push_back(rec);
    serial_keys_.push_back(SerialKey{UINT64_MAX, 0, 0, 0, 0});
    (is_insert ? ops_[node].ins_buffer : ops_[node].del_buffer).push_back(idx);
    ++outstanding_;
    return seq;
}

std::uint64_t PlusHeap::stored_total() const {
    std::uint64_t total = 0;
    for (NodeId v = 0; v < topo_.node_count(); ++v) total += stored(v).size();
    return total;
}

Label PlusHeap::position_key(std::uint64_t pos, std::uint64_t epoch) const {
    return sim::hash_bits(sim::HashDomain::position_key, {pos, epoch}, seed_);
}

void PlusHeap::activate(NodeId node) {
    for (const auto& g : workload_.generate()) issue(node, g.is_insert, g.priority, 0);
    if (!started_ && node == ldb::vowner(topo_.root())) {
        started_ = true;
        start_epoch();
    }
}

// ---- anchor ----

void PlusHeap::start_epoch() {
    step_ = Step::ins_count;
    start_wave(CmdInsCount{epoch_});
}

void PlusHeap::on_wave_complete(const Command& cmd, const WaveReply& r) {
    switch (step_) {
        case Step::ins_count:
            m_ += r.a;
            if (r.a == 0) {
                step_ = Step::del_count;
                start_wave(CmdDelCount{epoch_});
            } else {
                step_ = Step::start_insert;
                start_wave(CmdStartInsert{epoch_});
            }
            return;
        case Step::start_insert:
            step_ = Step::del_count;
            start_wave(CmdDelCount{epoch_});
            return;
        case Step::del_count:
            deletes_ = r.a;
            kstar_ = std::min(deletes_, m_);
            if (deletes_ == 0) {
                if (r.b == 0 && workload_.closed()) {
                    halted_ = true;
                    step_ = Step::idle;
                    return;
                }
                ++epoch_;
                workload_.observe_epoch(epoch_);
                start_epoch();
                return;
            }
            ++deletemin_phases_;
            if (kstar_ == 0) {
                selected_.reset();
                after_selection();
                return;
            }
            step_ = Step::select;
            selector_.emplace(cfg_, topo_.node_count(), m_, kstar_);
            if (auto c = selector_->start()) start_wave(*c);
            if (selector_->status() != kselect::Selector::Status::running) after_selection();
            return;
        case Step::select:
            if (auto c = selector_->on_reply(r)) {
                start_wave(*c);
            } else {
                after_selection();
            }
            return;
        case Step::qual_count: {
            if (r.a != kstar_) throw SimulationFault("qualifying count differs from k*");
            // oracle view for the returned-set check
            std::vector<Element> all;
            for (NodeId v = 0; v < topo_.node_count(); ++v) all.insert(all.end(), stored(v).begin(), stored(v).end());
            std::sort(all.begin(), all.end());
            expected_.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(kstar_));
            step_ = Step::assign;
            start_wave(CmdAssign{epoch_, ldb::Interval::of(1, kstar_), ldb::Interval::of(1, deletes_), kstar_});
            return;
        }
        case Step::assign: {
            if (r.a != deletes_) throw SimulationFault("not every delete completed");
            m_ -= kstar_;
            auto got = returned_by_epoch_.size() > epoch_ ? returned_by_epoch_[epoch_] : std::vector<Element>{};
            std::sort(got.begin(), got.end());
            if (got != expected_) ++optimality_violations_;
            ++epoch_;
            workload_.observe_epoch(epoch_);
            start_epoch();
            return;
        }
        case Step::idle:
            break;
    }
    throw SimulationFault("wave completed with no epoch step pending: " + std::string(command_name(cmd)));
}

void PlusHeap::after_selection() {
    if (kstar_ > 0) {
        const auto& s = *selector_;
        ++selections_;
        selection_retries_ += s.retries();
        selection_p2_ += s.phase2_iterations();
        if (s.status() != kselect::Selector::Status::done) throw SimulationFault("selection failed: " + s.message());
        selected_ = *s.result();
    }
    step_ = Step::qual_count;
    start_wave(CmdQualCount{selected_ ? ExtElement::of(*selected_) : ExtElement::minus_inf()});
}

// ---- nodes ----

std::optional<WaveReply> PlusHeap::local_command(NodeId node, const Command& cmd) {
    NodeOps& o = ops_[node];
    const Address h = home(node);
    WaveReply r;
    if (std::holds_alternative<CmdInsCount>(cmd)) {
        o.ins_snapshot = std::move(o.ins_buffer);
        o.ins_buffer.clear();
        const std::uint64_t rank = topo_.dfs_rank(h);
        for (std::size_t idx : o.ins_snapshot) {
            records_[idx].epoch = std::get<CmdInsCount>(cmd).epoch;
            serial_keys_[idx] = SerialKey{records_[idx].epoch, 0, rank, records_[idx].seq, 0};
        }
        r.a = o.ins_snapshot.size();
        return r;
    }
    if (const auto* c = std::get_if<CmdStartInsert>(&cmd)) {
        r.a = o.ins_snapshot.size();
        if (o.ins_snapshot.empty()) return r;
        o.acks_pending = o.ins_snapshot.size();
        for (std::size_t idx : o.ins_snapshot) {
            const auto& rec = records_[idx];
            DhtPut m;
            m.route = ldb::start_route(topo_, h, sim::hash_bits(sim::HashDomain::random_key, {rec.node, rec.seq}, seed_));
            m.inputs = KeyInputs{{rec.node, rec.seq, 0}, 2};
            m.element = rec.element;
            m.purpose = DhtPurpose::random;
            m.want_ack = true;
            m.ack_to = h;
            m.op = OpRef{rec.node, rec.seq};
            on_put(h, m);
        }
        (void)c;
        return std::nullopt;
    }
    if (std::holds_alternative<CmdDelCount>(cmd)) {
        o.del_snapshot = std::move(o.del_buffer);
        o.del_buffer.clear();
        reset_window(node);
        for (std::size_t idx : o.del_snapshot) records_[idx].epoch = std::get<CmdDelCount>(cmd).epoch;
        r.a = o.del_snapshot.size();
        const bool quiet = o.del_snapshot.empty() && o.ins_buffer.empty() && workload_.closed();
        r.b = quiet ? 0 : 1;
        return r;
    }
    if (const auto* c = std::get_if<CmdQualCount>(&cmd)) {
        o.qual_bound = c->bound;
        const auto& items = stored(node);
        r.a = static_cast<std::uint64_t>(std::partition_point(items.begin(), items.end(), [&](const Element& e) {
                                             return ExtElement::of(e) <= c->bound;
                                         }) -
                                         items.begin());
        return r;
    }
    if (const auto* c = std::get_if<CmdAssign>(&cmd)) {
        std::vector<Element> mine;
        if (o.qual_bound.finite()) mine = take_up_to(node, o.qual_bound.e);
        if (mine.size() != c->qualifying.size()) throw SimulationFault("qualifying share does not match");
        for (std::size_t i = 0; i < mine.size(); ++i) {
            const std::uint64_t pos = c->qualifying.lo + i;
            DhtPut m;
            m.route = ldb::start_route(topo_, h, position_key(pos, c->epoch));
            m.inputs = KeyInputs{{pos, c->epoch, 0}, 2};
            m.element = mine[i];
            m.purpose = DhtPurpose::position;
            on_put(h, m);
        }
        if (o.del_snapshot.size() != c->deletes.size()) throw SimulationFault("delete share does not match");
        o.del_count = o.del_snapshot.size();
        o.gets_pending = 0;
        std::vector<std::size_t> gets;
        for (std::size_t i = 0; i < o.del_snapshot.size(); ++i) {
            const std::size_t idx = o.del_snapshot[i];
            const std::uint64_t pos = c->deletes.lo + i;
            auto& rec = records_[idx];
            rec.assigned_position = pos;
            if (pos > c->kstar) {
                rec.assigned_bottom = true;
                serial_keys_[idx] = SerialKey{rec.epoch, 2, pos, 0, 0};
                complete_delete(idx, std::nullopt);
            } else {
                ++o.gets_pending;
                gets.push_back(idx);
            }
        }
        r.a = o.del_count;
        if (gets.empty()) return r;
        for (std::size_t idx : gets) {
            const auto& rec = records_[idx];
            DhtGet m;
            m.route = ldb::start_route(topo_, h, position_key(rec.assigned_position, c->epoch));
            m.inputs = KeyInputs{{rec.assigned_position, c->epoch, 0}, 2};
            m.requester = h;
            m.op = OpRef{rec.node, rec.seq};
            on_get(h, m);
        }
        return std::nullopt;
    }
    if (std::holds_alternative<CmdHalt>(cmd)) return r;
    return WaveProtocol::local_command(node, cmd);
}

void PlusHeap::on_put(Address at, const DhtPut& m) {
    DhtPut fwd = m;
    if (auto next = ldb::next_hop(topo_, at, fwd.route)) {
        send(at, *next, std::move(fwd));
        return;
    }
    if (m.purpose == DhtPurpose::random) {
        store_element(ldb::vowner(at), m.element);
        send(at, m.ack_to, PutAck{m.op});
        return;
    }
    if (auto waiting = stores_[at].put(m.route.key, m.element)) {
        send(at, waiting->requester, DhtReply{waiting->op, m.element});
    }
}

void PlusHeap::on_get(Address at, const DhtGet& m) {
    DhtGet fwd = m;
    if (auto next = ldb::next_hop(topo_, at, fwd.route)) {
        send(at, *next, std::move(fwd));
        return;
    }
    if (auto e = stores_[at].get(m.route.key, GetWait{m.requester, m.op})) {
        send(at, m.requester, DhtReply{m.op, *e});
    }
}

void PlusHeap::complete_delete(std::size_t record, std::optional<Element> e) {
    auto& rec = records_[record];
    rec.returned = e;
    if (e) {
        serial_keys_[record] = SerialKey{rec.epoch, 1, e->priority, e->origin, e->seq};
        if (returned_by_epoch_.size() <= rec.epoch) returned_by_epoch_.resize(rec.epoch + 1);
        returned_by_epoch_[rec.epoch].push_back(*e);
    }
    --outstanding_;
}

void PlusHeap::on_other(const sim::Envelope<Message>& env) {
    const Address at = env.dst;
    if (const auto* put = std::get_if<DhtPut>(&env.payload)) {
        on_put(at, *put);
    } else if (const auto* get = std::get_if<DhtGet>(&env.payload)) {
        on_get(at, *get);
    } else if (std::holds_alternative<PutAck>(env.payload)) {
        const NodeId node = ldb::vowner(at);
        NodeOps& o = ops_[node];
        if (o.acks_pending == 0) throw SimulationFault("unexpected put acknowledgement");
        --outstanding_;
        if (--o.acks_pending == 0) {
            WaveReply r;
            r.a = o.ins_snapshot.size();
            o.ins_snapshot.clear();
            finish_local(node, r);
        }
    } else if (const auto* reply = std::get_if<DhtReply>(&env.payload)) {
        const NodeId node = ldb::vowner(at);
        NodeOps& o = ops_[node];
        if (o.gets_pending == 0) throw SimulationFault("unexpected DHT reply");
        complete_delete(record_of_.at({reply->op.node, reply->op.seq}), reply->element);
        if (--o.gets_pending == 0) {
            WaveReply r;
            r.a = o.del_count;
            finish_local(node, r);
        }
    } else {
        WaveProtocol::on_other(env);
    }
}

consistency::History PlusHeap::history() const {
    consistency::History h;
    h.tie_policy = consistency::TiePolicy::element_order;
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

}  // namespace skeap::plus
