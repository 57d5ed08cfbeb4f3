#pragma once

#include "skeap/consistency/history.hpp"
#include "skeap/ldb/dht_store.hpp"
#include "skeap/ldb/topology.hpp"
#include "skeap/proto/messages.hpp"
#include "skeap/proto/workload.hpp"
#include "skeap/sim/engine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace skeap::proto {

using Engine = sim::Engine<Message>;

// SKEAP for a constant number of priorities. Requests are buffered at a virtual node
// (normally the middle node of the issuing real node), batched up the aggregation tree,
// assigned positions by the anchor and executed against the DHT.
class ConstHeap : public sim::Process<Message> {
public:
    ConstHeap(const ldb::Topology& topo, std::size_t priorities, std::uint64_t seed);

    void attach(Engine& engine) { engine_ = &engine; }
    void set_workload(const WorkloadConfig& w) { workload_.configure(w); }

    std::uint64_t insert(NodeId node, std::uint32_t priority, std::uint64_t payload = 0);
    std::uint64_t deletemin(NodeId node);
    // Issue at a specific virtual node instead of the node's middle node.
    std::uint64_t insert_at(Address vnode, std::uint32_t priority, std::uint64_t payload = 0);
    std::uint64_t deletemin_at(Address vnode);

    void deliver(const sim::Envelope<Message>& env) override;
    void activate(NodeId node) override;

    // Finished after the anchor halted and every request completed.
    bool finished() const noexcept;
    std::size_t outstanding() const noexcept { return outstanding_; }
    std::uint64_t epoch() const noexcept { return vstate_[topo_.root()].epoch; }
    const heap::AnchorState& anchor() const noexcept { return anchor_; }

    // Records with serial indices in anchor-processing order (FIFO ties within a priority).
    consistency::History history() const;

    void keep_shares(bool on) { keep_shares_ = on; }
    // Share each virtual node applied in the given epoch, for inspection.
    const std::map<std::pair<std::uint64_t, Address>, heap::Share>& applied_shares() const { return applied_; }
    // Combined batches the anchor processed, by epoch.
    const std::vector<heap::Batch>& anchor_batches() const { return anchor_batches_; }

    std::size_t stored_at(Address vnode) const { return vstate_.at(vnode).store.size(); }

private:
    struct Op {
        std::size_t record = 0;
        heap::BufferedOp op;
        std::uint64_t payload = 0;
    };
    struct GetWait {
        Address requester = 0;
        OpRef op;
    };
    struct VState {
        std::vector<Op> buffer;
        std::vector<Op> inflight;
        heap::Batch own;
        std::vector<std::optional<heap::Batch>> child_batches;
        std::size_t children_in = 0;
        bool children_quiet = true;
        bool own_quiet = true;
        bool waiting = false;
        bool halted = false;
        std::uint64_t epoch = 0;
        ldb::DhtStore<Element, GetWait> store;
    };
    struct SerialKey {
        std::uint64_t epoch = 0, entry = 0, kind = 0, rank = 0, seq = 0;
        auto operator<=>(const SerialKey&) const = default;
    };

    std::uint64_t issue(Address vnode, bool is_insert, std::uint32_t priority, std::uint64_t payload);
    void try_phase1(Address v);
    void anchor_process(const heap::Batch& combined, bool quiet);
    void apply_share(Address v, const heap::Share& share);
    void halt(Address v);
    void start_put(Address v, std::uint32_t p, std::uint64_t pos, const Element& e, OpRef op);
    void start_get(Address v, std::uint32_t p, std::uint64_t pos, OpRef op);
    void on_put(Address at, const DhtPut& m);
    void on_get(Address at, const DhtGet& m);
    void complete_delete(std::size_t record, std::optional<Element> e);
    void send(Address src, Address dst, Message m);
    Label position_key(std::uint64_t p, std::uint64_t pos) const;

    const ldb::Topology& topo_;
    std::size_t priorities_;
    std::uint64_t seed_;
    Engine* engine_ = nullptr;
    Workload workload_;
    heap::AnchorState anchor_;
    std::vector<VState> vstate_;
    std::vector<std::uint64_t> next_seq_;
    std::vector<consistency::OperationRecord> records_;
    std::vector<SerialKey> serial_keys_;
    std::map<std::pair<NodeId, std::uint64_t>, std::size_t> record_of_;
    std::size_t outstanding_ = 0;
    std::map<std::pair<std::uint64_t, Address>, heap::Share> applied_;
    std::vector<heap::Batch> anchor_batches_;
    bool keep_shares_ = false;
};

}  // namespace skeap::proto
