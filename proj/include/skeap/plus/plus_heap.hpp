#pragma once

#include "skeap/consistency/history.hpp"
#include "skeap/kselect/selector.hpp"
#include "skeap/kselect/wave.hpp"
#include "skeap/ldb/dht_store.hpp"
#include "skeap/proto/workload.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace skeap::plus {

using kselect::Engine;
using proto::Message;
using ldb::Label;

// SKEAP+ for arbitrary priorities. Epochs alternate an insert phase (elements go to random
// DHT keys, acknowledged) and a deletemin phase (select the k*-th smallest element, then
// move the k* smallest to position keys where the deletes fetch them).
class PlusHeap : public kselect::WaveProtocol {
public:
    PlusHeap(const ldb::Topology& topo, std::uint64_t seed, kselect::SelectorConfig cfg = {});

    void set_workload(const proto::WorkloadConfig& w) { workload_.configure(w); }

    std::uint64_t insert(NodeId node, std::uint64_t priority, std::uint64_t payload = 0);
    std::uint64_t deletemin(NodeId node);

    void activate(NodeId node) override;

    bool finished() const noexcept { return halted_ && outstanding_ == 0; }
    std::size_t outstanding() const noexcept { return outstanding_; }
    std::uint64_t epoch() const noexcept { return epoch_; }
    // Anchor's count of stored elements.
    std::uint64_t anchor_m() const noexcept { return m_; }
    std::uint64_t stored_total() const;

    // Deletemin phases whose returned multiset differed from the k* smallest stored elements.
    std::uint64_t optimality_violations() const noexcept { return optimality_violations_; }
    std::uint64_t deletemin_phases() const noexcept { return deletemin_phases_; }
    std::uint64_t selections() const noexcept { return selections_; }
    std::uint64_t selection_retries() const noexcept { return selection_retries_; }
    std::uint64_t selection_phase2_iterations() const noexcept { return selection_p2_; }

    // Records with serial indices of the per-epoch constructed order.
    consistency::History history() const;

protected:
    void on_wave_complete(const proto::Command& cmd, const proto::WaveReply& reply) override;
    std::optional<proto::WaveReply> local_command(NodeId node, const proto::Command& cmd) override;
    void on_other(const sim::Envelope<Message>& env) override;

private:
    struct GetWait {
        Address requester = 0;
        proto::OpRef op;
    };
    struct NodeOps {
        std::vector<std::size_t> ins_buffer, del_buffer;
        std::vector<std::size_t> ins_snapshot, del_snapshot;
        std::uint64_t acks_pending = 0;
        std::uint64_t gets_pending = 0;
        std::uint64_t del_count = 0;
        proto::ExtElement qual_bound;
    };
    struct SerialKey {
        std::uint64_t epoch = 0, cls = 0, a = 0, b = 0, c = 0;
        auto operator<=>(const SerialKey&) const = default;
    };
    enum class Step : std::uint8_t { idle, ins_count, start_insert, del_count, select, qual_count, assign };

    std::uint64_t issue(NodeId node, bool is_insert, std::uint64_t priority, std::uint64_t payload);
    void start_epoch();
    void after_selection();
    void on_put(Address at, const proto::DhtPut& m);
    void on_get(Address at, const proto::DhtGet& m);
    void complete_delete(std::size_t record, std::optional<Element> e);
    Label position_key(std::uint64_t pos, std::uint64_t epoch) const;

    proto::Workload workload_;
    std::vector<NodeOps> ops_;
    std::vector<ldb::DhtStore<Element, GetWait>> stores_;
    std::vector<std::uint64_t> next_seq_;
    std::vector<consistency::OperationRecord> records_;
    std::vector<SerialKey> serial_keys_;
    std::map<std::pair<NodeId, std::uint64_t>, std::size_t> record_of_;
    std::size_t outstanding_ = 0;

    // anchor
    Step step_ = Step::idle;
    bool started_ = false;
    bool halted_ = false;
    std::uint64_t epoch_ = 0;
    std::uint64_t m_ = 0;
    std::uint64_t deletes_ = 0;
    std::uint64_t kstar_ = 0;
    std::optional<kselect::Selector> selector_;
    std::optional<Element> selected_;
    std::vector<Element> expected_;  // k* smallest at the start of the assignment, for the check
    std::vector<std::vector<Element>> returned_by_epoch_;
    std::uint64_t optimality_violations_ = 0;
    std::uint64_t deletemin_phases_ = 0;
    std::uint64_t selections_ = 0;
    std::uint64_t selection_retries_ = 0;
    std::uint64_t selection_p2_ = 0;
};

}  // namespace skeap::plus
