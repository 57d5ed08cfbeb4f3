#pragma once

#include "skeap/kselect/selector.hpp"
#include "skeap/ldb/topology.hpp"
#include "skeap/proto/messages.hpp"
#include "skeap/sim/engine.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <unordered_set>
#include <variant>
#include <vector>

namespace skeap::kselect {

using proto::Message;
using Engine = sim::Engine<Message>;

// Anchor-driven tree waves plus the node-side half of the selection protocol.
//
// The anchor issues one command at a time. Each virtual node forwards it to its children,
// runs its own part (only middle nodes act for their real node, the others contribute a
// neutral value) and sends the combined reply up once all children answered. Counts
// aggregated by sample, delete-count and qualifying-count waves are memorized so that a
// later position interval can be decomposed in the same order.
class WaveProtocol : public sim::Process<Message> {
public:
    WaveProtocol(const ldb::Topology& topo, std::uint64_t seed, SelectorConfig cfg);

    void attach(Engine& engine) { engine_ = &engine; }
    void deliver(const sim::Envelope<Message>& env) override;
    void activate(NodeId) override {}

    const ldb::Topology& topology() const noexcept { return topo_; }
    const SelectorConfig& selector_config() const noexcept { return cfg_; }

    // Elements stored at a real node, ascending.
    const std::vector<Element>& stored(NodeId v) const { return nodes_.at(v).items; }
    // Union of all candidate windows, ascending.
    std::vector<Element> candidates() const;
    std::size_t candidate_count() const;

    // Mean over real nodes of the number of copy trees placing a copy there, one value per sort.
    std::vector<double> copy_tree_participation() const;

    // Root vectors of finished copy trees.
    struct SortRecord {
        std::uint64_t sort_id = 0;
        std::uint64_t i = 0;
        Element c;
        std::uint64_t L = 0, R = 0;
    };
    const std::vector<SortRecord>& sort_log() const noexcept { return sort_log_; }

protected:
    static constexpr std::size_t command_kinds = std::variant_size_v<proto::Command>;

    void start_wave(const proto::Command& cmd);
    virtual void on_wave_complete(const proto::Command& cmd, const proto::WaveReply& reply) = 0;
    // Node-local part of commands this class does not handle itself. Returning nullopt means
    // the reply follows later through finish_local().
    virtual std::optional<proto::WaveReply> local_command(NodeId node, const proto::Command& cmd);
    virtual void on_other(const sim::Envelope<Message>& env);
    void finish_local(NodeId node, const proto::WaveReply& reply);

    void send(Address src, Address dst, Message m);
    void store_element(NodeId v, const Element& e);
    std::vector<Element> take_up_to(NodeId v, const Element& bound);
    void reset_window(NodeId v);
    Address home(NodeId v) const noexcept { return ldb::vaddr(v, ldb::VKind::middle); }

    const ldb::Topology& topo_;
    std::uint64_t seed_;
    SelectorConfig cfg_;
    Engine* engine_ = nullptr;

private:
    struct Slot {
        std::uint64_t wave = 0;
        proto::Command cmd;
        std::vector<std::optional<proto::WaveReply>> child;
        std::size_t child_in = 0;
        std::optional<proto::WaveReply> own;
        bool active = false;
        std::array<std::vector<std::uint64_t>, command_kinds> memo;
    };
    struct NodeData {
        std::vector<Element> items;
        std::size_t lo = 0, hi = 0;  // candidate window [lo, hi)
        std::vector<Element> chosen;
        std::uint64_t sort_id = 0;
        std::uint64_t share_lo = 0;
        std::uint64_t sort_pending = 0;
        std::uint64_t want_lo = 0, want_hi = 0;
        proto::WaveReply sort_reply;
    };
    struct CopyNode {
        Element c;
        Address parent = 0;
        std::uint64_t parent_j = 0;
        bool is_root = false;
        std::uint64_t expected = 0, received = 0;
        std::uint64_t L = 0, R = 0;
    };
    using CopyKey = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>;

    void on_wave_down(Address v, std::uint64_t wave, const proto::Command& cmd);
    void on_wave_up(Address v, Address child, std::uint64_t wave, const proto::WaveReply& r);
    void try_complete(Address v);
    std::vector<proto::Command> split(Address v, const proto::Command& cmd) const;
    std::optional<proto::WaveReply> run_local(NodeId node, const proto::Command& cmd);

    std::optional<proto::WaveReply> local_bounds(NodeData& d, const proto::CmdBounds& c) const;
    proto::WaveReply local_prune(NodeData& d, const proto::CmdPrune& c) const;
    proto::WaveReply local_rank(const NodeData& d, const proto::CmdRank& c) const;
    proto::WaveReply local_sample(NodeId node, NodeData& d, const proto::CmdSample& c) const;
    std::optional<proto::WaveReply> local_sort(NodeId node, NodeData& d, const proto::CmdSort& c);

    void on_seed(Address at, const proto::SortSeed& m);
    void place_copy(Address at, const proto::CopyPlace& m, bool is_root);
    void on_copy(Address at, const proto::CopyPlace& m);
    void on_compare(Address at, const proto::Compare& m);
    void add_vote(Address at, std::uint64_t sort_id, std::uint64_t i, std::uint64_t j, std::uint64_t L,
                  std::uint64_t R);
    void on_result(Address at, const proto::SortResult& m);

    std::vector<Slot> slots_;
    std::vector<NodeData> nodes_;
    std::vector<std::map<CopyKey, CopyNode>> copies_;
    std::vector<std::map<CopyKey, proto::Compare>> rendezvous_;
    std::uint64_t wave_ = 0;
    std::map<std::uint64_t, std::unordered_set<std::uint64_t>> participation_;
    std::vector<SortRecord> sort_log_;
};

}  // namespace skeap::kselect
