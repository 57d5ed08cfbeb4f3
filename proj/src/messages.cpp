#include "skeap/proto/messages.hpp"

#include "skeap/sim/bits.hpp"

namespace skeap::proto {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using sim::BitCounter;

// The key and waypoint follow from the origin, the hash inputs and the hop count.
std::uint64_t route_bits(const RouteState& r) {
    return BitCounter{}.natural(r.origin).natural(r.hops_left).natural(static_cast<std::uint64_t>(r.stage)).total();
}

std::uint64_t inputs_bits(const KeyInputs& k) {
    BitCounter b;
    for (std::uint8_t i = 0; i < k.count; ++i) b.natural(k.v[i]);
    return b.total();
}

std::uint64_t bound_bits(const Bound& b) { return ext_bits(b.at) + 1; }

std::uint64_t command_bits(const Command& c) {
    BitCounter b;
    b.natural(c.index());
    std::visit(overloaded{
                   [&](const CmdBounds& x) { b.natural(x.k).natural(x.n); },
                   [&](const CmdPrune& x) { b.add(bound_bits(x.lo)).add(bound_bits(x.hi)); },
                   [&](const CmdRank& x) { b.add(ext_bits(x.cl)).add(ext_bits(x.cr)); },
                   [&](const CmdSample& x) { b.natural(x.draw).natural(x.N); },
                   [&](const CmdSort& x) {
                       b.add(ldb::interval_bits(x.share)).natural(x.count).natural(x.sort_id);
                       b.natural(x.want_lo).natural(x.want_hi);
                   },
                   [&](const CmdInsCount& x) { b.natural(x.epoch); },
                   [&](const CmdStartInsert& x) { b.natural(x.epoch); },
                   [&](const CmdDelCount& x) { b.natural(x.epoch); },
                   [&](const CmdQualCount& x) { b.add(ext_bits(x.bound)); },
                   [&](const CmdAssign& x) {
                       b.natural(x.epoch).add(ldb::interval_bits(x.qualifying)).add(ldb::interval_bits(x.deletes));
                       b.natural(x.kstar);
                   },
                   [&](const CmdHalt&) {},
               },
               c);
    return b.total();
}

}  // namespace

std::uint64_t ext_bits(const ExtElement& x) noexcept {
    return 2 + (x.finite() ? element_bits(x.e) : 0);
}

std::uint64_t size_bits(const Message& m) {
    BitCounter b;
    b.natural(m.index());
    std::visit(overloaded{
                   [&](const Ping&) {},
                   [&](const BatchUp& x) { b.natural(x.epoch).add(heap::batch_bits(x.batch)).add(1); },
                   [&](const ShareDown& x) { b.natural(x.epoch).add(heap::share_bits(x.share)).add(1); },
                   [&](const DhtPut& x) {
                       b.add(route_bits(x.route)).add(inputs_bits(x.inputs)).add(element_bits(x.element));
                       b.add(2);
                       if (x.want_ack) b.natural(x.ack_to);
                       b.natural(x.op.node).natural(x.op.seq);
                   },
                   [&](const DhtGet& x) {
                       b.add(route_bits(x.route)).add(inputs_bits(x.inputs)).natural(x.requester);
                       b.natural(x.op.node).natural(x.op.seq);
                   },
                   [&](const DhtReply& x) {
                       b.natural(x.op.node).natural(x.op.seq).add(1);
                       if (x.element) b.add(element_bits(*x.element));
                   },
                   [&](const PutAck& x) { b.natural(x.op.node).natural(x.op.seq); },
                   [&](const WaveDown& x) { b.natural(x.wave).add(command_bits(x.cmd)); },
                   [&](const WaveUp& x) {
                       b.natural(x.wave).natural(x.reply.a).natural(x.reply.b);
                       b.add(ext_bits(x.reply.x)).add(ext_bits(x.reply.y));
                   },
                   [&](const SortSeed& x) {
                       b.add(route_bits(x.route)).natural(x.sort_id).natural(x.i).natural(x.count);
                       b.add(element_bits(x.c)).natural(x.origin);
                   },
                   [&](const CopyPlace& x) {
                       b.add(route_bits(x.route)).natural(x.sort_id).natural(x.i).add(ldb::interval_bits(x.range));
                       b.natural(x.depth).add(element_bits(x.c)).natural(x.parent).natural(x.parent_j);
                   },
                   [&](const Compare& x) {
                       b.add(route_bits(x.route)).natural(x.sort_id).natural(x.i).natural(x.j);
                       b.add(element_bits(x.c)).natural(x.reply_to);
                   },
                   [&](const Vote& x) { b.natural(x.sort_id).natural(x.i).natural(x.j).natural(x.L).natural(x.R); },
                   [&](const TreeSum& x) { b.natural(x.sort_id).natural(x.i).natural(x.j).natural(x.L).natural(x.R); },
                   [&](const SortResult& x) { b.natural(x.sort_id).natural(x.i).natural(x.order); },
               },
               m);
    return b.total();
}

std::string_view command_name(const Command& c) {
    static constexpr std::string_view names[] = {"bounds",     "prune",        "rank",       "sample",
                                                 "sort",       "ins_count",    "start_insert", "del_count",
                                                 "qual_count", "assign",       "halt"};
    return names[c.index()];
}

std::string_view kind_name(const Message& m) {
    static constexpr std::string_view names[] = {"ping",     "batch_up",   "share_down", "dht_put",  "dht_get",
                                                 "dht_reply", "put_ack",   "wave_down",  "wave_up",  "sort_seed",
                                                 "copy_place", "compare",  "vote",       "tree_sum", "sort_result"};
    return names[m.index()];
}

}  // namespace skeap::proto
