#include "skeap/kselect/wave.hpp"

#include "skeap/ldb/routing.hpp"
#include "skeap/ldb/tree_ops.hpp"
#include "skeap/sim/hash.hpp"

#include <algorithm>

namespace skeap::kselect {

using namespace proto;

namespace {

constexpr std::size_t sample_kind = 3;
constexpr std::size_t sort_kind = 4;
constexpr std::size_t del_count_kind = 7;
constexpr std::size_t qual_count_kind = 8;
constexpr std::size_t assign_kind = 9;

static_assert(std::is_same_v<std::variant_alternative_t<sample_kind, Command>, CmdSample>);
static_assert(std::is_same_v<std::variant_alternative_t<sort_kind, Command>, CmdSort>);
static_assert(std::is_same_v<std::variant_alternative_t<del_count_kind, Command>, CmdDelCount>);
static_assert(std::is_same_v<std::variant_alternative_t<qual_count_kind, Command>, CmdQualCount>);
static_assert(std::is_same_v<std::variant_alternative_t<assign_kind, Command>, CmdAssign>);

bool memorized(std::size_t kind) {
    return kind == sample_kind || kind == del_count_kind || kind == qual_count_kind;
}

WaveReply neutral(const Command& cmd) {
    WaveReply r;
    if (std::holds_alternative<CmdBounds>(cmd)) r.y = ExtElement::minus_inf();
    return r;
}

void combine(const Command& cmd, WaveReply& acc, const WaveReply& r) {
    acc.a += r.a;
    acc.b += r.b;
    acc.x = std::min(acc.x, r.x);
    acc.y = std::holds_alternative<CmdBounds>(cmd) ? std::max(acc.y, r.y) : std::min(acc.y, r.y);
}

std::uint64_t pair_key(std::uint64_t i, std::uint64_t j, std::uint64_t sort_id, std::uint64_t seed) {
    return sim::hash_bits(sim::HashDomain::sort_pair, {std::min(i, j), std::max(i, j), sort_id}, seed);
}

}  // namespace

WaveProtocol::WaveProtocol(const ldb::Topology& topo, std::uint64_t seed, SelectorConfig cfg)
    : topo_(topo), seed_(seed), cfg_(cfg), slots_(topo.virtual_count()), nodes_(topo.node_count()),
      copies_(topo.virtual_count()), rendezvous_(topo.virtual_count()) {}

void WaveProtocol::send(Address src, Address dst, Message m) {
    if (engine_ == nullptr) throw SimulationFault("protocol not attached to an engine");
    engine_->send(src, dst, std::move(m));
}

std::vector<Element> WaveProtocol::candidates() const {
    std::vector<Element> out;
    for (const auto& d : nodes_) out.insert(out.end(), d.items.begin() + d.lo, d.items.begin() + d.hi);
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t WaveProtocol::candidate_count() const {
    std::size_t c = 0;
    for (const auto& d : nodes_) c += d.hi - d.lo;
    return c;
}

std::vector<double> WaveProtocol::copy_tree_participation() const {
    std::vector<double> out;
    for (const auto& [id, set] : participation_) {
        out.push_back(static_cast<double>(set.size()) / static_cast<double>(topo_.node_count()));
    }
    return out;
}

void WaveProtocol::store_element(NodeId v, const Element& e) {
    auto& items = nodes_.at(v).items;
    items.insert(std::upper_bound(items.begin(), items.end(), e), e);
    reset_window(v);
}

std::vector<Element> WaveProtocol::take_up_to(NodeId v, const Element& bound) {
    auto& items = nodes_.at(v).items;
    const auto cut = std::upper_bound(items.begin(), items.end(), bound);
    std::vector<Element> out(items.begin(), cut);
    items.erase(items.begin(), cut);
    reset_window(v);
    return out;
}

void WaveProtocol::reset_window(NodeId v) {
    auto& d = nodes_.at(v);
    d.lo = 0;
    d.hi = d.items.size();
}

// ---- waves ----

void WaveProtocol::start_wave(const Command& cmd) { on_wave_down(topo_.root(), ++wave_, cmd); }

std::vector<Command> WaveProtocol::split(Address v, const Command& cmd) const {
    const std::size_t parts = topo_.children(v).size() + 1;
    const auto& memo = slots_[v].memo;
    auto counts = [&](std::size_t kind) -> const std::vector<std::uint64_t>& {
        if (memo[kind].size() != parts) throw SimulationFault("no memorized counts to decompose with");
        return memo[kind];
    };
    std::vector<Command> out;
    if (const auto* s = std::get_if<CmdSort>(&cmd)) {
        for (const auto& iv : ldb::split_interval(s->share, counts(sample_kind))) {
            out.push_back(CmdSort{iv, s->count, s->sort_id, s->want_lo, s->want_hi});
        }
    } else if (const auto* a = std::get_if<CmdAssign>(&cmd)) {
        const auto q = ldb::split_interval(a->qualifying, counts(qual_count_kind));
        const auto d = ldb::split_interval(a->deletes, counts(del_count_kind));
        for (std::size_t i = 0; i < parts; ++i) out.push_back(CmdAssign{a->epoch, q[i], d[i], a->kstar});
    } else {
        out.assign(parts, cmd);
    }
    return out;
}

void WaveProtocol::on_wave_down(Address v, std::uint64_t wave, const Command& cmd) {
    Slot& s = slots_[v];
    if (s.active) throw SimulationFault("wave started before the previous one completed");
    const auto children = topo_.children(v);
    const auto parts = split(v, cmd);
    s.wave = wave;
    s.cmd = cmd;
    s.child.assign(children.size(), std::nullopt);
    s.child_in = 0;
    s.own.reset();
    s.active = true;
    for (std::size_t i = 0; i < children.size(); ++i) send(v, children[i], WaveDown{wave, parts[i + 1]});
    if (ldb::vkind(v) == ldb::VKind::middle) {
        s.own = run_local(ldb::vowner(v), parts[0]);
    } else {
        s.own = neutral(cmd);
    }
    try_complete(v);
}

void WaveProtocol::on_wave_up(Address v, Address child, std::uint64_t wave, const WaveReply& r) {
    Slot& s = slots_[v];
    const auto children = topo_.children(v);
    const auto it = std::find(children.begin(), children.end(), child);
    if (it == children.end()) throw SimulationFault("wave reply from a non-child");
    auto& slot = s.child[static_cast<std::size_t>(it - children.begin())];
    if (!s.active || s.wave != wave || slot) throw SimulationFault("wave reply out of turn");
    slot = r;
    ++s.child_in;
    try_complete(v);
}

void WaveProtocol::finish_local(NodeId node, const WaveReply& reply) {
    const Address v = home(node);
    Slot& s = slots_[v];
    if (!s.active || s.own) throw SimulationFault("local reply without a pending wave");
    s.own = reply;
    try_complete(v);
}

void WaveProtocol::try_complete(Address v) {
    Slot& s = slots_[v];
    if (!s.active || !s.own || s.child_in < s.child.size()) return;
    WaveReply total = *s.own;
    for (const auto& c : s.child) combine(s.cmd, total, *c);
    const std::size_t kind = s.cmd.index();
    if (memorized(kind)) {
        auto& memo = s.memo[kind];
        memo.clear();
        memo.push_back(s.own->a);
        for (const auto& c : s.child) memo.push_back(c->a);
    }
    s.active = false;
    if (v == topo_.root()) {
        const Command cmd = s.cmd;
        on_wave_complete(cmd, total);
    } else {
        send(v, *topo_.parent(v), WaveUp{s.wave, total});
    }
}

std::optional<WaveReply> WaveProtocol::local_command(NodeId, const Command& cmd) {
    throw SimulationFault("unsupported command " + std::string(command_name(cmd)));
}

void WaveProtocol::on_other(const sim::Envelope<Message>& env) {
    throw SimulationFault("unexpected message " + std::string(kind_name(env.payload)));
}

std::optional<WaveReply> WaveProtocol::run_local(NodeId node, const Command& cmd) {
    NodeData& d = nodes_[node];
    if (const auto* c = std::get_if<CmdBounds>(&cmd)) return local_bounds(d, *c);
    if (const auto* c = std::get_if<CmdPrune>(&cmd)) return local_prune(d, *c);
    if (const auto* c = std::get_if<CmdRank>(&cmd)) return local_rank(d, *c);
    if (const auto* c = std::get_if<CmdSample>(&cmd)) return local_sample(node, d, *c);
    if (const auto* c = std::get_if<CmdSort>(&cmd)) return local_sort(node, d, *c);
    return local_command(node, cmd);
}

// ---- selection steps at a node ----

std::optional<WaveReply> WaveProtocol::local_bounds(NodeData& d, const CmdBounds& c) const {
    const std::uint64_t size = d.hi - d.lo;
    const std::uint64_t lower = c.k / c.n;
    const std::uint64_t upper = std::min((c.k + c.n - 1) / c.n, size);
    WaveReply r;
    if (lower == 0) {
        r.x = ExtElement::minus_inf();
    } else if (size < lower) {
        r.x = ExtElement::plus_inf();
    } else {
        r.x = ExtElement::of(d.items[d.lo + lower - 1]);
    }
    r.y = upper == 0 ? ExtElement::minus_inf() : ExtElement::of(d.items[d.lo + upper - 1]);
    r.a = upper;
    return r;
}

WaveReply WaveProtocol::local_prune(NodeData& d, const CmdPrune& c) const {
    const auto first = d.items.begin() + static_cast<std::ptrdiff_t>(d.lo);
    const auto last = d.items.begin() + static_cast<std::ptrdiff_t>(d.hi);
    const auto new_lo = std::partition_point(first, last, [&](const Element& e) {
        const auto x = ExtElement::of(e);
        return c.lo.strict ? !(x > c.lo.at) : !(x >= c.lo.at);
    });
    const auto new_hi = std::partition_point(new_lo, last, [&](const Element& e) {
        const auto x = ExtElement::of(e);
        return c.hi.strict ? x < c.hi.at : x <= c.hi.at;
    });
    WaveReply r;
    r.a = static_cast<std::uint64_t>(new_lo - first);
    r.b = static_cast<std::uint64_t>(last - new_hi);
    d.lo = static_cast<std::size_t>(new_lo - d.items.begin());
    d.hi = static_cast<std::size_t>(new_hi - d.items.begin());
    return r;
}

WaveReply WaveProtocol::local_rank(const NodeData& d, const CmdRank& c) const {
    const auto first = d.items.begin() + static_cast<std::ptrdiff_t>(d.lo);
    const auto last = d.items.begin() + static_cast<std::ptrdiff_t>(d.hi);
    auto below = [&](const ExtElement& bound) {
        return static_cast<std::uint64_t>(
            std::partition_point(first, last, [&](const Element& e) { return ExtElement::of(e) < bound; }) - first);
    };
    WaveReply r;
    r.a = below(c.cl);
    r.b = below(c.cr);
    return r;
}

WaveReply WaveProtocol::local_sample(NodeId, NodeData& d, const CmdSample& c) const {
    const double p = sample_probability(cfg_, topo_.node_count(), c.N);
    d.chosen.clear();
    for (std::size_t i = d.lo; i < d.hi; ++i) {
        const Element& e = d.items[i];
        if (c.N == 0 || sim::hash_unit(sim::HashDomain::sample, {e.priority, e.origin, e.seq, c.draw}, seed_) < p) {
            d.chosen.push_back(e);
        }
    }
    WaveReply r;
    r.a = d.chosen.size();
    return r;
}

// ---- distributed sorting ----

std::optional<WaveReply> WaveProtocol::local_sort(NodeId node, NodeData& d, const CmdSort& c) {
    if (c.share.size() != d.chosen.size()) throw SimulationFault("sort share does not match the sample");
    d.sort_id = c.sort_id;
    d.share_lo = c.share.lo;
    d.want_lo = c.want_lo;
    d.want_hi = c.want_hi;
    d.sort_reply = WaveReply{};
    if (d.chosen.empty()) return d.sort_reply;
    d.sort_pending = d.chosen.size();
    const Address h = home(node);
    for (std::size_t idx = 0; idx < d.chosen.size(); ++idx) {
        const std::uint64_t pos = c.share.lo + idx;
        SortSeed m;
        m.route = ldb::start_route(topo_, h, sim::hash_bits(sim::HashDomain::sort_position, {pos, c.sort_id}, seed_));
        m.sort_id = c.sort_id;
        m.i = pos;
        m.count = c.count;
        m.c = d.chosen[idx];
        m.origin = h;
        on_seed(h, m);
    }
    return std::nullopt;
}

void WaveProtocol::on_seed(Address at, const SortSeed& m) {
    SortSeed fwd = m;
    if (auto next = ldb::next_hop(topo_, at, fwd.route)) {
        send(at, *next, std::move(fwd));
        return;
    }
    CopyPlace root;
    root.sort_id = m.sort_id;
    root.i = m.i;
    root.range = ldb::Interval::of(1, m.count);
    root.depth = 0;
    root.waypoint = m.route.key;
    root.c = m.c;
    root.parent = m.origin;
    place_copy(at, root, true);
}

void WaveProtocol::on_copy(Address at, const CopyPlace& m) {
    CopyPlace fwd = m;
    if (auto next = ldb::next_hop(topo_, at, fwd.route)) {
        send(at, *next, std::move(fwd));
        return;
    }
    place_copy(at, m, false);
}

void WaveProtocol::place_copy(Address at, const CopyPlace& m, bool is_root) {
    const std::uint64_t j = (m.range.lo + m.range.hi) / 2;
    participation_[m.sort_id].insert((static_cast<std::uint64_t>(ldb::vowner(at)) << 32) | m.i);
    CopyNode node;
    node.c = m.c;
    node.parent = m.parent;
    node.parent_j = m.parent_j;
    node.is_root = is_root;
    const bool has_lower = j > m.range.lo;
    const bool has_upper = j < m.range.hi;
    node.expected = (has_lower ? 1 : 0) + (has_upper ? 1 : 0) + (j != m.i ? 1 : 0);
    const CopyKey key{m.sort_id, m.i, j};
    if (!copies_[at].emplace(key, node).second) throw SimulationFault("copy placed twice");
    if (node.expected == 0) {
        add_vote(at, m.sort_id, m.i, j, 0, 0);
        return;
    }
    for (unsigned bit = 0; bit < 2; ++bit) {
        if (bit == 0 ? !has_lower : !has_upper) continue;
        CopyPlace child;
        child.route = ldb::start_debruijn_hop(topo_, at, m.waypoint, bit);
        child.sort_id = m.sort_id;
        child.i = m.i;
        child.range = bit == 0 ? ldb::Interval::of(m.range.lo, j - 1) : ldb::Interval::of(j + 1, m.range.hi);
        child.depth = m.depth + 1;
        child.waypoint = child.route.key;
        child.c = m.c;
        child.parent = at;
        child.parent_j = j;
        on_copy(at, child);
    }
    if (j != m.i) {
        Compare cmp;
        cmp.route = ldb::start_route(topo_, at, pair_key(m.i, j, m.sort_id, seed_));
        cmp.sort_id = m.sort_id;
        cmp.i = m.i;
        cmp.j = j;
        cmp.c = m.c;
        cmp.reply_to = at;
        on_compare(at, cmp);
    }
}

void WaveProtocol::on_compare(Address at, const Compare& m) {
    Compare fwd = m;
    if (auto next = ldb::next_hop(topo_, at, fwd.route)) {
        send(at, *next, std::move(fwd));
        return;
    }
    const CopyKey key{m.sort_id, std::min(m.i, m.j), std::max(m.i, m.j)};
    auto& table = rendezvous_[at];
    const auto it = table.find(key);
    if (it == table.end()) {
        table.emplace(key, m);
        return;
    }
    const Compare other = it->second;
    table.erase(it);
    const bool mine_larger = m.c > other.c;
    send(at, m.reply_to, Vote{m.sort_id, m.i, m.j, mine_larger ? 1u : 0u, mine_larger ? 0u : 1u});
    send(at, other.reply_to, Vote{other.sort_id, other.i, other.j, mine_larger ? 0u : 1u, mine_larger ? 1u : 0u});
}

void WaveProtocol::add_vote(Address at, std::uint64_t sort_id, std::uint64_t i, std::uint64_t j, std::uint64_t L,
                            std::uint64_t R) {
    auto& table = copies_[at];
    const auto it = table.find(CopyKey{sort_id, i, j});
    if (it == table.end()) throw SimulationFault("vote for an unknown copy");
    CopyNode& node = it->second;
    node.L += L;
    node.R += R;
    if (node.expected > 0 && ++node.received < node.expected) return;
    if (node.is_root) {
        sort_log_.push_back(SortRecord{sort_id, i, node.c, node.L, node.R});
        send(at, node.parent, SortResult{sort_id, i, node.L + 1});
    } else {
        send(at, node.parent, TreeSum{sort_id, i, node.parent_j, node.L, node.R});
    }
    table.erase(it);
}

void WaveProtocol::on_result(Address at, const SortResult& m) {
    const NodeId node = ldb::vowner(at);
    NodeData& d = nodes_[node];
    if (m.sort_id != d.sort_id || d.sort_pending == 0 || m.i < d.share_lo || m.i - d.share_lo >= d.chosen.size()) {
        throw SimulationFault("stray sort result");
    }
    const Element& c = d.chosen[m.i - d.share_lo];
    if (m.order == d.want_lo) d.sort_reply.x = ExtElement::of(c);
    if (m.order == d.want_hi) d.sort_reply.y = ExtElement::of(c);
    if (--d.sort_pending == 0) finish_local(node, d.sort_reply);
}

void WaveProtocol::deliver(const sim::Envelope<Message>& env) {
    const Address at = env.dst;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, WaveDown>) {
                on_wave_down(at, m.wave, m.cmd);
            } else if constexpr (std::is_same_v<T, WaveUp>) {
                on_wave_up(at, env.src, m.wave, m.reply);
            } else if constexpr (std::is_same_v<T, SortSeed>) {
                on_seed(at, m);
            } else if constexpr (std::is_same_v<T, CopyPlace>) {
                on_copy(at, m);
            } else if constexpr (std::is_same_v<T, Compare>) {
                on_compare(at, m);
            } else if constexpr (std::is_same_v<T, Vote>) {
                add_vote(at, m.sort_id, m.i, m.j, m.L, m.R);
            } else if constexpr (std::is_same_v<T, TreeSum>) {
                add_vote(at, m.sort_id, m.i, m.j, m.L, m.R);
            } else if constexpr (std::is_same_v<T, SortResult>) {
                on_result(at, m);
            } else {
                on_other(env);
            }
        },
        env.payload);
}

}  // namespace skeap::kselect
