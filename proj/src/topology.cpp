#include "skeap/ldb/topology.hpp"

#include "skeap/sim/hash.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace skeap::ldb {

const char* kind_name(VKind k) noexcept {
    switch (k) {
        case VKind::left: return "left";
        case VKind::middle: return "middle";
        case VKind::right: return "right";
    }
    return "?";
}

Topology Topology::build(std::size_t n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("topology needs at least two nodes");
    std::vector<Label> middle(n);
    std::unordered_set<Label> used;
    used.reserve(3 * n);
    for (NodeId v = 0; v < n; ++v) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            const Label m = sim::hash_bits(sim::HashDomain::label, {v, attempt}, seed);
            const Label l = left_label(m), r = right_label(m);
            if (l == m || m == r || used.count(l) || used.count(m) || used.count(r)) continue;
            used.insert(l);
            used.insert(m);
            used.insert(r);
            middle[v] = m;
            break;
        }
    }
    return Topology(std::move(middle));
}

Topology Topology::from_middle_labels(std::vector<Label> middle) {
    if (middle.size() < 2) throw std::invalid_argument("topology needs at least two nodes");
    std::unordered_set<Label> used;
    for (Label m : middle) {
        for (Label x : {left_label(m), m, right_label(m)}) {
            if (!used.insert(x).second) throw std::invalid_argument("virtual node labels collide");
        }
    }
    return Topology(std::move(middle));
}

Topology::Topology(std::vector<Label> middle) : middle_(std::move(middle)) {
    const std::size_t n = middle_.size();
    labels_.resize(3 * n);
    for (NodeId v = 0; v < n; ++v) {
        labels_[vaddr(v, VKind::left)] = left_label(middle_[v]);
        labels_[vaddr(v, VKind::middle)] = middle_[v];
        labels_[vaddr(v, VKind::right)] = right_label(middle_[v]);
    }
    order_.resize(3 * n);
    std::iota(order_.begin(), order_.end(), Address{0});
    std::sort(order_.begin(), order_.end(), [&](Address a, Address b) { return labels_[a] < labels_[b]; });
    pos_.resize(3 * n);
    for (std::size_t i = 0; i < order_.size(); ++i) pos_[order_[i]] = i;
    derive();
}

void Topology::derive() {
    const std::size_t count = labels_.size();
    parent_.assign(count, std::nullopt);
    children_.assign(count, {});
    for (Address a = 0; a < count; ++a) {
        if (a == root()) continue;
        switch (vkind(a)) {
            case VKind::middle: parent_[a] = vaddr(vowner(a), VKind::left); break;
            case VKind::right: parent_[a] = vaddr(vowner(a), VKind::middle); break;
            case VKind::left: parent_[a] = pred(a); break;
        }
        children_[*parent_[a]].push_back(a);
    }
    for (auto& c : children_) {
        std::sort(c.begin(), c.end(), [&](Address a, Address b) { return labels_[a] < labels_[b]; });
    }

    dfs_rank_.assign(count, 0);
    depth_.assign(count, 0);
    height_ = 0;
    std::vector<Address> stack{root()};
    std::size_t rank = 0;
    while (!stack.empty()) {
        const Address a = stack.back();
        stack.pop_back();
        dfs_rank_[a] = rank++;
        const auto& ch = children_[a];
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) {
            depth_[*it] = depth_[a] + 1;
            height_ = std::max(height_, depth_[*it]);
            stack.push_back(*it);
        }
    }
    if (rank != count) throw SimulationFault("aggregation tree does not span all virtual nodes");
}

std::optional<Address> Topology::parent(Address a) const { return parent_.at(a); }

Address Topology::responsible(Label key) const {
    auto it = std::upper_bound(order_.begin(), order_.end(), key,
                               [&](Label k, Address a) { return k < labels_[a]; });
    if (it == order_.begin()) return order_.back();
    return *(it - 1);
}

bool Topology::is_responsible(Address a, Label key) const {
    const Label lo = labels_[a];
    const Label hi = labels_[succ(a)];
    if (lo < hi) return lo <= key && key < hi;
    return key >= lo || key < hi;  // wrap-around arc of the maximum
}

std::vector<NodeId> Topology::owners() const {
    std::vector<NodeId> out(labels_.size());
    for (Address a = 0; a < out.size(); ++a) out[a] = vowner(a);
    return out;
}

nlohmann::json Topology::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    nlohmann::json edges = nlohmann::json::array();
    for (Address a : order_) {
        nodes.push_back({{"address", a},
                         {"owner", vowner(a)},
                         {"kind", kind_name(vkind(a))},
                         {"label", label_to_real(labels_[a])},
                         {"label_bits", labels_[a]}});
        if (parent_[a]) edges.push_back({{"child", a}, {"parent", *parent_[a]}});
    }
    return {{"n", node_count()}, {"root", root()}, {"height", height_}, {"nodes", nodes}, {"tree_edges", edges}};
}

}  // namespace skeap::ldb
