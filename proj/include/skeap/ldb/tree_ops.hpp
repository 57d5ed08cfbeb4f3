#pragma once

#include "skeap/ldb/topology.hpp"
#include "skeap/sim/bits.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace skeap::ldb {

// Closed interval of positions; lo > hi means empty.
struct Interval {
    std::uint64_t lo = 1;
    std::uint64_t hi = 0;

    static Interval of(std::uint64_t lo, std::uint64_t hi) { return Interval{lo, hi}; }
    static Interval empty_interval() { return Interval{}; }
    bool empty() const noexcept { return lo > hi; }
    std::uint64_t size() const noexcept { return empty() ? 0 : hi - lo + 1; }
    bool contains(std::uint64_t x) const noexcept { return lo <= x && x <= hi; }
    friend bool operator==(const Interval& a, const Interval& b) noexcept {
        return (a.empty() && b.empty()) || (a.lo == b.lo && a.hi == b.hi);
    }
};

std::string to_string(const Interval& iv);

inline std::uint64_t interval_bits(const Interval& iv) noexcept {
    return iv.empty() ? sim::natural_bits(0) * 2 : sim::natural_bits(iv.lo) + sim::natural_bits(iv.hi);
}

// Consecutive pieces of `whole` with the given sizes; the sizes must add up to |whole|.
std::vector<Interval> split_interval(Interval whole, std::span<const std::uint64_t> counts);

// Addresses in DFS preorder (own first, children ascending by label).
std::vector<Address> preorder(const Topology& t);

// Offline convergecast: own value first, then each child's subtree value in label order.
template <class T, class Combine>
T aggregate(const Topology& t, std::span<const T> own, Combine combine) {
    std::vector<T> acc(own.begin(), own.end());
    const auto order = preorder(t);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        T total = acc[*it];
        for (Address c : t.children(*it)) total = combine(total, acc[c]);
        acc[*it] = std::move(total);
    }
    return acc[t.root()];
}

// Offline broadcast. decompose(address, value) returns one share for the node itself
// followed by one per child in label order. Returns the node's own share by address.
template <class T, class Decompose>
std::vector<T> broadcast(const Topology& t, T root_value, Decompose decompose) {
    std::vector<T> incoming(t.virtual_count());
    std::vector<T> own(t.virtual_count());
    incoming[t.root()] = std::move(root_value);
    for (Address a : preorder(t)) {
        std::vector<T> shares = decompose(a, incoming[a]);
        const auto children = t.children(a);
        if (shares.size() != children.size() + 1) throw SimulationFault("decomposer returned wrong share count");
        own[a] = std::move(shares[0]);
        for (std::size_t i = 0; i < children.size(); ++i) incoming[children[i]] = std::move(shares[i + 1]);
    }
    return own;
}

}  // namespace skeap::ldb
