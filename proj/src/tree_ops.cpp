#include "skeap/ldb/tree_ops.hpp"

namespace skeap::ldb {

std::string to_string(const Interval& iv) {
    if (iv.empty()) return "{}";
    return "[" + std::to_string(iv.lo) + "," + std::to_string(iv.hi) + "]";
}

std::vector<Interval> split_interval(Interval whole, std::span<const std::uint64_t> counts) {
    std::vector<Interval> out;
    out.reserve(counts.size());
    std::uint64_t next = whole.lo;
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) {
        total += c;
        out.push_back(c == 0 ? Interval{} : Interval::of(next, next + c - 1));
        next += c;
    }
    if (total != whole.size()) {
        throw SimulationFault("interval " + to_string(whole) + " cannot be split into " + std::to_string(total) +
                              " positions");
    }
    return out;
}

std::vector<Address> preorder(const Topology& t) {
    std::vector<Address> out(t.virtual_count());
    for (Address a = 0; a < t.virtual_count(); ++a) out[t.dfs_rank(a)] = a;
    return out;
}

}  // namespace skeap::ldb
