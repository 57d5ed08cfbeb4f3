#include "skeap/ldb/routing.hpp"

#include <bit>

namespace skeap::ldb {

std::uint32_t debruijn_dimension(std::size_t n) noexcept {
    const auto ceil_log = n <= 1 ? 0u : static_cast<std::uint32_t>(std::bit_width(n - 1));
    return ceil_log + 2;
}

RouteState start_route(const Topology& t, Address start, Label key) {
    RouteState st;
    st.key = key;
    st.waypoint = t.label(start);
    st.origin = vowner(start);
    st.hops_left = debruijn_dimension(t.node_count());
    return st;
}

RouteState start_debruijn_hop(const Topology&, Address start, Label waypoint, unsigned bit) {
    RouteState st;
    st.key = prepend_bit(bit, waypoint);
    st.waypoint = waypoint;
    st.origin = vowner(start);
    st.hops_left = 1;
    return st;
}

std::optional<Address> next_hop(const Topology& t, Address at, RouteState& st) {
    for (;;) {
        if (t.is_responsible(at, st.key)) return std::nullopt;
        switch (st.stage) {
            case RouteStage::seek_back:
            case RouteStage::seek_forward: {
                if (st.hops_left == 0) {
                    st.stage = RouteStage::final_walk;
                    continue;
                }
                if (vkind(at) == VKind::middle) {
                    // bits of the key's top `d` are consumed least significant first
                    const unsigned bit = static_cast<unsigned>((st.key >> (64 - st.hops_left)) & 1u);
                    st.waypoint = prepend_bit(bit, st.waypoint);
                    --st.hops_left;
                    st.stage = RouteStage::walk;
                    return vaddr(vowner(at), bit ? VKind::right : VKind::left);
                }
                // crossing the minimum backwards would wrap, so turn around there; a waypoint
                // below the minimum label is held by the maximum node and is best served by
                // the first middle node after the wrap
                if (st.stage == RouteStage::seek_back &&
                    (t.label(t.pred(at)) > t.label(at) || t.label(at) > st.waypoint)) {
                    st.stage = RouteStage::seek_forward;
                }
                return st.stage == RouteStage::seek_back ? t.pred(at) : t.succ(at);
            }
            case RouteStage::walk:
                if (t.is_responsible(at, st.waypoint)) {
                    st.stage = RouteStage::seek_back;
                    continue;
                }
                return t.label(at) < st.waypoint ? t.succ(at) : t.pred(at);
            case RouteStage::final_walk:
                return t.label(at) < st.key ? t.succ(at) : t.pred(at);
        }
    }
}

std::vector<Address> route_path(const Topology& t, Address start, Label key) {
    std::vector<Address> path{start};
    RouteState st = start_route(t, start, key);
    Address at = start;
    const std::size_t limit = 64 * t.virtual_count() + 64;
    while (auto next = next_hop(t, at, st)) {
        at = *next;
        path.push_back(at);
        if (path.size() > limit) throw SimulationFault("route does not terminate");
    }
    return path;
}

}  // namespace skeap::ldb
