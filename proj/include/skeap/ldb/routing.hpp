#pragma once

#include "skeap/ldb/topology.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace skeap::ldb {

enum class RouteStage : std::uint8_t { seek_back = 0, seek_forward = 1, walk = 2, final_walk = 3 };

// Per-message routing state; everything a hop needs besides the local view of the current node.
struct RouteState {
    Label key = 0;
    Label waypoint = 0;
    NodeId origin = 0;
    std::uint32_t hops_left = 0;
    RouteStage stage = RouteStage::seek_back;
};

// Number of emulated de Bruijn hops: ceil(log2 n) + 2.
std::uint32_t debruijn_dimension(std::size_t n) noexcept;

// Route from `start` towards the node responsible for `key`.
RouteState start_route(const Topology& t, Address start, Label key);

// One de Bruijn step from a node responsible for `waypoint`: ends at the node responsible
// for prepend_bit(bit, waypoint).
RouteState start_debruijn_hop(const Topology& t, Address start, Label waypoint, unsigned bit);

// Next virtual node on the way, or nullopt if `at` is responsible for the key. Uses only
// the labels and kinds of at, pred(at), succ(at) and the siblings of at.
std::optional<Address> next_hop(const Topology& t, Address at, RouteState& st);

// Full path including the start; for analysis and tests.
std::vector<Address> route_path(const Topology& t, Address start, Label key);

}  // namespace skeap::ldb
