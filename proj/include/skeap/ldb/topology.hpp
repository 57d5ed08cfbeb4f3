#pragma once

#include "skeap/ldb/label.hpp"
#include "skeap/sim/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace skeap::ldb {

enum class VKind : std::uint8_t { left = 0, middle = 1, right = 2 };

const char* kind_name(VKind k) noexcept;

// Virtual node address: owner * 3 + kind.
constexpr Address vaddr(NodeId owner, VKind kind) noexcept {
    return owner * 3 + static_cast<Address>(kind);
}
constexpr NodeId vowner(Address a) noexcept { return a / 3; }
constexpr VKind vkind(Address a) noexcept { return static_cast<VKind>(a % 3); }

// Static LDB overlay over 3n virtual nodes plus the aggregation tree it induces.
class Topology {
public:
    static Topology build(std::size_t n, std::uint64_t seed);
    // Middle labels given directly; throws if the 3n derived labels are not distinct.
    static Topology from_middle_labels(std::vector<Label> middle);

    std::size_t node_count() const noexcept { return middle_.size(); }
    std::size_t virtual_count() const noexcept { return labels_.size(); }

    Label label(Address a) const { return labels_.at(a); }
    Address pred(Address a) const { return order_[(pos_[a] + order_.size() - 1) % order_.size()]; }
    Address succ(Address a) const { return order_[(pos_[a] + 1) % order_.size()]; }
    // Rank in ascending label order.
    std::size_t position(Address a) const { return pos_.at(a); }
    Address at(std::size_t position) const { return order_.at(position); }

    Address root() const noexcept { return order_.front(); }
    std::optional<Address> parent(Address a) const;
    // Ascending by label.
    std::span<const Address> children(Address a) const { return children_.at(a); }
    // DFS preorder rank with own node first and children ascending by label.
    std::size_t dfs_rank(Address a) const { return dfs_rank_.at(a); }
    std::size_t depth(Address a) const { return depth_.at(a); }
    std::size_t height() const noexcept { return height_; }

    // The unique v with v <= key < succ(v), cyclically.
    Address responsible(Label key) const;
    bool is_responsible(Address a, Label key) const;

    // Owner real node of every address, indexed by address.
    std::vector<NodeId> owners() const;

    nlohmann::json to_json() const;

private:
    explicit Topology(std::vector<Label> middle);
    void derive();

    std::vector<Label> middle_;
    std::vector<Label> labels_;  // by address
    std::vector<Address> order_;
    std::vector<std::size_t> pos_;
    std::vector<std::optional<Address>> parent_;
    std::vector<std::vector<Address>> children_;
    std::vector<std::size_t> dfs_rank_;
    std::vector<std::size_t> depth_;
    std::size_t height_ = 0;
};

}  // namespace skeap::ldb
