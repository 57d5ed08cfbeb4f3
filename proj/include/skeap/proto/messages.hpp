#pragma once

#include "skeap/heap/batch.hpp"
#include "skeap/heap/element.hpp"
#include "skeap/ldb/routing.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

namespace skeap::proto {

using ldb::Interval;
using ldb::Label;
using ldb::RouteState;

struct OpRef {
    NodeId node = 0;
    std::uint64_t seq = 0;
};

// Element extended with -inf/+inf, for min/max aggregation with neutral values.
struct ExtElement {
    std::int8_t inf = 1;  // -1: -inf, 0: finite, +1: +inf
    Element e;

    static ExtElement minus_inf() { return ExtElement{-1, {}}; }
    static ExtElement plus_inf() { return ExtElement{1, {}}; }
    static ExtElement of(const Element& e) { return ExtElement{0, e}; }
    bool finite() const noexcept { return inf == 0; }

    friend std::strong_ordering operator<=>(const ExtElement& a, const ExtElement& b) noexcept {
        if (a.inf != b.inf || a.inf != 0) return a.inf <=> b.inf;
        return a.e <=> b.e;
    }
    friend bool operator==(const ExtElement& a, const ExtElement& b) noexcept { return (a <=> b) == 0; }
};

// Keeps e with lo <= e (lo < e if strict) and likewise for hi.
struct Bound {
    ExtElement at;
    bool strict = false;
};

// ---- SKEAP tree waves ----
struct BatchUp {
    std::uint64_t epoch = 0;
    heap::Batch batch;
    bool quiet = false;  // empty and generated after the workload closed
};

struct ShareDown {
    std::uint64_t epoch = 0;
    heap::Share share;
    bool halt = false;
};

// ---- DHT ----
enum class DhtPurpose : std::uint8_t { position, random };

// Hash inputs the key was derived from; these, not the key, are what the message carries.
struct KeyInputs {
    std::uint64_t v[3] = {0, 0, 0};
    std::uint8_t count = 0;
};

struct DhtPut {
    RouteState route;
    KeyInputs inputs;
    Element element;
    DhtPurpose purpose = DhtPurpose::position;
    bool want_ack = false;
    Address ack_to = 0;
    OpRef op;
};

struct DhtGet {
    RouteState route;
    KeyInputs inputs;
    Address requester = 0;
    OpRef op;
};

struct DhtReply {
    OpRef op;
    std::optional<Element> element;
};

struct PutAck {
    OpRef op;
};

// ---- anchor-driven waves (KSelect and SKEAP+) ----
struct CmdBounds {
    std::uint64_t k = 0;
    std::uint64_t n = 0;
};
struct CmdPrune {
    Bound lo, hi;
};
struct CmdRank {
    ExtElement cl, cr;
};
struct CmdSample {
    std::uint64_t draw = 0;
    std::uint64_t N = 0;
};
struct CmdSort {
    Interval share;
    std::uint64_t count = 0;  // n'
    std::uint64_t sort_id = 0;
    std::uint64_t want_lo = 0, want_hi = 0;  // orders to report back, 0 for none
};
struct CmdInsCount {
    std::uint64_t epoch = 0;
};
struct CmdStartInsert {
    std::uint64_t epoch = 0;
};
struct CmdDelCount {
    std::uint64_t epoch = 0;
};
struct CmdQualCount {
    ExtElement bound;
};
struct CmdAssign {
    std::uint64_t epoch = 0;
    Interval qualifying;
    Interval deletes;
    std::uint64_t kstar = 0;
};
struct CmdHalt {};

using Command = std::variant<CmdBounds, CmdPrune, CmdRank, CmdSample, CmdSort, CmdInsCount, CmdStartInsert,
                             CmdDelCount, CmdQualCount, CmdAssign, CmdHalt>;

// Generic convergecast value; its fields are combined per command (sum, min or max).
struct WaveReply {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    ExtElement x = ExtElement::plus_inf();
    ExtElement y = ExtElement::plus_inf();
};

struct WaveDown {
    std::uint64_t wave = 0;
    Command cmd;
};

struct WaveUp {
    std::uint64_t wave = 0;
    WaveReply reply;
};

// ---- distributed sorting ----
struct SortSeed {
    RouteState route;
    std::uint64_t sort_id = 0;
    std::uint64_t i = 0;
    std::uint64_t count = 0;
    Element c;
    Address origin = 0;
};

struct CopyPlace {
    RouteState route;
    std::uint64_t sort_id = 0;
    std::uint64_t i = 0;
    Interval range;
    std::uint64_t depth = 0;
    Label waypoint = 0;
    Element c;
    Address parent = 0;
    std::uint64_t parent_j = 0;
};

struct Compare {
    RouteState route;
    std::uint64_t sort_id = 0;
    std::uint64_t i = 0;
    std::uint64_t j = 0;
    Element c;
    Address reply_to = 0;
};

struct Vote {
    std::uint64_t sort_id = 0;
    std::uint64_t i = 0;
    std::uint64_t j = 0;
    std::uint64_t L = 0, R = 0;
};

struct TreeSum {
    std::uint64_t sort_id = 0;
    std::uint64_t i = 0;
    std::uint64_t j = 0;  // receiving copy
    std::uint64_t L = 0, R = 0;
};

struct SortResult {
    std::uint64_t sort_id = 0;
    std::uint64_t i = 0;
    std::uint64_t order = 0;
};

struct Ping {};

using Message = std::variant<Ping, BatchUp, ShareDown, DhtPut, DhtGet, DhtReply, PutAck, WaveDown, WaveUp, SortSeed,
                             CopyPlace, Compare, Vote, TreeSum, SortResult>;

std::uint64_t size_bits(const Message& m);
std::string_view kind_name(const Message& m);
std::string_view command_name(const Command& c);

std::uint64_t ext_bits(const ExtElement& x) noexcept;

}  // namespace skeap::proto
