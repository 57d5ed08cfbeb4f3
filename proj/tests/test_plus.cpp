#include "skeap/consistency/checker.hpp"
#include "skeap/plus/plus_heap.hpp"

#include <doctest.h>

#include <algorithm>

using namespace skeap;
using namespace skeap::plus;
using kselect::Engine;

namespace {

void drain(Engine& e, PlusHeap& p, std::uint64_t limit = 400000) {
    if (e.mode() == sim::Mode::synchronous) {
        e.run_rounds(p, [&] { return p.finished() && e.pending() == 0; }, limit);
    } else {
        e.run_async(p, [&] { return p.finished() && e.pending() == 0; }, limit);
    }
    REQUIRE(p.finished());
    REQUIRE(e.pending() == 0);
}

Engine make_engine(const ldb::Topology& t, sim::Mode mode = sim::Mode::synchronous, std::uint64_t seed = 1) {
    sim::EngineConfig ec;
    ec.seed = seed;
    ec.mode = mode;
    ec.async_delay_max = 5;
    return Engine(t.owners(), t.node_count(), ec);
}

}  // namespace

TEST_CASE("inserts then deletes return the smallest priorities") {
    const auto topo = ldb::Topology::build(4, 7);
    PlusHeap heap(topo, 7);
    auto engine = make_engine(topo);
    heap.attach(engine);
    heap.insert(0, 5);
    heap.insert(1, 1);
    heap.insert(2, 3);
    drain(engine, heap);
    CHECK(heap.anchor_m() == 3);
    CHECK(heap.stored_total() == 3);

    // fresh heap, now with two deletes issued at a node holding nothing
    PlusHeap h2(topo, 7);
    auto e2 = make_engine(topo);
    h2.attach(e2);
    h2.insert(0, 5);
    h2.insert(1, 1);
    h2.insert(2, 3);
    h2.deletemin(3);
    h2.deletemin(3);
    drain(e2, h2);
    const auto h = h2.history();
    std::vector<std::uint64_t> got;
    for (const auto& r : h.records) {
        if (r.kind == consistency::OpKind::deletemin) {
            REQUIRE(r.returned);
            got.push_back(r.returned->priority);
        }
    }
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<std::uint64_t>{1, 3});
    CHECK(h2.anchor_m() == 1);
    CHECK(h2.stored_total() == 1);
    CHECK(h2.optimality_violations() == 0);
    const auto v = consistency::evaluate(h, consistency::serial_order(h));
    CHECK(v.serializable);
    CHECK(v.heap_consistent);
}

TEST_CASE("deletes beyond the stored count return bottom at the tail") {
    const auto topo = ldb::Topology::build(3, 2);
    PlusHeap heap(topo, 2);
    auto engine = make_engine(topo);
    heap.attach(engine);
    heap.insert(0, 10);
    heap.deletemin(1);
    heap.deletemin(2);
    heap.deletemin(0);
    drain(engine, heap);
    const auto h = heap.history();
    int bottoms = 0, hits = 0;
    for (const auto& r : h.records) {
        if (r.kind != consistency::OpKind::deletemin) continue;
        if (r.returned) {
            ++hits;
            CHECK(r.returned->priority == 10);
        } else {
            ++bottoms;
            CHECK(r.assigned_bottom);
            CHECK(r.assigned_position > 1);
        }
    }
    CHECK(hits == 1);
    CHECK(bottoms == 2);
    const auto v = consistency::evaluate(h, consistency::serial_order(h));
    CHECK(v.serializable);
    CHECK(v.heap_consistent);
}

TEST_CASE("deletes on an empty heap skip selection") {
    const auto topo = ldb::Topology::build(4, 1);
    PlusHeap heap(topo, 1);
    auto engine = make_engine(topo);
    heap.attach(engine);
    heap.deletemin(0);
    heap.deletemin(3);
    drain(engine, heap);
    CHECK(heap.selections() == 0);
    for (const auto& r : heap.history().records) CHECK_FALSE(r.returned);
}

TEST_CASE("random workloads stay serializable and optimal") {
    for (const auto mode : {sim::Mode::synchronous, sim::Mode::asynchronous}) {
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            const std::size_t n = 3 + seed % 6;
            const auto topo = ldb::Topology::build(n, seed);
            PlusHeap heap(topo, seed);
            proto::WorkloadConfig w;
            w.lambda = 1 + static_cast<std::uint32_t>(seed % 4);
            w.priority_universe = n * n;
            w.epochs = 6;
            w.seed = seed * 31;
            w.insert_probability = 0.6;
            heap.set_workload(w);
            auto engine = make_engine(topo, mode, seed);
            heap.attach(engine);
            drain(engine, heap);
            INFO("seed=" << seed << " async=" << (mode == sim::Mode::asynchronous));
            const auto h = heap.history();
            CHECK(!h.records.empty());
            const auto v = consistency::evaluate(h, consistency::serial_order(h));
            CHECK(v.serializable);
            CHECK(v.heap_consistent);
            CHECK(heap.deletemin_phases() > 0);
            CHECK(heap.optimality_violations() == 0);
            CHECK(heap.anchor_m() == heap.stored_total());
        }
    }
}
