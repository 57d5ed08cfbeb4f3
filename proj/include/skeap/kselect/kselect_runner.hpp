#pragma once

#include "skeap/kselect/selector.hpp"
#include "skeap/kselect/wave.hpp"
#include "skeap/sim/engine.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace skeap::kselect {

struct KSelectConfig {
    std::size_t n = 16;
    std::uint64_t m = 256;
    std::uint64_t k = 0;                  // 0: drawn uniformly from [1, m]
    std::uint64_t seed = 1;
    std::uint64_t priority_universe = 0;  // 0: m, so priorities repeat and tiebreakers matter
    bool single_node = false;             // place every element on node 0
    sim::Mode mode = sim::Mode::synchronous;
    std::uint64_t async_delay_max = 4;
    SelectorConfig selector;
    bool verify_steps = true;  // oracle checks after every pruning step
    std::uint64_t max_rounds = 1'000'000;
    std::ostream* event_trace = nullptr;  // engine JSONL trace
};

struct KSelectOutcome {
    std::uint64_t k = 0;
    std::optional<Element> result;
    Element oracle;
    bool correct = false;
    bool aborted = false;
    std::string error;
    std::string violation;  // first failed per-step oracle check
    std::uint64_t rounds = 0;
    std::uint64_t phase1_iterations = 0;
    std::uint64_t phase2_iterations = 0;
    std::uint64_t retries = 0;
    std::uint64_t escapes = 0;
    std::uint64_t post_phase1_N = 0;
    std::uint64_t max_message_bits = 0;
    std::uint64_t max_congestion = 0;
    std::uint64_t messages = 0;
    double mean_copy_participation = 0.0;
    std::vector<IterationRecord> trace;
    sim::MetricsSummary metrics;
};

nlohmann::json to_json(const KSelectOutcome& o);

// Stand-alone selection: elements placed at random nodes, one selection run from the anchor.
class KSelectProcess : public WaveProtocol {
public:
    KSelectProcess(const ldb::Topology& topo, std::uint64_t seed, SelectorConfig cfg);

    void place(NodeId v, const Element& e) { store_element(v, e); }
    void begin(std::uint64_t m, std::uint64_t k);
    // Oracle element of rank k among all placed elements; enables per-step checks.
    void set_oracle(const Element& target) { target_ = target; }

    const Selector& selector() const { return *selector_; }
    bool finished() const { return selector_ && selector_->status() != Selector::Status::running; }
    const std::string& violation() const noexcept { return violation_; }

protected:
    void on_wave_complete(const proto::Command& cmd, const proto::WaveReply& reply) override;

private:
    void check_step(const proto::Command& cmd);

    std::optional<Selector> selector_;
    std::optional<Element> target_;
    std::string violation_;
};

KSelectOutcome run_kselect(const KSelectConfig& cfg);

}  // namespace skeap::kselect
