#pragma once

#include "skeap/sim/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace skeap::sim {

enum class Mode : std::uint8_t { synchronous, asynchronous };

template <class Msg>
struct Envelope {
    Address src = 0;
    Address dst = 0;
    Msg payload{};
    std::uint64_t size_bits = 0;
    std::uint64_t enqueue_time = 0;
    std::uint64_t id = 0;
};

struct RoundMetrics {
    std::uint64_t round = 0;
    std::vector<std::uint64_t> per_node_messages;
    std::uint64_t max_congestion = 0;
    std::uint64_t max_message_bits = 0;
    std::uint64_t delivered = 0;
};

/// Per-round record kept for the metrics summary (per-node counts are dropped).
struct RoundSummary {
    std::uint64_t round = 0;
    std::uint64_t delivered = 0;
    std::uint64_t max_congestion = 0;
    std::uint64_t max_message_bits = 0;
};

struct MetricsSummary {
    std::uint64_t rounds = 0;
    std::uint64_t max_congestion = 0;
    std::uint64_t max_message_bits = 0;
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::vector<RoundSummary> per_round;
};

inline nlohmann::json to_json(const MetricsSummary& m) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : m.per_round) {
        rounds.push_back({{"round", r.round},
                          {"delivered", r.delivered},
                          {"max_congestion", r.max_congestion},
                          {"max_message_bits", r.max_message_bits}});
    }
    return {{"rounds", m.rounds},
            {"max_congestion", m.max_congestion},
            {"max_message_bits", m.max_message_bits},
            {"sent", m.sent},
            {"delivered", m.delivered},
            {"per_round", std::move(rounds)}};
}

/// Receiver side of the engine. One instance hosts every endpoint of a simulation.
template <class Msg>
class Process {
public:
    virtual ~Process() = default;
    virtual void deliver(const Envelope<Msg>& env) = 0;
    virtual void activate(NodeId node) = 0;
};

struct EngineConfig {
    Mode mode = Mode::synchronous;
    std::uint64_t seed = 1;
    /// Upper bound on the delivery delay, in scheduler ticks, in asynchronous mode.
    std::uint64_t async_delay_max = 4;
    /// Upper bound on the gap between two activations of a node in asynchronous mode.
    std::uint64_t activation_gap_max = 4;
};

/// Deterministic discrete-event engine.
///
/// Endpoints are addressed by `Address`; `owners[a]` is the real node that handles
/// traffic for endpoint `a`, which is what congestion is accounted against.
/// `Msg` must provide free functions `size_bits(const Msg&)` and `kind_name(const Msg&)`.
///
/// Synchronous mode: everything sent in round i is delivered in round i+1, then every
/// real node is activated once. Asynchronous mode: each envelope is due at a uniformly
/// random tick in [now+1, now+async_delay_max] and each node re-activates after a random
/// gap; events due at the same tick run in a seeded random order, so delivery is non-FIFO
/// but every envelope arrives within the delay bound.
template <class Msg>
class Engine {
public:
    Engine(std::vector<NodeId> owners, std::size_t node_count, EngineConfig config)
        : owners_(std::move(owners)), node_count_(node_count), config_(config), rng_(config.seed) {
        if (config_.async_delay_max < 1 || config_.activation_gap_max < 1) {
            throw std::invalid_argument("async delay bounds must be at least 1");
        }
        for (NodeId owner : owners_) {
            if (owner >= node_count_) throw std::invalid_argument("endpoint owner out of range");
        }
        if (config_.mode == Mode::asynchronous) {
            for (NodeId v = 0; v < node_count_; ++v) schedule_activation(v);
        }
    }

    Mode mode() const noexcept { return config_.mode; }
    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t endpoint_count() const noexcept { return owners_.size(); }
    NodeId owner(Address a) const { return owners_.at(a); }
    std::uint64_t now() const noexcept { return now_; }

    void set_trace(std::ostream* out) noexcept { trace_ = out; }

    void send(Address src, Address dst, Msg payload) {
        if (dst >= owners_.size() || src >= owners_.size()) {
            throw SimulationFault("send to unknown endpoint " + std::to_string(dst));
        }
        Envelope<Msg> env;
        env.src = src;
        env.dst = dst;
        env.size_bits = size_bits(payload);
        env.payload = std::move(payload);
        env.enqueue_time = now_;
        env.id = next_id_++;
        ++sent_;
        if (config_.mode == Mode::synchronous) {
            next_round_.push_back(std::move(env));
        } else {
            std::uniform_int_distribution<std::uint64_t> delay(1, config_.async_delay_max);
            const std::uint64_t due = now_ + delay(rng_);
            events_.push(Event{due, rng_(), env.id, EventKind::deliver, 0});
            in_flight_.emplace(env.id, std::move(env));
        }
    }

    /// Synchronous round: deliver everything enqueued before the round, then activate every node.
    RoundMetrics step_round(Process<Msg>& process) {
        if (config_.mode != Mode::synchronous) throw SimulationFault("step_round requires synchronous mode");
        std::vector<Envelope<Msg>> current;
        current.swap(next_round_);
        begin_bucket();
        for (auto& env : current) {
            record_delivery(env);
            process.deliver(env);
        }
        for (NodeId v = 0; v < node_count_; ++v) {
            trace_activation(v);
            process.activate(v);
        }
        RoundMetrics out = end_bucket();
        ++now_;
        return out;
    }

    /// Runs rounds until `done()` holds (checked before each round) or `max_rounds` is hit.
    /// Returns the number of rounds executed.
    template <class Pred>
    std::uint64_t run_rounds(Process<Msg>& process, Pred done, std::uint64_t max_rounds) {
        std::uint64_t executed = 0;
        while (!done() && executed < max_rounds) {
            step_round(process);
            ++executed;
        }
        return executed;
    }

    /// Asynchronous mode: executes every event due at the next non-empty tick.
    void step_tick(Process<Msg>& process) {
        if (config_.mode != Mode::asynchronous) throw SimulationFault("step_tick requires asynchronous mode");
        if (events_.empty()) return;
        now_ = events_.top().time;
        begin_bucket();
        while (!events_.empty() && events_.top().time == now_) {
            Event ev = events_.top();
            events_.pop();
            if (ev.kind == EventKind::deliver) {
                auto it = in_flight_.find(ev.envelope);
                Envelope<Msg> env = std::move(it->second);
                in_flight_.erase(it);
                max_delay_ = std::max(max_delay_, now_ - env.enqueue_time);
                record_delivery(env);
                process.deliver(env);
            } else {
                trace_activation(ev.node);
                process.activate(ev.node);
                schedule_activation(ev.node);
            }
        }
        end_bucket();
    }

    /// Runs the adversarial scheduler until `done()` holds or `max_ticks` ticks have run.
    template <class Pred>
    std::uint64_t run_async(Process<Msg>& process, Pred done, std::uint64_t max_ticks) {
        std::uint64_t executed = 0;
        while (!done() && executed < max_ticks && !events_.empty()) {
            step_tick(process);
            ++executed;
        }
        return executed;
    }

    /// Envelopes sent but not yet delivered.
    std::size_t pending() const noexcept {
        return config_.mode == Mode::synchronous ? next_round_.size() : in_flight_.size();
    }

    std::uint64_t sent() const noexcept { return sent_; }
    std::uint64_t delivered() const noexcept { return delivered_; }
    std::uint64_t max_delivery_delay() const noexcept { return max_delay_; }

    MetricsSummary summary() const {
        MetricsSummary s;
        s.rounds = summaries_.size();
        s.sent = sent_;
        s.delivered = delivered_;
        s.per_round = summaries_;
        for (const auto& r : summaries_) {
            s.max_congestion = std::max(s.max_congestion, r.max_congestion);
            s.max_message_bits = std::max(s.max_message_bits, r.max_message_bits);
        }
        return s;
    }

    std::uint64_t max_congestion() const noexcept { return max_congestion_; }
    std::uint64_t max_message_bits() const noexcept { return max_bits_; }

private:
    enum class EventKind : std::uint8_t { deliver, activate };
    struct Event {
        std::uint64_t time;
        std::uint64_t tiebreak;
        std::uint64_t envelope;
        EventKind kind;
        NodeId node;
        bool operator>(const Event& o) const noexcept {
            if (time != o.time) return time > o.time;
            if (tiebreak != o.tiebreak) return tiebreak > o.tiebreak;
            return envelope > o.envelope;
        }
    };

    void schedule_activation(NodeId v) {
        std::uniform_int_distribution<std::uint64_t> gap(1, config_.activation_gap_max);
        events_.push(Event{now_ + gap(rng_), rng_(), std::numeric_limits<std::uint64_t>::max() - v,
                           EventKind::activate, v});
    }

    void begin_bucket() {
        bucket_.round = now_;
        bucket_.per_node_messages.assign(node_count_, 0);
        bucket_.max_congestion = 0;
        bucket_.max_message_bits = 0;
        bucket_.delivered = 0;
    }

    RoundMetrics end_bucket() {
        for (auto c : bucket_.per_node_messages) bucket_.max_congestion = std::max(bucket_.max_congestion, c);
        max_congestion_ = std::max(max_congestion_, bucket_.max_congestion);
        summaries_.push_back(
            RoundSummary{bucket_.round, bucket_.delivered, bucket_.max_congestion, bucket_.max_message_bits});
        return bucket_;
    }

    void record_delivery(const Envelope<Msg>& env) {
        ++delivered_;
        ++bucket_.delivered;
        ++bucket_.per_node_messages[owners_[env.dst]];
        bucket_.max_message_bits = std::max(bucket_.max_message_bits, env.size_bits);
        max_bits_ = std::max(max_bits_, env.size_bits);
        if (trace_ != nullptr) {
            nlohmann::json line = {{"kind", std::string(kind_name(env.payload))},
                                   {"time", now_},
                                   {"src", env.src},
                                   {"dst", env.dst},
                                   {"bits", env.size_bits}};
            *trace_ << line.dump() << '\n';
        }
    }

    void trace_activation(NodeId v) {
        if (trace_ != nullptr) {
            nlohmann::json line = {{"kind", "activate"}, {"time", now_}, {"src", v}, {"dst", v}, {"bits", 0}};
            *trace_ << line.dump() << '\n';
        }
    }

    std::vector<NodeId> owners_;
    std::size_t node_count_;
    EngineConfig config_;
    std::mt19937_64 rng_;
    std::uint64_t now_ = 0;
    std::uint64_t next_id_ = 0;
    std::uint64_t sent_ = 0;
    std::uint64_t delivered_ = 0;
    std::uint64_t max_delay_ = 0;
    std::uint64_t max_congestion_ = 0;
    std::uint64_t max_bits_ = 0;
    std::vector<Envelope<Msg>> next_round_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::unordered_map<std::uint64_t, Envelope<Msg>> in_flight_;
    RoundMetrics bucket_;
    std::vector<RoundSummary> summaries_;
    std::ostream* trace_ = nullptr;
};

}  // namespace skeap::sim
