#pragma once

#include "skeap/proto/messages.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace skeap::kselect {

using proto::Bound;
using proto::Command;
using proto::ExtElement;
using proto::WaveReply;

struct SelectorConfig {
    double c_delta = 2.0;
    // Phase-2 sample size is about c_sample * sqrt(n).
    double c_sample = 16.0;
    std::uint32_t phase2_cap = 8;
};

// Probability with which a node keeps each candidate for a phase-2 sample; N == 0 means all.
double sample_probability(const SelectorConfig& cfg, std::uint64_t n, std::uint64_t N) noexcept;

std::uint64_t phase1_iterations_for(std::uint64_t n, std::uint64_t m) noexcept;
std::uint64_t delta_for(const SelectorConfig& cfg, std::uint64_t n) noexcept;

enum class Phase : std::uint8_t { p1, p2, p3, done };

struct IterationRecord {
    std::string phase;
    std::uint64_t iteration = 0;
    std::uint64_t N = 0;
    std::uint64_t k = 0;
    std::uint64_t n_prime = 0;
    std::uint64_t delta = 0;
    std::uint64_t pruned_below = 0;
    std::uint64_t pruned_above = 0;
    std::string note;
};

nlohmann::json to_json(const IterationRecord& r);

// Anchor-side state machine of the selection protocol. It issues one tree-wide command at
// a time and consumes the aggregated reply.
class Selector {
public:
    enum class Status : std::uint8_t { running, done, aborted, error };

    Selector(SelectorConfig cfg, std::uint64_t n, std::uint64_t m, std::uint64_t k);

    std::optional<Command> start();
    std::optional<Command> on_reply(const WaveReply& r);

    Status status() const noexcept { return status_; }
    const std::optional<Element>& result() const noexcept { return result_; }
    const std::string& message() const noexcept { return message_; }

    Phase phase() const noexcept { return phase_; }
    std::uint64_t N() const noexcept { return N_; }
    std::uint64_t k() const noexcept { return k_; }
    std::uint64_t n() const noexcept { return n_; }
    std::uint64_t post_phase1_N() const noexcept { return post_phase1_N_; }
    std::uint64_t phase1_iterations() const noexcept { return p1_done_; }
    std::uint64_t phase2_iterations() const noexcept { return p2_done_; }
    std::uint64_t retries() const noexcept { return retries_; }
    std::uint64_t escapes() const noexcept { return escapes_; }
    // Bounds of the last phase-1 iteration, after the anchor's clamping.
    const ExtElement& last_pmin() const noexcept { return pmin_; }
    const ExtElement& last_pmax() const noexcept { return pmax_; }
    bool last_step_pruned() const noexcept { return last_pruned_; }
    const std::vector<IterationRecord>& trace() const noexcept { return trace_; }

private:
    enum class Step : std::uint8_t { bounds, p1_prune, sample, sort, rank, p2_prune, p3_sample, p3_sort };

    std::optional<Command> enter_phase1();
    std::optional<Command> enter_phase2();
    std::optional<Command> enter_phase3();
    std::optional<Command> apply_prune(const WaveReply& r);
    std::optional<Command> fail(Status s, std::string why);

    SelectorConfig cfg_;
    std::uint64_t n_, m_, N_, k_;
    std::uint64_t p1_target_ = 0;
    std::uint64_t p1_done_ = 0, p2_done_ = 0, retries_ = 0, escapes_ = 0;
    std::uint64_t post_phase1_N_ = 0;
    std::uint64_t draw_ = 0, sort_id_ = 0;
    std::uint64_t n_prime_ = 0, delta_ = 0, want_lo_ = 0, want_hi_ = 0;
    ExtElement cl_, cr_;
    ExtElement pmin_, pmax_;
    std::string prune_note_;
    bool last_pruned_ = false;
    Phase phase_ = Phase::p1;
    Step step_ = Step::bounds;
    Status status_ = Status::running;
    std::optional<Element> result_;
    std::string message_;
    std::vector<IterationRecord> trace_;
};

}  // namespace skeap::kselect
