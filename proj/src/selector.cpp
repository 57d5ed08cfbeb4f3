#include "skeap/kselect/selector.hpp"

#include <algorithm>
#include <cmath>

namespace skeap::kselect {

using proto::CmdBounds;
using proto::CmdPrune;
using proto::CmdRank;
using proto::CmdSample;
using proto::CmdSort;

double sample_probability(const SelectorConfig& cfg, std::uint64_t n, std::uint64_t N) noexcept {
    if (N == 0) return 1.0;
    return std::min(1.0, cfg.c_sample * std::sqrt(static_cast<double>(n)) / static_cast<double>(N));
}

std::uint64_t phase1_iterations_for(std::uint64_t n, std::uint64_t m) noexcept {
    std::uint64_t q = 1;
    for (long double pw = static_cast<long double>(n); pw < static_cast<long double>(m); pw *= n) ++q;
    std::uint64_t lg = 0;
    while ((std::uint64_t{1} << lg) < q) ++lg;
    return lg + 1;
}

std::uint64_t delta_for(const SelectorConfig& cfg, std::uint64_t n) noexcept {
    const double x = static_cast<double>(n);
    return static_cast<std::uint64_t>(std::ceil(cfg.c_delta * std::sqrt(std::log2(x)) * std::pow(x, 0.25)));
}

nlohmann::json to_json(const IterationRecord& r) {
    nlohmann::json j = {{"phase", r.phase},     {"iteration", r.iteration},       {"N", r.N},
                        {"k", r.k},             {"n_prime", r.n_prime},           {"delta", r.delta},
                        {"pruned_below", r.pruned_below}, {"pruned_above", r.pruned_above}};
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

Selector::Selector(SelectorConfig cfg, std::uint64_t n, std::uint64_t m, std::uint64_t k)
    : cfg_(cfg), n_(n), m_(m), N_(m), k_(k) {
    p1_target_ = phase1_iterations_for(n, std::max<std::uint64_t>(m, 1));
    delta_ = delta_for(cfg_, n_);
}

std::optional<Command> Selector::fail(Status s, std::string why) {
    status_ = s;
    message_ = std::move(why);
    phase_ = Phase::done;
    return std::nullopt;
}

std::optional<Command> Selector::start() {
    if (k_ < 1 || k_ > m_) return fail(Status::error, "k out of range");
    return enter_phase1();
}

std::optional<Command> Selector::enter_phase1() {
    phase_ = Phase::p1;
    if (p1_done_ >= p1_target_ || N_ * N_ <= n_) return enter_phase2();
    step_ = Step::bounds;
    return CmdBounds{k_, n_};
}

std::optional<Command> Selector::enter_phase2() {
    if (phase_ == Phase::p1) post_phase1_N_ = N_;
    phase_ = Phase::p2;
    // Once the sample would be the whole candidate set it is an exact sort.
    if (sample_probability(cfg_, n_, N_) >= 1.0) return enter_phase3();
    if (p2_done_ >= cfg_.phase2_cap) {
        if (N_ <= n_) return enter_phase3();
        return fail(Status::aborted, "phase 2 iteration cap reached with N = " + std::to_string(N_));
    }
    step_ = Step::sample;
    return CmdSample{++draw_, N_};
}

std::optional<Command> Selector::enter_phase3() {
    phase_ = Phase::p3;
    step_ = Step::p3_sample;
    return CmdSample{++draw_, 0};
}

std::optional<Command> Selector::apply_prune(const WaveReply& r) {
    if (r.a + r.b > N_ || r.a >= k_) return fail(Status::error, "pruning removed the target rank");
    N_ -= r.a + r.b;
    k_ -= r.a;
    if (k_ < 1 || k_ > N_) return fail(Status::error, "target rank left the candidate set");
    last_pruned_ = true;
    return std::nullopt;
}

std::optional<Command> Selector::on_reply(const WaveReply& r) {
    if (status_ != Status::running) return std::nullopt;
    last_pruned_ = false;
    switch (step_) {
        case Step::bounds: {
            pmin_ = r.x;
            pmax_ = r.a < k_ ? ExtElement::plus_inf() : r.y;
            step_ = Step::p1_prune;
            return CmdPrune{Bound{pmin_, false}, Bound{pmax_, false}};
        }
        case Step::p1_prune: {
            IterationRecord rec{"p1", p1_done_ + 1, N_, k_, 0, 0, r.a, r.b, {}};
            apply_prune(r);
            if (status_ != Status::running) return std::nullopt;
            rec.N = N_;
            rec.k = k_;
            trace_.push_back(rec);
            ++p1_done_;
            return enter_phase1();
        }
        case Step::sample: {
            n_prime_ = r.a;
            const double centre = static_cast<double>(k_) * static_cast<double>(n_prime_) / static_cast<double>(N_);
            const double lo = std::floor(centre - static_cast<double>(delta_));
            const double hi = std::ceil(centre + static_cast<double>(delta_));
            const bool use_lo = lo >= 1.0;
            const bool use_hi = hi <= static_cast<double>(n_prime_);
            if (n_prime_ == 0 || (!use_lo && !use_hi)) {
                ++retries_;
                ++p2_done_;
                trace_.push_back(IterationRecord{"p2", p2_done_, N_, k_, n_prime_, delta_, 0, 0,
                                                 n_prime_ == 0 ? "empty sample" : "window covers sample"});
                return enter_phase2();
            }
            want_lo_ = use_lo ? static_cast<std::uint64_t>(lo) : 0;
            want_hi_ = use_hi ? static_cast<std::uint64_t>(hi) : 0;
            step_ = Step::sort;
            return CmdSort{ldb::Interval::of(1, n_prime_), n_prime_, ++sort_id_, want_lo_, want_hi_};
        }
        case Step::sort: {
            cl_ = want_lo_ ? r.x : ExtElement::minus_inf();
            cr_ = want_hi_ ? r.y : ExtElement::plus_inf();
            if ((want_lo_ && !cl_.finite()) || (want_hi_ && !cr_.finite())) {
                return fail(Status::error, "sort did not report the requested orders");
            }
            step_ = Step::rank;
            return CmdRank{cl_, cr_};
        }
        case Step::rank: {
            const std::uint64_t rank_l = cl_.finite() ? r.a + 1 : 1;
            const std::uint64_t rank_r = cr_.finite() ? r.b + 1 : N_;
            step_ = Step::p2_prune;
            if (k_ < rank_l) {
                prune_note_ = "escape below";
                return CmdPrune{Bound{ExtElement::minus_inf(), false}, Bound{cl_, true}};
            }
            if (k_ > rank_r) {
                prune_note_ = "escape above";
                return CmdPrune{Bound{cr_, true}, Bound{ExtElement::plus_inf(), false}};
            }
            prune_note_.clear();
            return CmdPrune{Bound{cl_, false}, Bound{cr_, false}};
        }
        case Step::p2_prune: {
            apply_prune(r);
            if (status_ != Status::running) return std::nullopt;
            ++p2_done_;
            if (!prune_note_.empty()) {
                ++retries_;
                ++escapes_;
            }
            trace_.push_back(IterationRecord{"p2", p2_done_, N_, k_, n_prime_, delta_, r.a, r.b, prune_note_});
            return enter_phase2();
        }
        case Step::p3_sample: {
            if (r.a != N_) return fail(Status::error, "phase 3 sample size differs from N");
            step_ = Step::p3_sort;
            n_prime_ = r.a;
            return CmdSort{ldb::Interval::of(1, N_), N_, ++sort_id_, k_, 0};
        }
        case Step::p3_sort: {
            if (!r.x.finite()) return fail(Status::error, "phase 3 sort returned no element");
            result_ = r.x.e;
            trace_.push_back(IterationRecord{"p3", 1, N_, k_, n_prime_, 0, 0, 0, {}});
            status_ = Status::done;
            phase_ = Phase::done;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace skeap::kselect
