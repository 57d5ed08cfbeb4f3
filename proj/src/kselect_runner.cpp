#include "skeap/kselect/kselect_runner.hpp"

#include "skeap/sim/hash.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace skeap::kselect {

using namespace proto;

nlohmann::json to_json(const KSelectOutcome& o) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& r : o.trace) trace.push_back(to_json(r));
    nlohmann::json j = {{"k", o.k},
                        {"correct", o.correct},
                        {"aborted", o.aborted},
                        {"oracle", to_string(o.oracle)},
                        {"rounds", o.rounds},
                        {"phase1_iterations", o.phase1_iterations},
                        {"phase2_iterations", o.phase2_iterations},
                        {"retries", o.retries},
                        {"escapes", o.escapes},
                        {"post_phase1_N", o.post_phase1_N},
                        {"max_message_bits", o.max_message_bits},
                        {"max_congestion", o.max_congestion},
                        {"messages", o.messages},
                        {"mean_copy_participation", o.mean_copy_participation},
                        {"trace", std::move(trace)}};
    if (o.result) j["result"] = to_string(*o.result);
    if (!o.error.empty()) j["error"] = o.error;
    if (!o.violation.empty()) j["violation"] = o.violation;
    return j;
}

KSelectProcess::KSelectProcess(const ldb::Topology& topo, std::uint64_t seed, SelectorConfig cfg)
    : WaveProtocol(topo, seed, cfg) {}

void KSelectProcess::begin(std::uint64_t m, std::uint64_t k) {
    selector_.emplace(cfg_, topo_.node_count(), m, k);
    if (auto cmd = selector_->start()) start_wave(*cmd);
}

void KSelectProcess::on_wave_complete(const Command& cmd, const WaveReply& reply) {
    auto next = selector_->on_reply(reply);
    check_step(cmd);
    if (next) start_wave(*next);
}

void KSelectProcess::check_step(const Command& cmd) {
    if (!target_ || !violation_.empty()) return;
    const Selector& s = *selector_;
    if (std::holds_alternative<CmdBounds>(cmd)) {
        const auto t = ExtElement::of(*target_);
        if (!(s.last_pmin() <= t && t <= s.last_pmax())) violation_ = "phase-1 bounds exclude the target";
        return;
    }
    if (!s.last_step_pruned()) return;
    const auto all = candidates();
    const auto it = std::lower_bound(all.begin(), all.end(), *target_);
    if (it == all.end() || !(*it == *target_)) {
        violation_ = "target pruned";
    } else if (static_cast<std::uint64_t>(it - all.begin()) + 1 != s.k() || all.size() != s.N()) {
        violation_ = "survivor rank of the target differs from k";
    }
}

KSelectOutcome run_kselect(const KSelectConfig& cfg) {
    if (cfg.n < 2 || cfg.m < 1) throw std::invalid_argument("need n >= 2 and m >= 1");
    const auto topo = ldb::Topology::build(cfg.n, cfg.seed);
    KSelectProcess proc(topo, cfg.seed, cfg.selector);

    std::mt19937_64 rng(sim::mix64(cfg.seed ^ 0x6b73656c656374ULL));
    const std::uint64_t universe = cfg.priority_universe ? cfg.priority_universe : cfg.m;
    std::uniform_int_distribution<NodeId> where(0, static_cast<NodeId>(cfg.n - 1));
    std::uniform_int_distribution<std::uint64_t> prio(0, universe - 1);
    std::vector<std::uint64_t> seq(cfg.n, 0);
    std::vector<Element> all;
    all.reserve(cfg.m);
    for (std::uint64_t i = 0; i < cfg.m; ++i) {
        const NodeId v = cfg.single_node ? 0 : where(rng);
        const Element e{prio(rng), v, seq[v]++, 0};
        proc.place(v, e);
        all.push_back(e);
    }
    std::sort(all.begin(), all.end());

    KSelectOutcome out;
    out.k = cfg.k ? cfg.k : std::uniform_int_distribution<std::uint64_t>(1, cfg.m)(rng);
    if (out.k >= 1 && out.k <= cfg.m) {
        out.oracle = all[out.k - 1];
        if (cfg.verify_steps) proc.set_oracle(out.oracle);
    }

    sim::EngineConfig ec;
    ec.mode = cfg.mode;
    ec.seed = sim::mix64(cfg.seed + 17);
    ec.async_delay_max = cfg.async_delay_max;
    Engine engine(topo.owners(), topo.node_count(), ec);
    if (cfg.event_trace) engine.set_trace(cfg.event_trace);
    proc.attach(engine);
    proc.begin(cfg.m, out.k);
    auto done = [&] { return proc.finished(); };
    if (cfg.mode == sim::Mode::synchronous) {
        engine.run_rounds(proc, done, cfg.max_rounds);
    } else {
        engine.run_async(proc, done, cfg.max_rounds);
    }

    const Selector& s = proc.selector();
    out.result = s.result();
    out.aborted = s.status() == Selector::Status::aborted;
    if (s.status() == Selector::Status::running) {
        out.error = "round limit reached";
    } else if (s.status() != Selector::Status::done) {
        out.error = s.message();
    }
    out.correct = out.result && *out.result == out.oracle;
    out.violation = proc.violation();
    out.metrics = engine.summary();
    out.rounds = out.metrics.rounds;
    out.phase1_iterations = s.phase1_iterations();
    out.phase2_iterations = s.phase2_iterations();
    out.retries = s.retries();
    out.escapes = s.escapes();
    out.post_phase1_N = s.post_phase1_N();
    out.max_message_bits = engine.max_message_bits();
    out.max_congestion = engine.max_congestion();
    out.messages = engine.delivered();
    const auto part = proc.copy_tree_participation();
    if (!part.empty()) out.mean_copy_participation = std::accumulate(part.begin(), part.end(), 0.0) / part.size();
    out.trace = s.trace();
    return out;
}

}  // namespace skeap::kselect
