#include "skeap/experiment/experiment.hpp"

#include "skeap/consistency/checker.hpp"
#include "skeap/consistency/history_io.hpp"
#include "skeap/kselect/kselect_runner.hpp"
#include "skeap/plus/plus_heap.hpp"
#include "skeap/proto/const_heap.hpp"
#include "skeap/sim/hash.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace skeap::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

std::string protocol_name(Protocol p) {
    switch (p) {
        case Protocol::skeap: return "skeap";
        case Protocol::skeap_plus: return "skeap-plus";
        case Protocol::kselect: return "kselect";
    }
    return "?";
}

Protocol parse_protocol(const std::string& s) {
    if (s == "skeap") return Protocol::skeap;
    if (s == "skeap-plus") return Protocol::skeap_plus;
    if (s == "kselect") return Protocol::kselect;
    throw std::invalid_argument("unknown protocol '" + s + "' (skeap, skeap-plus, kselect)");
}

void validate(const ExperimentSpec& s) {
    if (s.ns.empty()) throw std::invalid_argument("--n: need at least one network size");
    for (auto n : s.ns) {
        if (n < 2) throw std::invalid_argument("--n: sizes must be at least 2");
    }
    if (s.seeds == 0) throw std::invalid_argument("--seeds must be positive");
    if (s.protocol == Protocol::skeap && s.priorities == 0) throw std::invalid_argument("--priorities must be positive");
    if (s.protocol != Protocol::kselect && s.lambda == 0) throw std::invalid_argument("--lambda must be positive");
    if (s.protocol != Protocol::kselect && s.epochs == 0) throw std::invalid_argument("--epochs must be positive");
    if (!(s.q > 0)) throw std::invalid_argument("--q must be positive");
    if (!(s.c_delta > 0)) throw std::invalid_argument("--c-delta must be positive");
    if (s.async_delay_max == 0) throw std::invalid_argument("async delay bound must be positive");
}

namespace {

constexpr std::uint64_t heap_round_limit = 5'000'000;

std::uint64_t power_cap(std::size_t n, double q, std::uint64_t cap) {
    const double v = std::pow(static_cast<double>(n), q);
    return v >= static_cast<double>(cap) ? cap : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(v)));
}

sim::EngineConfig engine_config(const ExperimentSpec& s, std::uint64_t seed) {
    sim::EngineConfig ec;
    ec.mode = s.mode;
    ec.seed = sim::mix64(seed + 17);
    ec.async_delay_max = s.async_delay_max;
    return ec;
}

proto::WorkloadConfig workload(const ExperimentSpec& s, std::uint64_t seed, std::uint64_t universe) {
    proto::WorkloadConfig w;
    w.lambda = s.lambda;
    w.priority_universe = universe;
    w.epochs = s.epochs;
    w.seed = sim::mix64(seed ^ 0x776f726b6c6f6164ULL);
    w.insert_probability = s.insert_probability;
    return w;
}

template <class Proc>
void drive(proto::Engine& e, Proc& p) {
    auto done = [&] { return p.finished() && e.pending() == 0; };
    if (e.mode() == sim::Mode::synchronous) {
        e.run_rounds(p, done, heap_round_limit);
    } else {
        e.run_async(p, done, heap_round_limit);
    }
}

json base_metrics(const ExperimentSpec& s, std::size_t n, std::uint64_t seed, const sim::MetricsSummary& m) {
    json j = sim::to_json(m);
    j["protocol"] = protocol_name(s.protocol);
    j["n"] = n;
    j["seed"] = seed;
    j["mode"] = s.mode == sim::Mode::synchronous ? "sync" : "async";
    j["lambda"] = s.protocol == Protocol::kselect ? 1u : s.lambda;
    return j;
}

}  // namespace

RunResult run_one(const ExperimentSpec& s, std::size_t n, std::uint64_t seed, std::ostream* trace,
                  std::ostream* history) {
    RunResult out;
    if (s.protocol == Protocol::kselect) {
        kselect::KSelectConfig c;
        c.n = n;
        c.m = power_cap(n, s.q, s.m_cap);
        c.seed = seed;
        c.mode = s.mode;
        c.async_delay_max = s.async_delay_max;
        c.selector.c_delta = s.c_delta;
        c.event_trace = trace;
        const auto o = kselect::run_kselect(c);
        out.metrics = base_metrics(s, n, seed, o.metrics);
        out.metrics["kselect"] = kselect::to_json(o);
        out.metrics["kselect"].erase("metrics");
        out.ok = o.correct && o.violation.empty() && o.error.empty();
        out.verdict = {{"correct", o.correct}, {"k", o.k}, {"m", c.m}};
        if (!o.error.empty()) out.verdict["error"] = o.error;
        if (!o.violation.empty()) out.verdict["violation"] = o.violation;
        return out;
    }

    const auto topo = ldb::Topology::build(n, seed);
    proto::Engine engine(topo.owners(), topo.node_count(), engine_config(s, seed));
    if (trace) engine.set_trace(trace);
    consistency::History h;
    std::uint64_t max_load = 0, stored = 0, epochs = 0;
    json extra;
    if (s.protocol == Protocol::skeap) {
        proto::ConstHeap heap(topo, s.priorities, seed);
        heap.set_workload(workload(s, seed, s.priorities));
        heap.attach(engine);
        drive(engine, heap);
        if (!heap.finished()) throw std::runtime_error("run did not finish within the round limit");
        for (NodeId v = 0; v < n; ++v) {
            std::uint64_t load = 0;
            for (auto k : {ldb::VKind::left, ldb::VKind::middle, ldb::VKind::right}) load += heap.stored_at(ldb::vaddr(v, k));
            max_load = std::max(max_load, load);
            stored += load;
        }
        epochs = heap.epoch();
        h = heap.history();
    } else {
        plus::PlusHeap heap(topo, seed, kselect::SelectorConfig{s.c_delta});
        heap.set_workload(workload(s, seed, power_cap(n, s.q, UINT64_MAX / 2)));
        heap.attach(engine);
        drive(engine, heap);
        if (!heap.finished()) throw std::runtime_error("run did not finish within the round limit");
        for (NodeId v = 0; v < n; ++v) {
            max_load = std::max<std::uint64_t>(max_load, heap.stored(v).size());
            stored += heap.stored(v).size();
        }
        epochs = heap.epoch();
        h = heap.history();
        extra = {{"deletemin_phases", heap.deletemin_phases()},
                 {"optimality_violations", heap.optimality_violations()},
                 {"selections", heap.selections()},
                 {"selection_retries", heap.selection_retries()},
                 {"selection_phase2_iterations", heap.selection_phase2_iterations()}};
    }
    if (history) consistency::write_history(*history, h);
    const auto v = consistency::evaluate(h, consistency::serial_order(h));
    out.verdict = consistency::to_json(v);
    out.ok = v.serializable && v.heap_consistent;
    if (s.protocol == Protocol::skeap) out.ok = out.ok && v.locally_consistent;
    if (s.protocol == Protocol::skeap_plus) {
        const bool optimal = extra["optimality_violations"].get<std::uint64_t>() == 0;
        out.verdict["optimal_deletes"] = optimal;
        out.ok = out.ok && optimal;
    }
    out.metrics = base_metrics(s, n, seed, engine.summary());
    out.metrics["operations"] = h.records.size();
    out.metrics["inserts"] = std::count_if(h.records.begin(), h.records.end(),
                                           [](const auto& r) { return r.kind == consistency::OpKind::insert; });
    out.metrics["epochs"] = epochs;
    out.metrics["stored"] = stored;
    out.metrics["max_load"] = max_load;
    if (!extra.is_null()) out.metrics["skeap_plus"] = extra;
    return out;
}

ExperimentReport run_experiment(const ExperimentSpec& s) {
    validate(s);
    ExperimentReport rep;
    const bool write = !s.out_dir.empty();
    const fs::path root(s.out_dir);
    std::ofstream verdicts, csv;
    if (write) {
        fs::create_directories(root / "metrics");
        if (s.traces) {
            fs::create_directories(root / "traces");
            if (s.protocol != Protocol::kselect) fs::create_directories(root / "histories");
        }
        verdicts.open(root / "verdicts.jsonl");
        csv.open(root / "runs.csv");
        csv << "protocol,n,seed,rounds,max_congestion,max_message_bits,delivered,ok\n";
    }
    const std::string name = protocol_name(s.protocol);
    for (std::size_t n : s.ns) {
        for (std::uint64_t i = 0; i < s.seeds; ++i) {
            const std::uint64_t seed = s.first_seed + i;
            const std::string stem = name + "_n" + std::to_string(n) + "_s" + std::to_string(seed);
            std::ofstream trace, history;
            if (write && s.traces) {
                trace.open(root / "traces" / (stem + ".jsonl"));
                if (s.protocol != Protocol::kselect) history.open(root / "histories" / (stem + ".jsonl"));
            }
            auto r = run_one(s, n, seed, trace.is_open() ? &trace : nullptr, history.is_open() ? &history : nullptr);
            if (!r.ok) ++rep.failures;
            if (write) {
                std::ofstream(root / "metrics" / (stem + ".json")) << r.metrics.dump(1) << '\n';
                json line = {{"protocol", name}, {"n", n}, {"seed", seed}, {"ok", r.ok}, {"verdict", r.verdict}};
                verdicts << line.dump() << '\n';
                csv << name << ',' << n << ',' << seed << ',' << r.metrics["rounds"] << ','
                    << r.metrics["max_congestion"] << ',' << r.metrics["max_message_bits"] << ','
                    << r.metrics["delivered"] << ',' << (r.ok ? 1 : 0) << '\n';
            }
            r.metrics.erase("per_round");  // the files keep it; memory does not need it
            rep.runs.push_back(std::move(r));
        }
    }
    return rep;
}

FitReport summarize(const std::vector<json>& metrics) {
    std::map<std::size_t, std::vector<const json*>> by_n;
    for (const auto& m : metrics) by_n[m.at("n").get<std::size_t>()].push_back(&m);
    if (by_n.size() < 3) throw std::invalid_argument("summarize needs runs at three or more distinct n");

    FitReport rep;
    std::vector<double> xs, mean_rounds, max_bits, all_x, all_rounds;
    for (const auto& [n, runs] : by_n) {
        SizeRow row;
        row.n = n;
        row.runs = runs.size();
        const double l = std::log2(static_cast<double>(n));
        for (const json* m : runs) {
            const double rounds = m->at("rounds").get<double>();
            const double bits = m->at("max_message_bits").get<double>();
            const double cong = m->at("max_congestion").get<double>();
            const double lambda = std::max(1.0, m->value("lambda", 1.0));
            row.mean_rounds += rounds;
            row.max_rounds = std::max(row.max_rounds, rounds);
            row.mean_bits += bits;
            row.max_bits = std::max(row.max_bits, bits);
            row.max_congestion = std::max(row.max_congestion, cong);
            row.congestion_per_lambda = std::max(row.congestion_per_lambda, cong / lambda);
            all_x.push_back(l);
            all_rounds.push_back(rounds);
        }
        row.mean_rounds /= static_cast<double>(row.runs);
        row.mean_bits /= static_cast<double>(row.runs);
        rep.max_congestion_per_lambda = std::max(rep.max_congestion_per_lambda, row.congestion_per_lambda);
        xs.push_back(l);
        mean_rounds.push_back(row.mean_rounds);
        max_bits.push_back(row.max_bits);
        rep.table.push_back(row);
    }
    rep.rounds = fit_linear(xs, mean_rounds);
    rep.rounds_all_runs = fit_linear(all_x, all_rounds);
    rep.bits = fit_linear(xs, max_bits);
    return rep;
}

namespace {
json fit_json(const LinearFit& f) {
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", f.points}};
}
}  // namespace

json to_json(const FitReport& r) {
    json table = json::array();
    for (const auto& row : r.table) {
        table.push_back({{"n", row.n},
                         {"runs", row.runs},
                         {"mean_rounds", row.mean_rounds},
                         {"max_rounds", row.max_rounds},
                         {"mean_max_message_bits", row.mean_bits},
                         {"max_message_bits", row.max_bits},
                         {"max_congestion", row.max_congestion},
                         {"max_congestion_per_lambda", row.congestion_per_lambda}});
    }
    return {{"rounds_vs_log2n", fit_json(r.rounds)},
            {"rounds_vs_log2n_all_runs", fit_json(r.rounds_all_runs)},
            {"max_message_bits_vs_log2n", fit_json(r.bits)},
            {"max_congestion_per_lambda", r.max_congestion_per_lambda},
            {"per_n", std::move(table)}};
}

std::string to_csv(const FitReport& r) {
    std::ostringstream os;
    os << "n,runs,mean_rounds,max_rounds,mean_max_message_bits,max_message_bits,max_congestion,"
          "max_congestion_per_lambda\n";
    for (const auto& row : r.table) {
        os << row.n << ',' << row.runs << ',' << row.mean_rounds << ',' << row.max_rounds << ',' << row.mean_bits << ','
           << row.max_bits << ',' << row.max_congestion << ',' << row.congestion_per_lambda << '\n';
    }
    return os.str();
}

}  // namespace skeap::experiment
