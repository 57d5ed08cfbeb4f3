#pragma once

#include "skeap/experiment/fit.hpp"
#include "skeap/sim/engine.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace skeap::experiment {

enum class Protocol : std::uint8_t { skeap, skeap_plus, kselect };

std::string protocol_name(Protocol p);
Protocol parse_protocol(const std::string& s);

struct ExperimentSpec {
    Protocol protocol = Protocol::skeap;
    std::vector<std::size_t> ns{16};
    std::uint64_t seeds = 1;       // runs per n, seeds first_seed, first_seed+1, ...
    std::uint64_t first_seed = 1;
    std::uint32_t lambda = 1;      // requests per activation (heaps)
    std::size_t priorities = 2;    // |P| for SKEAP
    // SKEAP+: priorities drawn from [0, n^q). KSelect: m = n^q elements (capped), priorities in [0, m).
    double q = 2.0;
    std::uint64_t m_cap = 200000;
    sim::Mode mode = sim::Mode::synchronous;
    std::uint64_t async_delay_max = 4;
    std::uint64_t epochs = 4;
    double insert_probability = 0.5;
    double c_delta = 2.0;
    std::string out_dir;  // empty: keep results in memory only
    bool traces = true;   // per-run event trace and history files
};

// Throws std::invalid_argument with a usage message.
void validate(const ExperimentSpec& spec);

struct RunResult {
    nlohmann::json metrics;  // run summary incl. per-round table
    nlohmann::json verdict;
    bool ok = false;
};

// One (n, seed) run. Event trace and operation history go to the given streams when set.
RunResult run_one(const ExperimentSpec& spec, std::size_t n, std::uint64_t seed, std::ostream* trace = nullptr,
                  std::ostream* history = nullptr);

struct ExperimentReport {
    std::vector<RunResult> runs;
    std::size_t failures = 0;
};

// Runs every (n, seed); with an output directory writes metrics/, traces/, histories/,
// verdicts.jsonl and runs.csv.
ExperimentReport run_experiment(const ExperimentSpec& spec);

struct SizeRow {
    std::size_t n = 0;
    std::size_t runs = 0;
    double mean_rounds = 0, max_rounds = 0;
    double mean_bits = 0, max_bits = 0;
    double max_congestion = 0;
    double congestion_per_lambda = 0;
};

struct FitReport {
    std::vector<SizeRow> table;
    LinearFit rounds;             // per-n mean rounds against log2 n
    LinearFit rounds_all_runs;    // every run as its own point
    LinearFit bits;               // per-n max message bits against log2 n
    double max_congestion_per_lambda = 0;
};

// Needs runs at three or more distinct n.
FitReport summarize(const std::vector<nlohmann::json>& metrics);
nlohmann::json to_json(const FitReport& r);
std::string to_csv(const FitReport& r);

}  // namespace skeap::experiment
