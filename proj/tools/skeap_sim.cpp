// Command-line driver: runs sweeps and fuzz campaigns, or fits a summary over metrics files.
#include "skeap/experiment/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace skeap::experiment;

namespace {

// "16,64,256" or "16..1024" (powers of two between the ends).
std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    if (auto dots = text.find(".."); dots != std::string::npos) {
        const std::size_t lo = std::stoul(text.substr(0, dots));
        const std::size_t hi = std::stoul(text.substr(dots + 2));
        if (lo < 2 || hi < lo) throw std::invalid_argument("--n: bad range " + text);
        for (std::size_t n = lo; n <= hi; n *= 2) out.push_back(n);
        return out;
    }
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) out.push_back(std::stoul(part));
    return out;
}

std::vector<nlohmann::json> load_metrics(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        fs::path p(in);
        if (fs::is_directory(p / "metrics")) p /= "metrics";
        if (fs::is_directory(p)) {
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.path().extension() == ".json") files.push_back(e.path());
            }
        } else {
            files.push_back(p);
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<nlohmann::json> out;
    for (const auto& f : files) {
        std::ifstream is(f);
        if (!is) throw std::runtime_error("cannot read " + f.string());
        out.push_back(nlohmann::json::parse(is));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SKEAP / SKEAP+ / KSelect simulator"};
    app.require_subcommand(0, 1);

    ExperimentSpec spec;
    std::string protocol = "skeap", sizes = "16", mode = "sync";
    app.add_option("--protocol", protocol, "skeap | skeap-plus | kselect")->capture_default_str();
    app.add_option("--n", sizes, "network sizes: 16,64 or 16..1024")->capture_default_str();
    app.add_option("--seeds", spec.seeds, "runs per size")->capture_default_str();
    app.add_option("--first-seed", spec.first_seed)->capture_default_str();
    app.add_option("--lambda", spec.lambda, "requests per node activation")->capture_default_str();
    app.add_option("--priorities", spec.priorities, "priority count |P| (skeap)")->capture_default_str();
    app.add_option("--q", spec.q, "skeap-plus: universe n^q; kselect: m = n^q")->capture_default_str();
    app.add_option("--mode", mode, "sync | async")->capture_default_str();
    app.add_option("--delay", spec.async_delay_max, "async delivery delay bound")->capture_default_str();
    app.add_option("--epochs", spec.epochs, "epochs with request generation")->capture_default_str();
    app.add_option("--insert-prob", spec.insert_probability)->capture_default_str();
    app.add_option("--c-delta", spec.c_delta, "phase-2 window constant")->capture_default_str();
    app.add_option("--out", spec.out_dir, "output directory");
    bool no_trace = false;
    app.add_flag("--no-trace", no_trace, "skip event traces and histories");

    auto* sum = app.add_subcommand("summarize", "fit rounds and message size against log2 n");
    std::vector<std::string> inputs;
    std::string sum_out;
    sum->add_option("inputs", inputs, "metrics files or directories")->required();
    sum->add_option("--out", sum_out, "directory for fit.json and sizes.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sum->parsed()) {
            const auto rep = summarize(load_metrics(inputs));
            const auto j = to_json(rep);
            std::cout << j.dump(2) << '\n';
            if (!sum_out.empty()) {
                fs::create_directories(sum_out);
                std::ofstream(fs::path(sum_out) / "fit.json") << j.dump(2) << '\n';
                std::ofstream(fs::path(sum_out) / "sizes.csv") << to_csv(rep);
            }
            return 0;
        }
        spec.protocol = parse_protocol(protocol);
        spec.ns = parse_sizes(sizes);
        if (mode == "sync") {
            spec.mode = skeap::sim::Mode::synchronous;
        } else if (mode == "async") {
            spec.mode = skeap::sim::Mode::asynchronous;
        } else {
            throw std::invalid_argument("--mode must be sync or async");
        }
        spec.traces = !no_trace;
        validate(spec);
        const auto rep = run_experiment(spec);
        for (const auto& r : rep.runs) {
            std::cout << r.metrics["protocol"].get<std::string>() << " n=" << r.metrics["n"] << " seed=" << r.metrics["seed"]
                      << " rounds=" << r.metrics["rounds"] << " congestion=" << r.metrics["max_congestion"]
                      << " bits=" << r.metrics["max_message_bits"] << (r.ok ? " ok" : " FAIL " + r.verdict.dump())
                      << '\n';
        }
        std::cout << rep.runs.size() - rep.failures << '/' << rep.runs.size() << " runs passed\n";
        return rep.failures == 0 ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
