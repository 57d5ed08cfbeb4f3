#include "skeap/experiment/experiment.hpp"
#include "skeap/experiment/fit.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace skeap;
using namespace skeap::experiment;

TEST_CASE("fit recovers an exact logarithmic series") {
    std::vector<double> xs, ys;
    for (double n : {16.0, 64.0, 256.0, 1024.0}) {
        xs.push_back(std::log2(n));
        ys.push_back(5 * std::log2(n));
    }
    const auto f = fit_linear(xs, ys);
    CHECK(f.slope == doctest::Approx(5.0));
    CHECK(f.intercept == doctest::Approx(0.0));
    CHECK(f.r2 == doctest::Approx(1.0));
}

TEST_CASE("fit of a constant series has zero slope") {
    const std::vector<double> xs{1, 2, 3, 4}, ys{7, 7, 7, 7};
    const auto f = fit_linear(xs, ys);
    CHECK(f.slope == doctest::Approx(0.0));
    CHECK(f.intercept == doctest::Approx(7.0));
}

TEST_CASE("fit and summary reject too few sizes") {
    const std::vector<double> xs{1, 2, 2}, ys{1, 2, 3};
    CHECK_THROWS_AS(fit_linear(xs, ys), std::invalid_argument);
    std::vector<nlohmann::json> m;
    for (int n : {4, 8, 8}) m.push_back({{"n", n}, {"rounds", 10}, {"max_message_bits", 20}, {"max_congestion", 3}});
    CHECK_THROWS_AS(summarize(m), std::invalid_argument);
}

TEST_CASE("summary groups runs by size") {
    std::vector<nlohmann::json> m;
    for (int n : {4, 16, 64}) {
        for (int s = 0; s < 2; ++s) {
            m.push_back({{"n", n},
                         {"rounds", 3 * std::log2(n) + s},
                         {"max_message_bits", 10},
                         {"max_congestion", 8},
                         {"lambda", 4}});
        }
    }
    const auto r = summarize(m);
    REQUIRE(r.table.size() == 3);
    CHECK(r.rounds.slope == doctest::Approx(3.0));
    CHECK(r.rounds.r2 == doctest::Approx(1.0));
    CHECK(r.rounds_all_runs.r2 < 1.0);
    CHECK(r.max_congestion_per_lambda == doctest::Approx(2.0));
    CHECK(to_csv(r).rfind("n,runs,", 0) == 0);
}

TEST_CASE("invalid specs are usage errors") {
    ExperimentSpec s;
    s.ns = {};
    CHECK_THROWS_AS(validate(s), std::invalid_argument);
    s.ns = {1};
    CHECK_THROWS_AS(validate(s), std::invalid_argument);
    s.ns = {8};
    s.seeds = 0;
    CHECK_THROWS_AS(validate(s), std::invalid_argument);
    CHECK_THROWS_AS(parse_protocol("skiplist"), std::invalid_argument);
}

TEST_CASE("identical specs give identical outputs") {
    for (auto p : {Protocol::skeap, Protocol::skeap_plus, Protocol::kselect}) {
        ExperimentSpec s;
        s.protocol = p;
        s.mode = sim::Mode::asynchronous;
        s.lambda = 2;
        s.epochs = 2;
        std::ostringstream t1, t2, h1, h2;
        const auto a = run_one(s, 6, 3, &t1, &h1);
        const auto b = run_one(s, 6, 3, &t2, &h2);
        CHECK(a.ok);
        CHECK(a.metrics.dump() == b.metrics.dump());
        CHECK(t1.str() == t2.str());
        CHECK(h1.str() == h2.str());
        CHECK(!t1.str().empty());
    }
}

TEST_CASE("an experiment writes one verdict line per run") {
    const auto dir = std::filesystem::temp_directory_path() / "skeap_experiment_test";
    std::filesystem::remove_all(dir);
    ExperimentSpec s;
    s.protocol = Protocol::skeap;
    s.ns = {4, 8};
    s.seeds = 3;
    s.lambda = 2;
    s.out_dir = dir.string();
    const auto rep = run_experiment(s);
    CHECK(rep.failures == 0);
    CHECK(rep.runs.size() == 6);
    std::ifstream v(dir / "verdicts.jsonl");
    int lines = 0;
    for (std::string line; std::getline(v, line);) {
        CHECK(nlohmann::json::parse(line)["ok"] == true);
        ++lines;
    }
    CHECK(lines == 6);
    CHECK(std::filesystem::exists(dir / "metrics" / "skeap_n8_s3.json"));
    CHECK(std::filesystem::exists(dir / "traces" / "skeap_n4_s1.jsonl"));
    CHECK(std::filesystem::exists(dir / "histories" / "skeap_n4_s1.jsonl"));
    std::filesystem::remove_all(dir);
}
