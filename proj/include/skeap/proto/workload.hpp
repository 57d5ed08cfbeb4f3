#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace skeap::proto {

struct WorkloadConfig {
    std::uint32_t lambda = 0;              // requests per activation
    std::uint64_t priority_universe = 1;   // priorities drawn from [0, universe)
    std::uint64_t epochs = 0;              // generation stops once the anchor reaches this epoch
    std::uint64_t seed = 1;
    double insert_probability = 0.5;
};

struct GeneratedOp {
    bool is_insert = false;
    std::uint64_t priority = 0;
};

class Workload {
public:
    void configure(const WorkloadConfig& c) {
        config_ = c;
        rng_.seed(c.seed);
        closed_ = c.lambda == 0 || c.epochs == 0;
    }

    // Closes generation for good once `epoch` has reached the configured count.
    void observe_epoch(std::uint64_t epoch) {
        if (epoch >= config_.epochs) closed_ = true;
    }
    bool closed() const noexcept { return closed_; }

    std::vector<GeneratedOp> generate() {
        std::vector<GeneratedOp> out;
        if (closed_) return out;
        std::bernoulli_distribution coin(config_.insert_probability);
        std::uniform_int_distribution<std::uint64_t> prio(0, config_.priority_universe - 1);
        for (std::uint32_t i = 0; i < config_.lambda; ++i) {
            GeneratedOp op;
            op.is_insert = coin(rng_);
            if (op.is_insert) op.priority = prio(rng_);
            out.push_back(op);
        }
        return out;
    }

private:
    WorkloadConfig config_;
    std::mt19937_64 rng_;
    bool closed_ = true;
};

}  // namespace skeap::proto
