#pragma once

#include "skeap/ldb/label.hpp"
#include "skeap/sim/types.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace skeap::ldb {

// Storage of one virtual node. A get that arrives before its put is parked until the put shows up.
template <class Value, class Request>
class DhtStore {
public:
    // Returns the parked request this put satisfies, if any; the value is then not stored.
    std::optional<Request> put(Label key, Value v) {
        if (auto it = parked_.find(key); it != parked_.end()) {
            Request r = std::move(it->second);
            parked_.erase(it);
            consumed_.insert(key);
            return r;
        }
        if (stored_.count(key) || consumed_.count(key)) {
            throw SimulationFault("duplicate DHT key " + std::to_string(key));
        }
        stored_.emplace(key, std::move(v));
        return std::nullopt;
    }

    // Removes and returns the stored value, or parks the request.
    std::optional<Value> get(Label key, Request r) {
        if (auto it = stored_.find(key); it != stored_.end()) {
            Value v = std::move(it->second);
            stored_.erase(it);
            consumed_.insert(key);
            return v;
        }
        if (!parked_.emplace(key, std::move(r)).second) {
            throw SimulationFault("two gets for DHT key " + std::to_string(key));
        }
        return std::nullopt;
    }

    std::size_t size() const noexcept { return stored_.size(); }
    std::size_t parked() const noexcept { return parked_.size(); }
    const std::map<Label, Value>& items() const noexcept { return stored_; }

private:
    std::map<Label, Value> stored_;
    std::map<Label, Request> parked_;
    std::set<Label> consumed_;  // keys are single-use
};

}  // namespace skeap::ldb
