#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace skeap {

/// Real node identifier, dense in 0..n-1 within a simulation.
using NodeId = std::uint32_t;

/// Engine-level address of a message endpoint (a virtual node index for the overlay protocols).
using Address = std::uint32_t;

/// Raised for conditions that indicate a bug in a protocol or the harness, never a protocol outcome.
class SimulationFault : public std::logic_error {
public:
    explicit SimulationFault(const std::string& what) : std::logic_error(what) {}
};

}  // namespace skeap
