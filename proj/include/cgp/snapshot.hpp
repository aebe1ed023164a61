#ifndef CGP_SNAPSHOT_HPP
#define CGP_SNAPSHOT_HPP

#include <string>

#include "cgp/network.hpp"
#include "cgp/subspace.hpp"

namespace cgp {

// Versioned little-endian binary snapshots. Doubles are stored as raw IEEE
// bits, so a save/load round trip is bit-exact.

struct MemorySnapshot {
    BasisMemory memory;
    PrototypeMemory prototypes;
};

void save_memory_snapshot(const std::string& path, const BasisMemory& mem,
                          const PrototypeMemory& protos);
MemorySnapshot load_memory_snapshot(const std::string& path);

void save_network_snapshot(const std::string& path, const Network& net);
Network load_network_snapshot(const std::string& path);

}  // namespace cgp

#endif
