#pragma once

#include <nlohmann/json_fwd.hpp>

#include <string>

#include "pwabf/barrier.hpp"
#include "pwabf/pwa.hpp"
#include "pwabf/relu.hpp"

namespace pwabf::io {

using json = nlohmann::json;

/// Canonical serialization: sorted keys, numbers printed with %.17g.
/// Hashes and golden files are stable under reload.
std::string canonical_dump(const json& j);

/// Hex SHA-256 digest.
std::string sha256_hex(const std::string& data);

// System files: {"dim": n, "cells": [{"id","E","e","A","a","vertices"?}]}.
PwaDynamics load_system(const std::string& path);
PwaDynamics system_from_json(const json& j);
json system_to_json(const PwaDynamics& d);
void save_system(const PwaDynamics& d, const std::string& path);

/// Content hash of the canonicalized cell list; ties a barrier file to the
/// partition generation it certifies.
std::string partition_hash(const PwaDynamics& d);

// Network files: {"W1","b1","W2","b2","box_lo","box_hi"}.
struct NetworkFile {
    ReluNet net;
    HPolytope box;
};
NetworkFile load_network(const std::string& path);
bool looks_like_network(const json& j);

// Barrier files: {"alpha","eps","cells":[{"id","p","q"}],"partition_hash"}.
struct BarrierFile {
    AlphaGain alpha;
    Epsilons eps;
    BarrierCandidate barrier;
    std::string partition_hash;
};
BarrierFile load_barrier(const std::string& path);
void save_barrier(const BarrierCandidate& b, AlphaGain alpha, Epsilons eps,
                  const std::string& hash, const std::string& path);

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pwabf::io
