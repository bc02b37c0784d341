#pragma once

#include <cstdint>
#include <string>

#include "stcp/config.hpp"
#include "stcp/criterion.hpp"

namespace stcp {

inline constexpr int kResultSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// Serialized detection outcome. Deterministic for a fixed config and seed:
// rerunning with the embedded config reproduces every field except the
// wall-clock timing entry.
struct ResultDocument {
    Segmentation segmentation;
    double c_kn = 0.0;
    double pruning_k = 0.0;
    std::uint64_t seed = 0;
    int threads = 1;
    double timing_seconds = 0.0;
    RunConfig config;

    std::string to_json() const; // stable field order, 17-digit numbers
    void save(const std::string& path) const;
};

// Reads back the fields needed by downstream commands.
ResultDocument load_result(const std::string& path);

} // namespace stcp
