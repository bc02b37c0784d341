#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stcp/criterion.hpp"
#include "stcp/models.hpp"
#include "stcp/search.hpp"

namespace stcp {

// Flat key = value run configuration. Unknown keys are rejected; every run
// can emit the fully resolved set (defaults filled in) for reproduction.
class RunConfig {
public:
    RunConfig(); // defaults only

    static RunConfig from_file(const std::string& path);
    static RunConfig from_string(const std::string& text);

    void set(const std::string& key, const std::string& value); // validates the key
    std::string get(const std::string& key) const;
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    // Typed accessors over the resolved map.
    int get_int(const std::string& key) const;
    long long get_int64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_onoff(const std::string& key) const;

    // Serialization of the resolved configuration, sorted by key.
    std::string to_string() const;
    const std::map<std::string, std::string>& entries() const { return values_; }

    // Derived pieces used across the pipeline.
    std::vector<ModelOrder> models() const;
    SpatialKernel spatial_kernel() const;
    OptimizerConfig optimizer() const;
    SearchConfig search(int n_threads) const;
    bool c_uses_full_series() const;

private:
    std::map<std::string, std::string> values_;
};

} // namespace stcp
