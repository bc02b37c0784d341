#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "stcp/grid.hpp"

namespace stcp {

// A complete station-by-time panel read from the long-format CSV contract.
// Geographic files carry columns station_id,lat,lon,time_index,value; planar
// files carry station_id,x,y,time_index,value. Header required, UTF-8, LF or
// CRLF. Missing values are absent rows and are rejected.
struct Panel {
    SpatialDomain domain;
    std::vector<long long> time_indices; // sorted, one per row of values
    Eigen::MatrixXd values;              // T x S
};

Panel load_csv(const std::string& path);
void write_csv(const Panel& panel, const std::string& path);

// Elementwise log(1 + y); rejects negative input.
Eigen::MatrixXd transform_log1(const Eigen::MatrixXd& values);

struct Preprocessed {
    Eigen::MatrixXd residuals;     // T x S
    Eigen::MatrixXd month_effects; // period x S (per-station) or period x 1 (global)
    int period = 12;
    bool per_station = true;
};

// Removes seasonal class means: per (station, month-of-year) cell by default,
// or one global per-month effect shared by all stations.
Preprocessed remove_month_effects(const Eigen::MatrixXd& values,
                                  const std::vector<long long>& time_indices, int period = 12,
                                  bool per_station = true);

} // namespace stcp
