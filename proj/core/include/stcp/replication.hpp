#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stcp/criterion.hpp"
#include "stcp/grid.hpp"

namespace stcp {

// Desk-scale re-runs of the published experiment designs. Every runner is
// deterministic in (seed, replicate index) and parallelizes over replicates.

// Segmented AR design on a unit grid: theta1 = (-0.5, 0.6, 1), a change at
// T/2 shifts (phi, rho) by (dphi, drho); no change when both are 0.
struct ChangeCounts {
    int n = 0;
    int m0 = 0, m1 = 0, m2plus = 0;
    std::vector<double> lambda_hats; // from replicates with exactly one change
};

ChangeCounts run_detection_rates(int grid_side, int t_total, double dphi, double drho, int n_rep,
                                 std::uint64_t seed, int threads);

// Same design plus interval statistics at a fixed signal (dphi, drho = 0).
struct IntervalStudy {
    int n = 0;
    int n_m1 = 0;
    double mean_lambda = 0.0;
    double esd_lambda = 0.0;
    double mean_ci_lo = 0.0;
    double mean_ci_hi = 0.0;
    double coverage = 0.0; // fraction of intervals containing the true boundary
};

IntervalStudy run_interval_study(int grid_side, int t_total, double dphi, int n_rep, int ci_reps,
                                 double level, std::uint64_t seed, int threads);

// Penalized criterion versus the bare composite likelihood on the same data
// (exact search for both), T1 = T2 = 50.
struct PenaltyContrast {
    int n = 0;
    ChangeCounts composite_only;
    ChangeCounts penalized;
};

PenaltyContrast run_penalty_contrast(int grid_side, double dphi, int n_rep, std::uint64_t seed,
                                     int threads);

// Non-separable truth fitted under a misspecified separable model and under
// the generating family, T1 = T2 = 50.
struct MisspecificationStudy {
    int n = 0;
    ChangeCounts misspecified;
    ChangeCounts generating;
    double mis_mean_lambda = 0.0, mis_esd_lambda = 0.0;
    double gen_mean_lambda = 0.0, gen_esd_lambda = 0.0;
};

MisspecificationStudy run_misspecification_study(int grid_side, double delta, int n_rep,
                                                 std::uint64_t seed, int threads,
                                                 long long dense_budget);

// Four-segment design with a Matern third segment; candidate class
// {zero-mean, free-mean} separable AR. Tracks the change-count distribution,
// boundary statistics and per-segment model selection among m_hat = 3 runs.
struct MultiChangeStudy {
    int n = 0;
    int c_m[5] = {0, 0, 0, 0, 0}; // m_hat = 0..3, >= 4
    double mean_lambda[3] = {0, 0, 0};
    double esd_lambda[3] = {0, 0, 0};
    long long select_m1[4] = {0, 0, 0, 0}; // zero-mean picked, by segment
    long long select_m2[4] = {0, 0, 0, 0}; // free-mean picked
    int pattern_matches = 0; // segment-wise selection equals (M1, M1, M2, M2)
};

MultiChangeStudy run_multi_change_study(int grid_side, int n_rep, std::uint64_t seed, int threads);

// Mode of the walk argmax under the two fitted segment models of the interval
// design (true parameter values plugged in).
struct WalkModeStudy {
    int n = 0;
    int mode_q = 0;
    int mode_count = 0;
    int zero_count = 0;
};

WalkModeStudy run_walk_mode_study(int grid_side, int n_rep, std::uint64_t seed, int threads);

// CSV rendering of a whole published table at the given replication count.
// Stops early with a coverage note when the replicate budget runs out.
std::string replicate_table(int table_id, int n_rep, long long replicate_budget,
                            std::uint64_t seed, int threads);

} // namespace stcp
