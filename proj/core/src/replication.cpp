#include "stcp/replication.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "stcp/errors.hpp"
#include "stcp/inference.hpp"
#include "stcp/pipeline.hpp"
#include "stcp/rng.hpp"
#include "stcp/search.hpp"
#include "stcp/simulate.hpp"
#include "stcp/threading.hpp"

namespace stcp {

namespace {

constexpr double kCutoff = 2.0;
constexpr int kLag = 1;
constexpr double kEps = 0.1;

Eigen::VectorXd ar_theta(double phi, double rho, double sigma2) {
    Eigen::VectorXd theta(3);
    theta << phi, rho, sigma2;
    return theta;
}

struct DetectSetup {
    SpatialDomain domain;
    NeighborGraph graph;
    double c_kn;
};

DetectSetup make_setup(int grid_side, int t_total) {
    SpatialDomain domain = make_grid_domain(grid_side, grid_side);
    NeighborGraph graph = build_neighbors(domain, kCutoff);
    PairConfig cfg{kLag, graph};
    const double c = normalizing_constant(t_total, cfg);
    return {std::move(domain), std::move(graph), c};
}

Segmentation detect_once(const DetectSetup& setup, const Eigen::MatrixXd& data,
                         const std::vector<ModelOrder>& models, Objective objective,
                         bool use_exact, std::uint64_t seed) {
    CompositeLikelihood lik(data, PairConfig{kLag, setup.graph});
    OptimizerConfig opt;
    SegmentCostModel cost(lik, models, opt, setup.c_kn, seed, objective);
    SearchConfig search;
    search.epsilon_lambda = kEps;
    if (use_exact) return exact_detect(cost, search);
    return pelt_detect(cost, search);
}

void accumulate(ChangeCounts& counts, const Segmentation& seg, int t_total, std::mutex& mu) {
    std::lock_guard<std::mutex> lock(mu);
    counts.n += 1;
    if (seg.m == 0) {
        counts.m0 += 1;
    } else if (seg.m == 1) {
        counts.m1 += 1;
        counts.lambda_hats.push_back(static_cast<double>(seg.change_points[0]) /
                                     static_cast<double>(t_total));
    } else {
        counts.m2plus += 1;
    }
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double esd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace

ChangeCounts run_detection_rates(int grid_side, int t_total, double dphi, double drho, int n_rep,
                                 std::uint64_t seed, int threads) {
    const DetectSetup setup = make_setup(grid_side, t_total);
    const ModelOrder m1 = make_order(Family::SepExpAr, MeanKind::Zero);
    const bool has_change = dphi != 0.0 || drho != 0.0;

    ChangeCounts counts;
    std::mutex mu;
    parallel_for(static_cast<std::size_t>(n_rep), threads, [&](std::size_t r) {
        PiecewiseSpec spec{setup.domain, {}, mix_seed(seed, 0x7AB1u, r)};
        if (has_change) {
            spec.segments = {{t_total / 2, m1, ar_theta(-0.5, 0.6, 1.0)},
                             {t_total - t_total / 2, m1, ar_theta(-0.5 + dphi, 0.6 + drho, 1.0)}};
        } else {
            spec.segments = {{t_total, m1, ar_theta(-0.5, 0.6, 1.0)}};
        }
        const PiecewiseData pd = gen_piecewise(spec);
        const Segmentation seg =
            detect_once(setup, pd.data, {m1}, Objective::Clmdl, false, mix_seed(seed, 0xF17u, r));
        accumulate(counts, seg, t_total, mu);
    });
    return counts;
}

IntervalStudy run_interval_study(int grid_side, int t_total, double dphi, int n_rep, int ci_reps,
                                 double level, std::uint64_t seed, int threads) {
    const DetectSetup setup = make_setup(grid_side, t_total);
    const ModelOrder m1 = make_order(Family::SepExpAr, MeanKind::Zero);
    const int true_tau = t_total / 2;
    const int q_radius = 2 * static_cast<int>(std::ceil(kEps * t_total));

    IntervalStudy study;
    std::vector<double> lambdas, lo, hi;
    int covered = 0;
    std::mutex mu;
    parallel_for(static_cast<std::size_t>(n_rep), threads, [&](std::size_t r) {
        PiecewiseSpec spec{setup.domain,
                           {{true_tau, m1, ar_theta(-0.5, 0.6, 1.0)},
                            {t_total - true_tau, m1, ar_theta(-0.5 + dphi, 0.6, 1.0)}},
                           mix_seed(seed, 0x7AB2u, r)};
        const PiecewiseData pd = gen_piecewise(spec);
        const Segmentation seg =
            detect_once(setup, pd.data, {m1}, Objective::Clmdl, false, mix_seed(seed, 0xF18u, r));
        if (seg.m != 1) {
            std::lock_guard<std::mutex> lock(mu);
            study.n += 1;
            return;
        }
        FittedModel left{seg.segments[0].order, seg.segments[0].theta};
        FittedModel right{seg.segments[1].order, seg.segments[1].theta};
        const int tau_hat = seg.change_points[0];
        const ChangePointInterval ci =
            changepoint_ci(setup.domain, setup.graph, left, right, tau_hat, t_total, level,
                           ci_reps, q_radius, mix_seed(seed, 0xC1A0u, r));
        std::lock_guard<std::mutex> lock(mu);
        study.n += 1;
        study.n_m1 += 1;
        lambdas.push_back(static_cast<double>(tau_hat) / t_total);
        lo.push_back(ci.lambda_lo);
        hi.push_back(ci.lambda_hi);
        covered += (true_tau >= ci.tau_lo && true_tau <= ci.tau_hi) ? 1 : 0;
    });
    study.mean_lambda = mean_of(lambdas);
    study.esd_lambda = esd_of(lambdas);
    study.mean_ci_lo = mean_of(lo);
    study.mean_ci_hi = mean_of(hi);
    study.coverage = study.n_m1 > 0 ? static_cast<double>(covered) / study.n_m1 : 0.0;
    return study;
}

PenaltyContrast run_penalty_contrast(int grid_side, double dphi, int n_rep, std::uint64_t seed,
                                     int threads) {
    const int t_total = 100; // two 50-point segments
    const DetectSetup setup = make_setup(grid_side, t_total);
    const ModelOrder m1 = make_order(Family::SepExpAr, MeanKind::Zero);

    PenaltyContrast out;
    std::mutex mu;
    parallel_for(static_cast<std::size_t>(n_rep), threads, [&](std::size_t r) {
        PiecewiseSpec spec{setup.domain, {}, mix_seed(seed, 0x7AB3u, r)};
        if (dphi != 0.0) {
            spec.segments = {{50, m1, ar_theta(-0.5, 0.6, 1.0)},
                             {50, m1, ar_theta(-0.5 + dphi, 0.6, 1.0)}};
        } else {
            spec.segments = {{t_total, m1, ar_theta(-0.5, 0.6, 1.0)}};
        }
        const PiecewiseData pd = gen_piecewise(spec);
        // Same fits, two criteria: share one detection per objective; the
        // exact search guarantees the optimum of each.
        const Segmentation bare = detect_once(setup, pd.data, {m1}, Objective::CompositeOnly,
                                              true, mix_seed(seed, 0xF19u, r));
        const Segmentation penalized =
            detect_once(setup, pd.data, {m1}, Objective::Clmdl, true, mix_seed(seed, 0xF19u, r));
        accumulate(out.composite_only, bare, t_total, mu);
        accumulate(out.penalized, penalized, t_total, mu);
    });
    out.n = n_rep;
    return out;
}

MisspecificationStudy run_misspecification_study(int grid_side, double delta, int n_rep,
                                                 std::uint64_t seed, int threads,
                                                 long long dense_budget) {
    const int t_total = 100;
    const DetectSetup setup = make_setup(grid_side, t_total);
    const ModelOrder mis = make_order(Family::SepExpAr, MeanKind::Zero);
    const ModelOrder gen = make_order(Family::CressieHuang, MeanKind::Zero);
    Eigen::VectorXd theta1(5), theta2(5);
    theta1 << 1.0, 1.0, 3.0, 0.2, 1.0;
    theta2 << 1.0 + delta, 1.0 + delta, 3.0, 0.2, 1.0;

    MisspecificationStudy out;
    std::mutex mu;
    parallel_for(static_cast<std::size_t>(n_rep), threads, [&](std::size_t r) {
        PiecewiseSpec spec{setup.domain, {}, mix_seed(seed, 0x7AB4u, r)};
        if (delta != 0.0) {
            spec.segments = {{50, gen, theta1}, {50, gen, theta2}};
        } else {
            spec.segments = {{t_total, gen, theta1}};
        }
        const PiecewiseData pd = gen_piecewise(spec, dense_budget);
        const Segmentation seg_mis = detect_once(setup, pd.data, {mis}, Objective::Clmdl, false,
                                                 mix_seed(seed, 0xF1Au, r));
        const Segmentation seg_gen = detect_once(setup, pd.data, {gen}, Objective::Clmdl, false,
                                                 mix_seed(seed, 0xF1Bu, r));
        accumulate(out.misspecified, seg_mis, t_total, mu);
        accumulate(out.generating, seg_gen, t_total, mu);
    });
    out.n = n_rep;
    out.mis_mean_lambda = mean_of(out.misspecified.lambda_hats);
    out.mis_esd_lambda = esd_of(out.misspecified.lambda_hats);
    out.gen_mean_lambda = mean_of(out.generating.lambda_hats);
    out.gen_esd_lambda = esd_of(out.generating.lambda_hats);
    return out;
}

MultiChangeStudy run_multi_change_study(int grid_side, int n_rep, std::uint64_t seed,
                                        int threads) {
    const int t_total = 200;
    const DetectSetup setup = make_setup(grid_side, t_total);
    const ModelOrder m1 = make_order(Family::SepExpAr, MeanKind::Zero);
    const ModelOrder m2 = make_order(Family::SepExpAr, MeanKind::Constant);
    const ModelOrder gen_ar = make_order(Family::SepExpAr, MeanKind::Constant);
    const ModelOrder gen_matern = make_order(Family::MaternAr, MeanKind::Constant);

    Eigen::VectorXd th1(4), th2(4), th3(5), th4(4);
    th1 << 0.0, -0.2, 0.6, 1.0;  // (mu, phi, rho, sigma2)
    th2 << 0.0, -0.5, 0.6, 1.0;
    th3 << 0.3, -0.5, 0.9, 0.9, 2.0; // (mu, phi, rho, sigma2, nu)
    th4 << 0.3, -0.2, 0.9, 1.0;

    MultiChangeStudy out;
    std::mutex mu;
    std::vector<double> lams[3];
    parallel_for(static_cast<std::size_t>(n_rep), threads, [&](std::size_t r) {
        PiecewiseSpec spec{setup.domain,
                           {{50, gen_ar, th1},
                            {50, gen_ar, th2},
                            {50, gen_matern, th3},
                            {50, gen_ar, th4}},
                           mix_seed(seed, 0x7AB5u, r)};
        const PiecewiseData pd = gen_piecewise(spec);
        const Segmentation seg = detect_once(setup, pd.data, {m1, m2}, Objective::Clmdl, false,
                                             mix_seed(seed, 0xF1Cu, r));
        std::lock_guard<std::mutex> lock(mu);
        out.n += 1;
        out.c_m[std::min(seg.m, 4)] += 1;
        if (seg.m != 3) return;
        bool pattern = true;
        for (int j = 0; j < 3; ++j) {
            lams[j].push_back(static_cast<double>(seg.change_points[static_cast<std::size_t>(j)]) /
                              t_total);
        }
        for (int j = 0; j < 4; ++j) {
            const bool zero_mean =
                seg.segments[static_cast<std::size_t>(j)].order.mean == MeanKind::Zero;
            if (zero_mean) {
                out.select_m1[j] += 1;
            } else {
                out.select_m2[j] += 1;
            }
            const bool want_zero = j < 2;
            if (zero_mean != want_zero) pattern = false;
        }
        out.pattern_matches += pattern ? 1 : 0;
    });
    for (int j = 0; j < 3; ++j) {
        out.mean_lambda[j] = mean_of(lams[j]);
        out.esd_lambda[j] = esd_of(lams[j]);
    }
    return out;
}

WalkModeStudy run_walk_mode_study(int grid_side, int n_rep, std::uint64_t seed, int threads) {
    const DetectSetup setup = make_setup(grid_side, 200);
    const ModelOrder m1 = make_order(Family::SepExpAr, MeanKind::Zero);
    FittedModel left{m1, ar_theta(-0.5, 0.6, 1.0)};
    FittedModel right{m1, ar_theta(-0.3, 0.6, 1.0)};
    const int q_radius = 40;

    std::vector<int> argmaxes(static_cast<std::size_t>(n_rep));
    parallel_for(static_cast<std::size_t>(n_rep), threads, [&](std::size_t r) {
        const RandomWalkSample w = random_walk_path(setup.domain, setup.graph, left, right,
                                                    q_radius, mix_seed(seed, 0x3A1Du, r));
        argmaxes[r] = w.argmax;
    });

    WalkModeStudy out;
    out.n = n_rep;
    std::map<int, int> freq;
    for (int q : argmaxes) freq[q] += 1;
    for (const auto& [q, count] : freq) {
        if (count > out.mode_count ||
            (count == out.mode_count && std::abs(q) < std::abs(out.mode_q))) {
            out.mode_q = q;
            out.mode_count = count;
        }
    }
    out.zero_count = freq.count(0) ? freq[0] : 0;
    return out;
}

namespace {

struct CsvTable {
    std::string header;
    std::vector<std::string> rows;
    std::string note;

    std::string str() const {
        std::string out = header + "\n";
        for (const auto& r : rows) out += r + "\n";
        if (!note.empty()) out += "# " + note + "\n";
        return out;
    }
};

std::string pct(int count, int n) {
    std::ostringstream os;
    os << (n > 0 ? 100.0 * count / n : 0.0);
    return os.str();
}

} // namespace

std::string replicate_table(int table_id, int n_rep, long long replicate_budget,
                            std::uint64_t seed, int threads) {
    if (table_id < 1 || table_id > 6) {
        throw config_error("table id must be in 1..6, got " + std::to_string(table_id));
    }
    long long used = 0;
    auto budget_allows = [&](long long cost) {
        if (used + cost > replicate_budget) return false;
        used += cost;
        return true;
    };

    CsvTable table;
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);

    switch (table_id) {
    case 1: {
        table.header = "S,T,dphi,drho,pct_m0,pct_m1,pct_m2plus,n";
        const double signals[][2] = {{0, 0},     {0.1, 0},   {0.2, 0},
                                     {0.3, 0},   {0, 0.6},   {0, 0.8},
                                     {0, 1.0},   {0.2, 0.2}, {0.3, 0.3}};
        for (int side : {6, 8, 10}) {
            for (int t_total : {100, 200}) {
                for (const auto& sig : signals) {
                    if (!budget_allows(n_rep)) {
                        table.note = "budget exhausted; remaining rows skipped";
                        return table.str();
                    }
                    const ChangeCounts c = run_detection_rates(side, t_total, sig[0], sig[1],
                                                               n_rep, seed, threads);
                    std::ostringstream row;
                    row << side * side << ',' << t_total << ',' << sig[0] << ',' << sig[1] << ','
                        << pct(c.m0, c.n) << ',' << pct(c.m1, c.n) << ',' << pct(c.m2plus, c.n)
                        << ',' << c.n;
                    table.rows.push_back(row.str());
                }
            }
        }
        break;
    }
    case 2: {
        table.header = "S,pct_m1,mean_lambda,esd_lambda,ci_lo,ci_hi,coverage_pct,n";
        for (int side : {8, 10}) {
            if (!budget_allows(n_rep)) {
                table.note = "budget exhausted; remaining rows skipped";
                return table.str();
            }
            const IntervalStudy st =
                run_interval_study(side, 200, 0.2, n_rep, 100, 0.9, seed, threads);
            std::ostringstream row;
            row.setf(std::ios::fixed);
            row.precision(4);
            row << side * side << ',' << pct(st.n_m1, st.n) << ',' << st.mean_lambda << ','
                << st.esd_lambda << ',' << st.mean_ci_lo << ',' << st.mean_ci_hi << ','
                << 100.0 * st.coverage << ',' << st.n;
            table.rows.push_back(row.str());
        }
        break;
    }
    case 3: {
        table.header = "S,dphi,cl_pct_m0,cl_pct_m1,cl_pct_m2plus,clmdl_pct_m0,clmdl_pct_m1,"
                       "clmdl_pct_m2plus,n";
        for (int side : {30, 60}) {
            for (double dphi : {0.0, 0.1, 0.2}) {
                if (!budget_allows(n_rep)) {
                    table.note = "budget exhausted; remaining rows skipped";
                    return table.str();
                }
                const PenaltyContrast pc = run_penalty_contrast(side, dphi, n_rep, seed, threads);
                std::ostringstream row;
                row << side * side << ',' << dphi << ',' << pct(pc.composite_only.m0, pc.n) << ','
                    << pct(pc.composite_only.m1, pc.n) << ',' << pct(pc.composite_only.m2plus, pc.n)
                    << ',' << pct(pc.penalized.m0, pc.n) << ',' << pct(pc.penalized.m1, pc.n) << ','
                    << pct(pc.penalized.m2plus, pc.n) << ',' << pc.n;
                table.rows.push_back(row.str());
            }
        }
        break;
    }
    case 4: {
        table.header = "S,delta,mis_pct_m0,mis_pct_m1,mis_pct_m2plus,mis_mean_lambda,"
                       "mis_esd_lambda,gen_pct_m0,gen_pct_m1,gen_pct_m2plus,gen_mean_lambda,"
                       "gen_esd_lambda,n";
        for (int side : {6, 7, 8}) {
            for (double delta : {0.0, 0.5, 1.0, 1.5, 2.0}) {
                if (!budget_allows(n_rep)) {
                    table.note = "budget exhausted; remaining rows skipped";
                    return table.str();
                }
                const long long budget = static_cast<long long>(side) * side * 100;
                const MisspecificationStudy st =
                    run_misspecification_study(side, delta, n_rep, seed, threads, budget);
                std::ostringstream row;
                row.setf(std::ios::fixed);
                row.precision(4);
                row << side * side << ',' << delta << ',' << pct(st.misspecified.m0, st.n) << ','
                    << pct(st.misspecified.m1, st.n) << ',' << pct(st.misspecified.m2plus, st.n)
                    << ',' << st.mis_mean_lambda << ',' << st.mis_esd_lambda << ','
                    << pct(st.generating.m0, st.n) << ',' << pct(st.generating.m1, st.n) << ','
                    << pct(st.generating.m2plus, st.n) << ',' << st.gen_mean_lambda << ','
                    << st.gen_esd_lambda << ',' << st.n;
                table.rows.push_back(row.str());
            }
        }
        break;
    }
    case 5:
    case 6: {
        if (table_id == 5) {
            table.header = "S,pct_m0,pct_m1,pct_m2,pct_m3,pct_m4plus,mean_l1,esd_l1,mean_l2,"
                           "esd_l2,mean_l3,esd_l3,n";
        } else {
            table.header = "S,seg1_m1,seg1_m2,seg2_m1,seg2_m2,seg3_m1,seg3_m2,seg4_m1,seg4_m2,n";
        }
        for (int side : {6, 8, 10}) {
            if (!budget_allows(n_rep)) {
                table.note = "budget exhausted; remaining rows skipped";
                return table.str();
            }
            const MultiChangeStudy st = run_multi_change_study(side, n_rep, seed, threads);
            std::ostringstream row;
            row.setf(std::ios::fixed);
            row.precision(4);
            if (table_id == 5) {
                row << side * side;
                for (int i = 0; i < 5; ++i) row << ',' << pct(st.c_m[i], st.n);
                for (int j = 0; j < 3; ++j) {
                    row << ',' << st.mean_lambda[j] << ',' << st.esd_lambda[j];
                }
                row << ',' << st.n;
            } else {
                row << side * side;
                for (int j = 0; j < 4; ++j) {
                    const long long total = st.select_m1[j] + st.select_m2[j];
                    row << ',' << (total ? 100.0 * st.select_m1[j] / total : 0.0) << ','
                        << (total ? 100.0 * st.select_m2[j] / total : 0.0);
                }
                row << ',' << st.n;
            }
            table.rows.push_back(row.str());
        }
        break;
    }
    }
    return table.str();
}

} // namespace stcp
