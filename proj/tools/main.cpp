// Command-line front end: simulate, detect, ci and the table-replication
// harness. Exit codes: 0 success, 1 input error, 2 numeric error, 3 config
// error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stcp/config.hpp"
#include "stcp/errors.hpp"
#include "stcp/ingest.hpp"
#include "stcp/pipeline.hpp"
#include "stcp/replication.hpp"
#include "stcp/result.hpp"
#include "stcp/simulate.hpp"
#include "stcp/threading.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "flat key = value configuration file");
    cmd->add_option("--seed", args.seed, "seed override");
    cmd->add_option("--threads", args.threads, "worker thread count override");
    cmd->add_option("--out", args.out_path, "output path");
}

stcp::RunConfig resolve_config(const CommonArgs& args) {
    stcp::RunConfig cfg = args.config_path.empty()
                              ? stcp::RunConfig()
                              : stcp::RunConfig::from_file(args.config_path);
    if (args.seed) cfg.set("seed", std::to_string(*args.seed));
    if (args.threads) cfg.set("threads", std::to_string(*args.threads));
    return cfg;
}

int resolve_threads(const stcp::RunConfig& cfg) {
    const int t = cfg.get_int("threads");
    if (t < 1) throw stcp::config_error("threads must be >= 1");
    return t;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw stcp::input_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw stcp::input_error("failed while writing '" + path + "'");
}

// Simulation specs are JSON: domain (grid or explicit stations) plus a list
// of segments with family, mean and named parameters.
stcp::PiecewiseSpec parse_sim_spec(const std::string& path, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw stcp::input_error("cannot open simulation spec '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw stcp::input_error("simulation spec is not valid JSON: " + std::string(e.what()));
    }

    std::vector<stcp::Station> stations;
    stcp::Metric metric = stcp::Metric::PlanarEuclidean;
    if (j.contains("grid")) {
        const int rows = j["grid"].value("rows", 0);
        const int cols = j["grid"].value("cols", 0);
        const double spacing = j["grid"].value("spacing", 1.0);
        stcp::SpatialDomain grid = stcp::make_grid_domain(rows, cols, spacing);
        stations = grid.stations();
    } else if (j.contains("stations")) {
        const bool geo = j.value("metric", "planar") == "geodesic";
        metric = geo ? stcp::Metric::GeodesicWgs84 : stcp::Metric::PlanarEuclidean;
        for (const auto& st : j["stations"]) {
            stations.push_back({st.at("id").get<std::string>(),
                                st.at(geo ? "lat" : "x").get<double>(),
                                st.at(geo ? "lon" : "y").get<double>()});
        }
    } else {
        throw stcp::input_error("simulation spec needs a 'grid' or 'stations' entry");
    }

    stcp::PiecewiseSpec spec{stcp::SpatialDomain(std::move(stations), metric), {}, seed};
    if (!j.contains("segments") || j["segments"].empty()) {
        throw stcp::input_error("simulation spec needs a non-empty 'segments' list");
    }
    for (const auto& s : j["segments"]) {
        stcp::SegmentSpec seg;
        seg.length = s.at("length").get<int>();
        const std::string family = s.at("family").get<std::string>();
        stcp::Family fam;
        if (family == "sepexp_ar") {
            fam = stcp::Family::SepExpAr;
        } else if (family == "matern_ar") {
            fam = stcp::Family::MaternAr;
        } else if (family == "cressie_huang") {
            fam = stcp::Family::CressieHuang;
        } else {
            throw stcp::input_error("unknown family '" + family + "' in simulation spec");
        }
        const bool has_mu = s.contains("theta") && s["theta"].contains("mu");
        const std::string kernel = s.value("spatial_kernel", "squared");
        seg.order = stcp::make_order(fam, has_mu ? stcp::MeanKind::Constant : stcp::MeanKind::Zero,
                                     kernel == "plain" ? stcp::SpatialKernel::PlainDistance
                                                       : stcp::SpatialKernel::SquaredDistance);
        const auto names = seg.order.param_names();
        seg.theta.resize(static_cast<Eigen::Index>(names.size()));
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (!s.at("theta").contains(names[i])) {
                throw stcp::input_error("segment theta is missing '" + names[i] + "'");
            }
            seg.theta[static_cast<Eigen::Index>(i)] = s["theta"][names[i]].get<double>();
        }
        spec.segments.push_back(std::move(seg));
    }
    return spec;
}

int cmd_simulate(const CommonArgs& common, const std::string& spec_path,
                 long long dense_budget_flag) {
    const stcp::RunConfig cfg = resolve_config(common);
    const std::uint64_t seed = cfg.get_u64("seed");
    stcp::PiecewiseSpec spec = parse_sim_spec(spec_path, seed);
    const long long budget =
        dense_budget_flag > 0 ? dense_budget_flag : cfg.get_int64("sim.dense_budget");
    const stcp::PiecewiseData pd = stcp::gen_piecewise(spec, budget);

    if (common.out_path.empty()) throw stcp::config_error("simulate requires --out");
    stcp::Panel panel{spec.domain, {}, pd.data};
    panel.time_indices.resize(static_cast<std::size_t>(pd.data.rows()));
    for (std::size_t t = 0; t < panel.time_indices.size(); ++t) {
        panel.time_indices[t] = static_cast<long long>(t);
    }
    stcp::write_csv(panel, common.out_path);

    ordered_json truth;
    truth["change_points"] = pd.change_points;
    truth["seed"] = seed;
    std::vector<double> lambdas;
    for (int tau : pd.change_points) {
        lambdas.push_back(static_cast<double>(tau) / static_cast<double>(pd.data.rows()));
    }
    truth["lambdas"] = lambdas;
    write_text(common.out_path + ".truth.json", truth.dump(2) + "\n");
    std::cerr << "wrote " << pd.data.rows() << " x " << pd.data.cols() << " panel to "
              << common.out_path << "\n";
    return 0;
}

stcp::Panel load_and_preprocess(const stcp::RunConfig& cfg, const std::string& data_path) {
    stcp::Panel panel = stcp::load_csv(data_path);
    if (cfg.get_onoff("preprocess.log1p")) {
        panel.values = stcp::transform_log1(panel.values);
    }
    const std::string month_mode = cfg.get("preprocess.month_effects");
    if (month_mode != "off") {
        const bool per_station = month_mode == "per_station";
        if (!per_station && month_mode != "global") {
            throw stcp::config_error("preprocess.month_effects must be off, per_station or global");
        }
        panel.values = stcp::remove_month_effects(panel.values, panel.time_indices,
                                                  cfg.get_int("preprocess.period"), per_station)
                           .residuals;
    }
    return panel;
}

int cmd_detect(const CommonArgs& common, const std::string& data_path) {
    const auto start = std::chrono::steady_clock::now();
    const stcp::RunConfig cfg = resolve_config(common);
    const std::uint64_t seed = cfg.get_u64("seed");
    const int threads = resolve_threads(cfg);

    const stcp::Panel panel = load_and_preprocess(cfg, data_path);
    const stcp::DetectionContext ctx =
        stcp::make_context(panel.values, panel.domain, cfg, seed, threads);
    const stcp::DetectionOutcome outcome = stcp::run_search(ctx, cfg);
    if (outcome.fell_back_to_pelt) {
        std::cerr << "exact search refused by budget; fell back to pelt\n";
    }

    stcp::ResultDocument doc;
    doc.segmentation = outcome.segmentation;
    doc.c_kn = ctx.c_kn;
    doc.pruning_k = ctx.pruning_k;
    doc.seed = seed;
    doc.threads = threads;
    doc.timing_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    doc.config = cfg;

    const std::string text = doc.to_json();
    if (!common.out_path.empty()) {
        write_text(common.out_path, text);
    } else {
        std::cout << text;
    }
    std::cerr << "m_hat = " << outcome.segmentation.m << ", change points at";
    for (int tau : outcome.segmentation.change_points) std::cerr << ' ' << tau;
    std::cerr << (outcome.segmentation.m ? "" : " (none)") << "\n";
    return 0;
}

int cmd_ci(const CommonArgs& common, const std::string& data_path,
           const std::string& result_path) {
    const stcp::RunConfig stored = stcp::load_result(result_path).config;
    // CLI overrides sit on top of the embedded run configuration.
    stcp::RunConfig cfg = stored;
    if (!common.config_path.empty()) cfg = stcp::RunConfig::from_file(common.config_path);
    if (common.seed) cfg.set("seed", std::to_string(*common.seed));
    if (common.threads) cfg.set("threads", std::to_string(*common.threads));

    const stcp::ResultDocument doc = stcp::load_result(result_path);
    const stcp::Panel panel = load_and_preprocess(cfg, data_path);
    const int threads = resolve_threads(cfg);
    const std::uint64_t seed = cfg.get_u64("seed");

    if (cfg.get_int("pairs.k") != 1) {
        std::cerr << "detection used k = " << cfg.get_int("pairs.k")
                  << "; segments are refitted at k = 1 for the interval walk\n";
    }
    const stcp::CiReport report =
        stcp::run_ci(panel.values, panel.domain, cfg, doc.segmentation, seed, threads);
    if (report.spatial_dominates) {
        std::cerr << "warning: S >= T, the walk approximation of the estimation error "
                     "degrades in this regime\n";
    }

    ordered_json j;
    j["schema_version"] = stcp::kResultSchemaVersion;
    j["level"] = cfg.get_double("ci.level");
    j["replicates"] = cfg.get_int("ci.replicates");
    j["refit_at_lag1"] = report.refit_at_lag1;
    j["seed"] = seed;
    ordered_json intervals = ordered_json::array();
    for (const auto& ci : report.intervals) {
        ordered_json e;
        e["tau_hat"] = ci.tau_hat;
        e["tau_lo"] = ci.tau_lo;
        e["tau_hi"] = ci.tau_hi;
        e["q_lo"] = ci.q_lo;
        e["q_hi"] = ci.q_hi;
        e["lambda_lo"] = ci.lambda_lo;
        e["lambda_hi"] = ci.lambda_hi;
        e["q_radius"] = ci.q_radius;
        e["degenerate"] = ci.degenerate;
        intervals.push_back(e);
    }
    j["intervals"] = intervals;
    const std::string text = j.dump(2) + "\n";
    if (!common.out_path.empty()) {
        write_text(common.out_path, text);
    } else {
        std::cout << text;
    }
    return 0;
}

int cmd_replicate(const CommonArgs& common, int table_id, int n_rep, long long budget) {
    const stcp::RunConfig cfg = resolve_config(common);
    const std::string csv = stcp::replicate_table(table_id, n_rep, budget, cfg.get_u64("seed"),
                                                  resolve_threads(cfg));
    if (!common.out_path.empty()) {
        write_text(common.out_path, csv);
    } else {
        std::cout << csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatio-temporal change-point detection by edge-corrected composite "
                 "likelihood and penalized dynamic programming"};
    app.require_subcommand(1);

    CommonArgs sim_args, det_args, ci_args, rep_args;
    std::string sim_spec, det_data, ci_data, ci_result;
    long long sim_budget = 0;
    int rep_table = 1, rep_n = 100;
    long long rep_budget = 1000000;

    CLI::App* sim = app.add_subcommand("simulate", "draw a piecewise-stationary panel");
    add_common(sim, sim_args);
    sim->add_option("--spec", sim_spec, "JSON simulation spec")->required();
    sim->add_option("--dense-budget", sim_budget, "dense-factorization point budget override");

    CLI::App* det = app.add_subcommand("detect", "estimate change-points in a panel");
    add_common(det, det_args);
    det->add_option("--data", det_data, "panel CSV")->required();

    CLI::App* ci = app.add_subcommand("ci", "confidence intervals for detected change-points");
    add_common(ci, ci_args);
    ci->add_option("--data", ci_data, "panel CSV")->required();
    ci->add_option("--result", ci_result, "detection result JSON")->required();

    CLI::App* rep = app.add_subcommand("replicate", "re-run a published table design");
    add_common(rep, rep_args);
    rep->add_option("--table", rep_table, "table id in 1..6")->required();
    rep->add_option("--reps", rep_n, "replicates per cell");
    rep->add_option("--budget", rep_budget, "total replicate budget");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_args, sim_spec, sim_budget);
        if (det->parsed()) return cmd_detect(det_args, det_data);
        if (ci->parsed()) return cmd_ci(ci_args, ci_data, ci_result);
        if (rep->parsed()) return cmd_replicate(rep_args, rep_table, rep_n, rep_budget);
    } catch (const stcp::error& e) {
        std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
