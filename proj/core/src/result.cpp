#include "stcp/result.hpp"

#include <fstream>

#include <json.hpp>

#include "stcp/errors.hpp"

namespace stcp {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

ordered order_to_json(const ModelOrder& order) {
    ordered j;
    j["family"] = static_cast<int>(order.family);
    j["mean"] = static_cast<int>(order.mean);
    j["covariate_codes"] = order.covariate_codes;
    j["kernel"] = order.kernel == SpatialKernel::SquaredDistance ? "squared" : "plain";
    j["label"] = order.label();
    return j;
}

ModelOrder order_from_json(const json& j) {
    ModelOrder order;
    order.family = static_cast<Family>(j.at("family").get<int>());
    order.mean = static_cast<MeanKind>(j.at("mean").get<int>());
    order.covariate_codes = j.at("covariate_codes").get<std::vector<int>>();
    order.kernel = j.at("kernel").get<std::string>() == "squared"
                       ? SpatialKernel::SquaredDistance
                       : SpatialKernel::PlainDistance;
    return order;
}

} // namespace

std::string ResultDocument::to_json() const {
    ordered j;
    j["schema_version"] = kResultSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["m_hat"] = segmentation.m;
    j["change_points"] = segmentation.change_points;
    j["lambdas"] = segmentation.lambdas;
    ordered segs = ordered::array();
    for (const auto& s : segmentation.segments) {
        ordered e;
        e["t1"] = s.t1;
        e["t2"] = s.t2;
        e["model"] = order_to_json(s.order);
        ordered theta = ordered::object();
        const auto names = s.order.param_names();
        for (Eigen::Index i = 0; i < s.theta.size(); ++i) {
            theta[names[static_cast<std::size_t>(i)]] = s.theta[i];
        }
        e["theta"] = theta;
        e["loglik"] = s.loglik;
        e["cost"] = s.cost;
        e["converged"] = s.converged;
        segs.push_back(e);
    }
    j["segments"] = segs;
    j["total_clmdl"] = segmentation.total;
    j["penalty_iterations"] = segmentation.penalty_iterations;
    j["penalty_converged"] = segmentation.penalty_iteration_converged;
    j["c_kn"] = c_kn;
    j["pruning_k"] = pruning_k;
    j["seed"] = seed;
    j["threads"] = threads;
    j["timing_seconds"] = timing_seconds;
    ordered cfg = ordered::object();
    for (const auto& [k, v] : config.entries()) cfg[k] = v;
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

void ResultDocument::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write result '" + path + "'");
    out << to_json();
    if (!out) throw input_error("failed while writing '" + path + "'");
}

ResultDocument load_result(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open result '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw input_error("result '" + path + "' is not valid JSON: " + e.what());
    }
    if (j.at("schema_version").get<int>() != kResultSchemaVersion) {
        throw input_error("result '" + path + "' has an unsupported schema version");
    }
    ResultDocument doc;
    doc.segmentation.m = j.at("m_hat").get<int>();
    doc.segmentation.change_points = j.at("change_points").get<std::vector<int>>();
    doc.segmentation.lambdas = j.at("lambdas").get<std::vector<double>>();
    for (const auto& e : j.at("segments")) {
        SegmentSummary s;
        s.t1 = e.at("t1").get<int>();
        s.t2 = e.at("t2").get<int>();
        s.order = order_from_json(e.at("model"));
        const auto names = s.order.param_names();
        s.theta.resize(static_cast<Eigen::Index>(names.size()));
        for (std::size_t i = 0; i < names.size(); ++i) {
            s.theta[static_cast<Eigen::Index>(i)] = e.at("theta").at(names[i]).get<double>();
        }
        s.loglik = e.at("loglik").get<double>();
        s.cost = e.at("cost").get<double>();
        s.converged = e.at("converged").get<bool>();
        doc.segmentation.segments.push_back(std::move(s));
    }
    doc.segmentation.total = j.at("total_clmdl").get<double>();
    doc.segmentation.penalty_iterations = j.at("penalty_iterations").get<int>();
    doc.segmentation.penalty_iteration_converged = j.at("penalty_converged").get<bool>();
    doc.c_kn = j.at("c_kn").get<double>();
    doc.pruning_k = j.at("pruning_k").get<double>();
    doc.seed = j.at("seed").get<std::uint64_t>();
    doc.threads = j.at("threads").get<int>();
    doc.timing_seconds = j.at("timing_seconds").get<double>();
    RunConfig cfg;
    for (const auto& [k, v] : j.at("config").items()) {
        cfg.set(k, v.get<std::string>());
    }
    doc.config = cfg;
    return doc;
}

} // namespace stcp
