#include "stcp/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "stcp/errors.hpp"

namespace stcp {

namespace {

const std::map<std::string, std::string>& default_entries() {
    static const std::map<std::string, std::string> defaults = {
        {"pairs.k", "1"},
        {"pairs.cutoff", "2.0"},
        {"models", "sepexp_ar"},
        {"model.spatial_kernel", "squared"},
        {"model.c_series_length", "full"},
        {"search.algorithm", "pelt"},
        {"search.epsilon_lambda", "0.1"},
        {"search.pruning", "on"},
        {"search.k_override", ""},
        {"search.max_penalty_iterations", "10"},
        {"search.exact_budget", "50000"},
        {"optimizer.tolerance", "1e-8"},
        {"optimizer.max_iterations", "2000"},
        {"optimizer.restarts", "3"},
        {"optimizer.jitter", "0.3"},
        {"ci.level", "0.9"},
        {"ci.replicates", "100"},
        {"ci.q_radius", "0"}, // 0 = automatic
        {"sim.dense_budget", "5000"},
        {"preprocess.log1p", "off"},
        {"preprocess.month_effects", "off"}, // off | per_station | global
        {"preprocess.period", "12"},
        {"seed", "1"},
        {"threads", "1"},
    };
    return defaults;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

RunConfig::RunConfig() : values_(default_entries()) {}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

RunConfig RunConfig::from_string(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value'");
        }
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!default_entries().count(key)) {
        throw config_error("unknown config key '" + key + "'");
    }
    values_[key] = value;
}

std::string RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("unknown config key '" + key + "'");
    return it->second;
}

int RunConfig::get_int(const std::string& key) const {
    return static_cast<int>(get_int64(key));
}

long long RunConfig::get_int64(const std::string& key) const {
    const std::string v = get(key);
    errno = 0;
    char* end = nullptr;
    const long long out = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
        throw config_error("config key '" + key + "': cannot parse integer '" + v + "'");
    }
    return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string v = get(key);
    errno = 0;
    char* end = nullptr;
    const unsigned long long out = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
        throw config_error("config key '" + key + "': cannot parse unsigned integer '" + v + "'");
    }
    return out;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string v = get(key);
    errno = 0;
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE) {
        throw config_error("config key '" + key + "': cannot parse number '" + v + "'");
    }
    return out;
}

bool RunConfig::get_onoff(const std::string& key) const {
    const std::string v = get(key);
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw config_error("config key '" + key + "' must be on or off, got '" + v + "'");
}

std::string RunConfig::to_string() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        out += k + " = " + v + "\n";
    }
    return out;
}

std::vector<ModelOrder> RunConfig::models() const {
    const SpatialKernel kernel = spatial_kernel();
    std::vector<ModelOrder> orders;
    std::istringstream in(get("models"));
    std::string token;
    while (std::getline(in, token, ',')) {
        token = trim(token);
        if (token.empty()) continue;
        MeanKind mean = MeanKind::Zero;
        std::string fam = token;
        const auto plus = token.find('+');
        if (plus != std::string::npos) {
            fam = token.substr(0, plus);
            const std::string tail = token.substr(plus + 1);
            if (tail == "mu") {
                mean = MeanKind::Constant;
            } else {
                throw config_error("model token '" + token + "': unknown mean suffix '" + tail +
                                   "'");
            }
        }
        Family family;
        if (fam == "sepexp_ar") {
            family = Family::SepExpAr;
        } else if (fam == "matern_ar") {
            family = Family::MaternAr;
        } else if (fam == "cressie_huang") {
            family = Family::CressieHuang;
        } else {
            throw config_error("unknown covariance family '" + fam + "'");
        }
        orders.push_back(make_order(family, mean, kernel));
    }
    if (orders.empty()) throw config_error("config key 'models' selects no model");
    return orders;
}

SpatialKernel RunConfig::spatial_kernel() const {
    const std::string v = get("model.spatial_kernel");
    if (v == "squared") return SpatialKernel::SquaredDistance;
    if (v == "plain") return SpatialKernel::PlainDistance;
    throw config_error("model.spatial_kernel must be 'squared' or 'plain'");
}

OptimizerConfig RunConfig::optimizer() const {
    OptimizerConfig opt;
    opt.tolerance = get_double("optimizer.tolerance");
    opt.max_iterations = get_int("optimizer.max_iterations");
    opt.n_restarts = get_int("optimizer.restarts");
    opt.jitter = get_double("optimizer.jitter");
    if (opt.max_iterations < 1 || opt.n_restarts < 1 || !(opt.tolerance > 0.0)) {
        throw config_error("optimizer settings must be positive");
    }
    return opt;
}

SearchConfig RunConfig::search(int n_threads) const {
    SearchConfig cfg;
    cfg.epsilon_lambda = get_double("search.epsilon_lambda");
    cfg.pruning = get_onoff("search.pruning");
    const std::string ko = get("search.k_override");
    if (!ko.empty()) {
        errno = 0;
        char* end = nullptr;
        const double k = std::strtod(ko.c_str(), &end);
        if (end == ko.c_str() || *end != '\0' || errno == ERANGE) {
            throw config_error("search.k_override: cannot parse '" + ko + "'");
        }
        cfg.k_override = k;
    }
    cfg.max_penalty_iterations = get_int("search.max_penalty_iterations");
    cfg.exact_budget = get_int64("search.exact_budget");
    cfg.n_threads = n_threads;
    return cfg;
}

bool RunConfig::c_uses_full_series() const {
    const std::string v = get("model.c_series_length");
    if (v == "full") return true;
    if (v == "segment") return false;
    throw config_error("model.c_series_length must be 'full' or 'segment'");
}

} // namespace stcp
