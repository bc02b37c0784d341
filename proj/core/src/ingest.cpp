#include "stcp/ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stcp/errors.hpp"

namespace stcp {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& token, int line_no, const char* what) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
        throw input_error("line " + std::to_string(line_no) + ": cannot parse " + what + " '" +
                          token + "'");
    }
    return v;
}

long long parse_int(const std::string& token, int line_no, const char* what) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
        throw input_error("line " + std::to_string(line_no) + ": cannot parse " + what + " '" +
                          token + "'");
    }
    return v;
}

} // namespace

Panel load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw input_error("'" + path + "' is empty");
    const auto header = split_fields(line);
    Metric metric;
    if (header == std::vector<std::string>{"station_id", "lat", "lon", "time_index", "value"}) {
        metric = Metric::GeodesicWgs84;
    } else if (header == std::vector<std::string>{"station_id", "x", "y", "time_index", "value"}) {
        metric = Metric::PlanarEuclidean;
    } else {
        throw input_error("'" + path +
                          "': header must be station_id,lat,lon,time_index,value or "
                          "station_id,x,y,time_index,value");
    }

    struct Record {
        double c1, c2, value;
    };
    std::map<std::string, std::map<long long, Record>> per_station;
    std::set<long long> all_times;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_fields(line);
        if (fields.size() != 5) {
            throw input_error("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                              std::to_string(fields.size()));
        }
        const std::string& id = fields[0];
        if (id.empty()) throw input_error("line " + std::to_string(line_no) + ": empty station_id");
        const double c1 = parse_double(fields[1], line_no, "coordinate");
        const double c2 = parse_double(fields[2], line_no, "coordinate");
        const long long t = parse_int(fields[3], line_no, "time_index");
        const double v = parse_double(fields[4], line_no, "value");
        auto& series = per_station[id];
        if (!series.emplace(t, Record{c1, c2, v}).second) {
            throw input_error("line " + std::to_string(line_no) + ": duplicate (station '" + id +
                              "', time " + std::to_string(t) + ")");
        }
        all_times.insert(t);
    }
    if (per_station.empty()) throw input_error("'" + path + "' has no data rows");

    // Every station must cover the full time grid.
    std::string gaps;
    int n_gaps = 0;
    for (const auto& [id, series] : per_station) {
        for (long long t : all_times) {
            if (!series.count(t)) {
                if (n_gaps < 5) {
                    gaps += (n_gaps ? ", " : "") + std::string("('") + id + "', " +
                            std::to_string(t) + ")";
                }
                ++n_gaps;
            }
        }
        for (const auto& [t, rec] : series) {
            const auto& first = series.begin()->second;
            if (rec.c1 != first.c1 || rec.c2 != first.c2) {
                throw input_error("station '" + id + "' changes coordinates at time " +
                                  std::to_string(t));
            }
        }
    }
    if (n_gaps > 0) {
        throw input_error("panel is incomplete: " + std::to_string(n_gaps) +
                          " missing (station, time) cells, first " + gaps);
    }

    std::vector<Station> stations;
    stations.reserve(per_station.size());
    for (const auto& [id, series] : per_station) {
        const auto& rec = series.begin()->second;
        stations.push_back({id, rec.c1, rec.c2});
    }
    Panel panel{SpatialDomain(std::move(stations), metric),
                std::vector<long long>(all_times.begin(), all_times.end()),
                Eigen::MatrixXd(static_cast<Eigen::Index>(all_times.size()),
                                static_cast<Eigen::Index>(per_station.size()))};
    int s = 0;
    for (const auto& [id, series] : per_station) {
        int t = 0;
        for (long long ti : panel.time_indices) {
            panel.values(t++, s) = series.at(ti).value;
        }
        ++s;
    }
    return panel;
}

void write_csv(const Panel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write '" + path + "'");
    const bool geo = panel.domain.metric() == Metric::GeodesicWgs84;
    out << (geo ? "station_id,lat,lon,time_index,value\n" : "station_id,x,y,time_index,value\n");
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (int s = 0; s < panel.domain.size(); ++s) {
        const Station& st = panel.domain.station(s);
        for (std::size_t t = 0; t < panel.time_indices.size(); ++t) {
            out << st.id << ',' << fmt(st.c1) << ',' << fmt(st.c2) << ','
                << panel.time_indices[t] << ',' << fmt(panel.values(static_cast<Eigen::Index>(t), s))
                << '\n';
        }
    }
    if (!out) throw input_error("failed while writing '" + path + "'");
}

Eigen::MatrixXd transform_log1(const Eigen::MatrixXd& values) {
    if ((values.array() < 0.0).any()) {
        throw input_error("log(1 + y) transform requires non-negative values");
    }
    return values.array().log1p();
}

Preprocessed remove_month_effects(const Eigen::MatrixXd& values,
                                  const std::vector<long long>& time_indices, int period,
                                  bool per_station) {
    if (period < 1) throw config_error("seasonal period must be >= 1");
    const auto T = values.rows();
    const auto S = values.cols();
    if (static_cast<Eigen::Index>(time_indices.size()) != T) {
        throw input_error("time index list does not match the panel");
    }
    if (T < period) throw input_error("need at least one full period of data");

    auto month_of = [&](Eigen::Index t) {
        const long long m = time_indices[static_cast<std::size_t>(t)] % period;
        return static_cast<int>(m < 0 ? m + period : m);
    };

    Preprocessed out;
    out.period = period;
    out.per_station = per_station;
    out.residuals = values;
    if (per_station) {
        out.month_effects = Eigen::MatrixXd::Zero(period, S);
        Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(period, S);
        for (Eigen::Index t = 0; t < T; ++t) {
            const int m = month_of(t);
            out.month_effects.row(m) += values.row(t);
            counts.row(m).array() += 1.0;
        }
        out.month_effects.array() /= counts.array().max(1.0);
        for (Eigen::Index t = 0; t < T; ++t) {
            out.residuals.row(t) -= out.month_effects.row(month_of(t));
        }
    } else {
        out.month_effects = Eigen::MatrixXd::Zero(period, 1);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(period);
        for (Eigen::Index t = 0; t < T; ++t) {
            const int m = month_of(t);
            out.month_effects(m, 0) += values.row(t).sum();
            counts[m] += static_cast<double>(S);
        }
        out.month_effects.array() /= counts.array().max(1.0);
        for (Eigen::Index t = 0; t < T; ++t) {
            out.residuals.row(t).array() -= out.month_effects(month_of(t), 0);
        }
    }
    return out;
}

} // namespace stcp
