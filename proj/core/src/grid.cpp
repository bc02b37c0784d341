#include "stcp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "stcp/errors.hpp"
#include "stcp/geodesic.hpp"

namespace stcp {

SpatialDomain::SpatialDomain(std::vector<Station> stations, Metric metric)
    : stations_(std::move(stations)), metric_(metric) {
    std::unordered_set<std::string> ids;
    for (const auto& st : stations_) {
        if (!std::isfinite(st.c1) || !std::isfinite(st.c2)) {
            throw input_error("station '" + st.id + "' has a non-finite coordinate");
        }
        if (metric_ == Metric::GeodesicWgs84 && std::abs(st.c1) > 90.0) {
            throw domain_violation("station '" + st.id + "' latitude outside [-90, 90]");
        }
        if (!ids.insert(st.id).second) {
            throw input_error("duplicate station id '" + st.id + "'");
        }
    }
    // Coincident stations break the minimum-separation requirement of the lattice.
    const int n = size();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (stations_[static_cast<std::size_t>(i)].c1 == stations_[static_cast<std::size_t>(j)].c1 &&
                stations_[static_cast<std::size_t>(i)].c2 == stations_[static_cast<std::size_t>(j)].c2) {
                throw domain_violation("stations '" + stations_[static_cast<std::size_t>(i)].id +
                                       "' and '" + stations_[static_cast<std::size_t>(j)].id +
                                       "' share coordinates");
            }
        }
    }
}

double SpatialDomain::distance(int i, int j) const {
    const Station& a = stations_[static_cast<std::size_t>(i)];
    const Station& b = stations_[static_cast<std::size_t>(j)];
    if (metric_ == Metric::PlanarEuclidean) {
        const double dx = a.c1 - b.c1;
        const double dy = a.c2 - b.c2;
        return std::sqrt(dx * dx + dy * dy);
    }
    return geodesic_km(a.c1, a.c2, b.c1, b.c2);
}

SpatialDomain make_grid_domain(int rows, int cols, double spacing) {
    if (rows < 1 || cols < 1 || !(spacing > 0.0)) {
        throw input_error("grid domain requires rows, cols >= 1 and spacing > 0");
    }
    std::vector<Station> stations;
    stations.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            stations.push_back({"r" + std::to_string(r) + "c" + std::to_string(c),
                                spacing * static_cast<double>(r), spacing * static_cast<double>(c)});
        }
    }
    return SpatialDomain(std::move(stations), Metric::PlanarEuclidean);
}

long long NeighborGraph::degree_sum() const {
    long long total = 0;
    for (const auto& nb : neighbors) total += static_cast<long long>(nb.size());
    return total;
}

NeighborGraph build_neighbors(const SpatialDomain& domain, double cutoff) {
    if (!(cutoff > 0.0)) throw input_error("neighbor cutoff must be > 0");
    const int n = domain.size();
    NeighborGraph g;
    g.cutoff = cutoff;
    g.neighbors.assign(static_cast<std::size_t>(n), {});
    g.neighbor_dist.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = domain.distance(i, j);
            if (d <= 0.0) {
                throw domain_violation("stations '" + domain.station(i).id + "' and '" +
                                       domain.station(j).id + "' are at distance 0");
            }
            if (d <= cutoff) {
                g.neighbors[static_cast<std::size_t>(i)].push_back(j);
                g.neighbor_dist[static_cast<std::size_t>(i)].push_back(d);
                g.neighbors[static_cast<std::size_t>(j)].push_back(i);
                g.neighbor_dist[static_cast<std::size_t>(j)].push_back(d);
            }
        }
    }
    // j > i insertion order already leaves each list sorted by index.
    for (int i = 0; i < n; ++i) {
        g.max_degree = std::max(g.max_degree, g.degree(i));
    }
    return g;
}

PairCursor::PairCursor(int t_len, const PairConfig& cfg) : cfg_(&cfg), t_len_(t_len) {
    if (t_len < 1) throw input_error("pair enumeration requires a segment of length >= 1");
}

// Moves (i_, s1_, pos_) to the first valid candidate at or after the current
// position. Returns false when the whole enumeration is exhausted.
bool PairCursor::advance_station() {
    const int S = cfg_->graph.size();
    for (;;) {
        if (t_ >= t_len_) {
            done_ = true;
            return false;
        }
        if (i_ > cfg_->lag_k || t_ + i_ >= t_len_) {
            t_ += 1;
            i_ = 0;
            s1_ = 0;
            pos_ = 0;
            continue;
        }
        if (s1_ >= S) {
            i_ += 1;
            s1_ = 0;
            pos_ = 0;
            continue;
        }
        const auto& nb = cfg_->graph.neighbors[static_cast<std::size_t>(s1_)];
        // Candidate list: N(s1) when i == 0, {s1} merged into N(s1) in index
        // order when i >= 1.
        const int n_cand = static_cast<int>(nb.size()) + (i_ >= 1 ? 1 : 0);
        if (pos_ >= n_cand) {
            s1_ += 1;
            pos_ = 0;
            continue;
        }
        return true;
    }
}

std::optional<PairKey> PairCursor::next() {
    if (done_) return std::nullopt;
    if (!advance_station()) return std::nullopt;
    const auto& nb = cfg_->graph.neighbors[static_cast<std::size_t>(s1_)];
    int s2;
    if (i_ == 0) {
        s2 = nb[static_cast<std::size_t>(pos_)];
    } else {
        // Merge s1 into the sorted neighbor list at its index position.
        const auto it = std::lower_bound(nb.begin(), nb.end(), s1_);
        const int self_pos = static_cast<int>(it - nb.begin());
        if (pos_ < self_pos) {
            s2 = nb[static_cast<std::size_t>(pos_)];
        } else if (pos_ == self_pos) {
            s2 = s1_;
        } else {
            s2 = nb[static_cast<std::size_t>(pos_ - 1)];
        }
    }
    PairKey key{t_, i_, s1_, s2};
    pos_ += 1;
    return key;
}

void for_each_pair(int t_len, const PairConfig& cfg, const std::function<void(const PairKey&)>& fn) {
    PairCursor cursor(t_len, cfg);
    while (auto key = cursor.next()) fn(*key);
}

long long pair_count(int t_len, const PairConfig& cfg) {
    if (t_len < 1) throw input_error("pair enumeration requires a segment of length >= 1");
    const long long S = cfg.graph.size();
    const long long deg = cfg.graph.degree_sum();
    long long total = static_cast<long long>(t_len) * deg; // i == 0, both orderings
    for (int i = 1; i <= cfg.lag_k; ++i) {
        const long long nt = std::max(0, t_len - i);
        total += nt * (S + deg);
    }
    return total;
}

long long EdgeMultiset::total_multiplicity() const {
    long long total = 0;
    for (const auto& e : entries) total += e.multiplicity;
    return total;
}

EdgeMultiset edge_multiset(const PairConfig& cfg) {
    if (cfg.lag_k < 1) throw input_error("edge multiset requires lag k >= 1");
    EdgeMultiset em;
    const int S = cfg.graph.size();
    em.entries.reserve(static_cast<std::size_t>(cfg.lag_k) * static_cast<std::size_t>(S));
    for (int i = 1; i <= cfg.lag_k; ++i) {
        for (int s = 0; s < S; ++s) {
            const long long mult =
                static_cast<long long>(cfg.lag_k - i + 1) * (1 + cfg.graph.degree(s));
            em.entries.push_back({i, s, mult});
        }
    }
    return em;
}

double normalizing_constant(int t_total, const PairConfig& cfg) {
    if (cfg.lag_k < 1) throw input_error("normalizing constant requires lag k >= 1");
    if (t_total < cfg.lag_k + 1) {
        throw input_error("normalizing constant requires series length >= k + 1");
    }
    const long long d_card = pair_count(t_total, cfg);
    const long long e_card = edge_multiset(cfg).total_multiplicity();
    const long long S = cfg.graph.size();
    return static_cast<double>(2 * d_card + 2 * e_card) /
           (static_cast<double>(S) * static_cast<double>(t_total));
}

long long factor_count(const PairConfig& cfg, int station) {
    const long long nb = cfg.graph.degree(station);
    return 2LL * cfg.lag_k * (1 + nb) + 2LL * nb;
}

} // namespace stcp
