#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stcp {

enum class Metric {
    PlanarEuclidean,
    GeodesicWgs84, // coordinates are (lat, lon) degrees, distances in km
};

struct Station {
    std::string id;
    double c1 = 0.0; // x, or latitude in degrees
    double c2 = 0.0; // y, or longitude in degrees
};

// An irregular set of observation sites with a distance metric. Immutable
// after construction; construction validates ids, coordinate finiteness and
// rejects coincident stations.
class SpatialDomain {
public:
    SpatialDomain(std::vector<Station> stations, Metric metric);

    int size() const { return static_cast<int>(stations_.size()); }
    const Station& station(int i) const { return stations_[static_cast<std::size_t>(i)]; }
    const std::vector<Station>& stations() const { return stations_; }
    Metric metric() const { return metric_; }

    double distance(int i, int j) const;

private:
    std::vector<Station> stations_;
    Metric metric_;
};

// Regular s_rows x s_cols planar grid with the given spacing; station ids are
// "r<i>c<j>". The standard simulation domain.
SpatialDomain make_grid_domain(int rows, int cols, double spacing = 1.0);

// Symmetric distance-threshold neighborhoods N(s) = { s' != s : dist(s, s') <= cutoff }.
struct NeighborGraph {
    std::vector<std::vector<int>> neighbors; // sorted, no self, symmetric
    std::vector<std::vector<double>> neighbor_dist; // parallel to neighbors
    double cutoff = 0.0;
    int max_degree = 0; // B_N

    int size() const { return static_cast<int>(neighbors.size()); }
    int degree(int s) const { return static_cast<int>(neighbors[static_cast<std::size_t>(s)].size()); }
    long long degree_sum() const;
};

NeighborGraph build_neighbors(const SpatialDomain& domain, double cutoff);

// Pair-set configuration: maximum time lag k plus the spatial neighborhoods.
struct PairConfig {
    int lag_k = 1;
    NeighborGraph graph;
};

// One element of the pair collection: the factor f(x[t][s1], x[t+i][s2]).
// Time indices are 0-based rows of the segment.
struct PairKey {
    int t;
    int i;
    int s1;
    int s2;
};

// Streams the pair collection for a segment of t_len rows, in deterministic
// (t, i, s1, s2) order: all (t, i, s1, s2) with 0 <= t, t+i <= t_len-1,
// 0 <= i <= k, s2 in {s1} union N(s1), and s1 != s2 when i == 0.
// Contemporaneous pairs appear in both orderings. Cursors are independent,
// so concurrent enumeration is safe.
class PairCursor {
public:
    PairCursor(int t_len, const PairConfig& cfg);
    std::optional<PairKey> next();

private:
    bool advance_station();
    const PairConfig* cfg_;
    int t_len_;
    int t_ = 0;
    int i_ = 0;
    int s1_ = 0;
    int pos_ = 0; // position within the s2 candidate list of (i_, s1_)
    bool done_ = false;
};

void for_each_pair(int t_len, const PairConfig& cfg, const std::function<void(const PairKey&)>& fn);

// Number of tuples in the pair collection for a segment of t_len rows.
long long pair_count(int t_len, const PairConfig& cfg);

// Compensating-marginal sites: entry (i, s) carries multiplicity
// (k - i + 1) * (1 + |N(s)|) for time offsets i = 1..k. The same multiset
// describes both segment edges.
struct EdgeEntry {
    int time_offset; // i in 1..k
    int station;
    long long multiplicity;
};

struct EdgeMultiset {
    std::vector<EdgeEntry> entries;
    long long total_multiplicity() const;
};

EdgeMultiset edge_multiset(const PairConfig& cfg);

// Per-observation factor-count normalizer over a series of length t_total:
// [2 Card(pairs) + 2 Card(edge marginals)] / (S * t_total), cardinalities
// counted with multiplicity. Algebraically this reduces to the mean over
// stations of 2k(1+|N(s)|) + 2|N(s)| and is invariant to t_total >= k+1.
double normalizing_constant(int t_total, const PairConfig& cfg);

// Closed-form number of likelihood factors containing any single observation
// at station s: 2k(1+|N(s)|) + 2|N(s)|.
long long factor_count(const PairConfig& cfg, int station);

} // namespace stcp
