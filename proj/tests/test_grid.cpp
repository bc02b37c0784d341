#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "stcp/errors.hpp"
#include "stcp/geodesic.hpp"
#include "stcp/grid.hpp"
#include "test_support.hpp"

using namespace stcp;

TEST_CASE("rook neighborhoods on the unit 3x3 grid") {
    SpatialDomain domain = make_grid_domain(3, 3);
    NeighborGraph g = build_neighbors(domain, 1.0);
    CHECK(g.degree_sum() == 24);
    CHECK(g.max_degree == 4);
    for (int s = 0; s < g.size(); ++s) {
        for (std::size_t j = 0; j < g.neighbors[s].size(); ++j) {
            const int nb = g.neighbors[s][j];
            CHECK(nb != s);
            CHECK(g.neighbor_dist[s][j] > 0.0);
            CHECK(g.neighbor_dist[s][j] <= 1.0);
            const auto& back = g.neighbors[nb];
            CHECK(std::find(back.begin(), back.end(), s) != back.end());
        }
    }
}

TEST_CASE("degenerate neighbor graphs") {
    SpatialDomain one(std::vector<Station>{{"a", 0, 0}}, Metric::PlanarEuclidean);
    NeighborGraph g1 = build_neighbors(one, 10.0);
    CHECK(g1.max_degree == 0);
    CHECK(g1.degree_sum() == 0);

    // Two stations ~5.56 km apart on the equator; a 4 km cutoff excludes them.
    SpatialDomain two(std::vector<Station>{{"p", 0.0, 0.0}, {"q", 0.0, 0.05}},
                      Metric::GeodesicWgs84);
    NeighborGraph g2 = build_neighbors(two, 4.0);
    CHECK(g2.degree_sum() == 0);
}

TEST_CASE("graph construction errors") {
    CHECK_THROWS_AS(SpatialDomain({{"a", 0, 0}, {"b", 0, 0}}, Metric::PlanarEuclidean),
                    domain_violation);
    CHECK_THROWS_AS(
        SpatialDomain({{"a", std::nan(""), 0}, {"b", 1, 0}}, Metric::PlanarEuclidean),
        input_error);
    CHECK_THROWS_AS(SpatialDomain({{"a", 0, 0}, {"a", 1, 0}}, Metric::PlanarEuclidean),
                    input_error);
    SpatialDomain domain = make_grid_domain(2, 2);
    CHECK_THROWS_AS(build_neighbors(domain, -1.0), input_error);
}

TEST_CASE("pair enumeration cardinalities") {
    SpatialDomain domain = make_grid_domain(3, 3);
    NeighborGraph rook = build_neighbors(domain, 1.0);
    PairConfig cfg{1, rook};

    CHECK(pair_count(5, cfg) == 252);
    int n0 = 0, n1 = 0;
    for_each_pair(5, cfg, [&](const PairKey& k) { (k.i == 0 ? n0 : n1) += 1; });
    CHECK(n0 == 120);
    CHECK(n1 == 132);

    // One time point: contemporaneous pairs only.
    CHECK(pair_count(1, cfg) == rook.degree_sum());

    // Empty neighborhoods: lag-1 self pairs only.
    NeighborGraph empty = build_neighbors(domain, 0.5);
    CHECK(pair_count(3, PairConfig{1, empty}) == 2 * domain.size());
}

TEST_CASE("pair stream matches the set definition and is duplicate-free") {
    Rng rng(11);
    SpatialDomain domain = test_support::random_domain(7, rng);
    NeighborGraph g = build_neighbors(domain, 2.5);
    PairConfig cfg{2, g};

    std::set<std::tuple<int, int, int, int>> seen;
    int count = 0;
    for_each_pair(6, cfg, [&](const PairKey& k) {
        CHECK(seen.insert({k.t, k.i, k.s1, k.s2}).second);
        ++count;
    });
    const auto oracle = test_support::enumerate_pairs_oracle(6, 2, g);
    CHECK(count == static_cast<int>(oracle.size()));
    CHECK(count == pair_count(6, cfg));
    for (const auto& p : oracle) {
        CHECK(seen.count({p.t, p.i, p.s1, p.s2}) == 1);
    }

    // Independent cursors see the same stream.
    PairCursor a(6, cfg), b(6, cfg);
    auto ka = a.next();
    a.next();
    auto kb = b.next();
    CHECK(ka->s1 == kb->s1);
    CHECK(ka->t == kb->t);
}

TEST_CASE("edge multiset multiplicities") {
    SpatialDomain domain = make_grid_domain(3, 3);
    NeighborGraph rook = build_neighbors(domain, 1.0);

    CHECK(edge_multiset(PairConfig{1, rook}).total_multiplicity() == 33);
    CHECK(edge_multiset(PairConfig{2, rook}).total_multiplicity() == 99);
    for (const auto& e : edge_multiset(PairConfig{2, rook}).entries) {
        CHECK(e.multiplicity == (2 - e.time_offset + 1) * (1 + rook.degree(e.station)));
    }

    NeighborGraph empty = build_neighbors(domain, 0.5);
    CHECK(edge_multiset(PairConfig{1, empty}).total_multiplicity() == domain.size());
}

TEST_CASE("normalizing constant") {
    SpatialDomain domain = make_grid_domain(3, 3);
    NeighborGraph rook = build_neighbors(domain, 1.0);
    PairConfig cfg{1, rook};
    CHECK(normalizing_constant(5, cfg) == doctest::Approx(38.0 / 3.0).epsilon(1e-12));

    SpatialDomain one(std::vector<Station>{{"a", 0, 0}}, Metric::PlanarEuclidean);
    PairConfig cfg1{1, build_neighbors(one, 1.0)};
    CHECK(normalizing_constant(10, cfg1) == doctest::Approx(2.0).epsilon(1e-12));

    // Invariant to the series length (the factor counts scale with T).
    CHECK(normalizing_constant(7, cfg) == doctest::Approx(normalizing_constant(50, cfg)));

    // Invariant to station relabeling: counts depend only on the degrees.
    std::vector<Station> shuffled = domain.stations();
    std::swap(shuffled[0], shuffled[5]);
    std::swap(shuffled[2], shuffled[7]);
    SpatialDomain relabeled(shuffled, Metric::PlanarEuclidean);
    PairConfig cfg2{1, build_neighbors(relabeled, 1.0)};
    CHECK(normalizing_constant(5, cfg2) == doctest::Approx(38.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("edge balance: every observation enters the same number of factors") {
    Rng rng(29);
    for (int trial = 0; trial < 5; ++trial) {
        SpatialDomain domain = test_support::random_domain(5 + trial, rng);
        NeighborGraph g = build_neighbors(domain, 2.0 + 0.3 * trial);
        for (int k : {1, 2}) {
            PairConfig cfg{k, g};
            for (int t_len : {k + 1, 5, 9}) {
                const Eigen::MatrixXi counts = test_support::factor_counts_oracle(t_len, k, g);
                for (int t = 0; t < t_len; ++t) {
                    for (int s = 0; s < g.size(); ++s) {
                        CHECK(counts(t, s) == factor_count(cfg, s));
                    }
                }
                // The normalizer equals the mean factor count.
                double mean_count = 0.0;
                for (int s = 0; s < g.size(); ++s) mean_count += factor_count(cfg, s);
                mean_count /= g.size();
                CHECK(normalizing_constant(std::max(t_len, k + 1), cfg) ==
                      doctest::Approx(mean_count).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("split additivity of pair counts with edge compensation") {
    // Dropping the pairs that cross a split and adding both segments' edge
    // marginals restores every observation's factor count.
    Rng rng(31);
    SpatialDomain domain = test_support::random_domain(6, rng);
    NeighborGraph g = build_neighbors(domain, 2.5);
    for (int k : {1, 2}) {
        const int t_len = 10, tau = 4;
        const Eigen::MatrixXi whole = test_support::factor_counts_oracle(t_len, k, g);
        const Eigen::MatrixXi left = test_support::factor_counts_oracle(tau, k, g);
        const Eigen::MatrixXi right = test_support::factor_counts_oracle(t_len - tau, k, g);
        for (int s = 0; s < g.size(); ++s) {
            for (int t = 0; t < tau; ++t) CHECK(left(t, s) == whole(t, s));
            for (int t = 0; t < t_len - tau; ++t) CHECK(right(t, s) == whole(tau + t, s));
        }
    }
}

TEST_CASE("geodesic distances") {
    CHECK(geodesic_km(40.0, -88.0, 40.0, -88.0) == 0.0);
    // One degree of longitude along the equator is an exact circular arc.
    CHECK(geodesic_km(0.0, 10.0, 0.0, 11.0) ==
          doctest::Approx(111.31949079327357).epsilon(1e-9));
    // Meridian arcs against elliptic-integral values (meters-level identity).
    CHECK(geodesic_km(0.0, 5.0, 10.0, 5.0) == doctest::Approx(1105.8548332343722).epsilon(1e-9));
    CHECK(geodesic_km(0.0, 5.0, 45.0, 5.0) == doctest::Approx(4984.9443779777435).epsilon(1e-9));
    CHECK(geodesic_km(0.0, 5.0, 60.0, 5.0) == doctest::Approx(6654.0728194905117).epsilon(1e-9));
    // Published GRS80/WGS84 survey baseline (Flinders Peak - Buninyong).
    CHECK(geodesic_km(-37.951033415, 144.424867889, -37.652821156, 143.926495530) ==
          doctest::Approx(54.972271).epsilon(2e-5));

    Rng rng(5);
    for (int i = 0; i < 25; ++i) {
        const double a1 = rng.uniform() * 120 - 60, o1 = rng.uniform() * 300 - 150;
        const double a2 = a1 + rng.uniform() * 8 - 4, o2 = o1 + rng.uniform() * 8 - 4;
        CHECK(geodesic_km(a1, o1, a2, o2) == doctest::Approx(geodesic_km(a2, o2, a1, o1)));
    }
    CHECK_THROWS_AS(geodesic_km(91.0, 0.0, 0.0, 0.0), domain_violation);
}
