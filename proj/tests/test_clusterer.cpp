#include "oracles.hpp"

#include "radnet/clusterer.hpp"
#include "radnet/errors.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>

using namespace radnet;

namespace {

struct RandomTable {
    std::vector<int> ids;
    std::vector<std::tuple<int, int, double>> edges;
    LinkageTable table;
};

RandomTable random_table(Rng& rng) {
    RandomTable r;
    const int n = static_cast<int>(rng.uniform_int(1, 30));
    for (int i = 0; i < n; ++i) r.ids.push_back(i * 3 + 1);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (!rng.bernoulli(0.2)) continue;
            const double s = rng.uniform();
            r.edges.emplace_back(r.ids[static_cast<std::size_t>(a)], r.ids[static_cast<std::size_t>(b)], s);
            r.table.add(r.ids[static_cast<std::size_t>(b)], r.ids[static_cast<std::size_t>(a)], s, 1);
        }
    }
    return r;
}

// Every cluster of `fine` lies inside one cluster of `coarse`.
bool refines(const std::map<int, int>& fine, const std::map<int, int>& coarse) {
    std::map<int, int> target;
    for (const auto& [item, c] : fine) {
        auto [it, inserted] = target.emplace(c, coarse.at(item));
        if (!inserted && it->second != coarse.at(item)) return false;
    }
    return true;
}

} // namespace

TEST_CASE("union find") {
    UnionFind uf(5);
    CHECK(uf.components() == 5);
    CHECK(uf.unite(0, 1));
    CHECK(uf.unite(3, 4));
    CHECK_FALSE(uf.unite(1, 0));
    CHECK(uf.unite(1, 4));
    CHECK(uf.components() == 2);
    CHECK(uf.find(0) == uf.find(3));
    CHECK(uf.size_of(4) == 4);
    CHECK(uf.size_of(2) == 1);
}

TEST_CASE("linkage table pools evidence") {
    LinkageTable t;
    t.add(5, 2, 1.5, 2);
    t.add(2, 5, 0.5, 2);
    REQUIRE(t.score(2, 5).has_value());
    CHECK(*t.score(5, 2) == doctest::Approx(0.5));
    CHECK_FALSE(t.score(2, 3).has_value());
    CHECK_THROWS_AS(t.add(1, 1, 1.0, 1), InvalidInput);
    CHECK_THROWS_AS(t.add(1, 2, 1.0, 0), InvalidInput);

    LinkageTable u;
    u.add(2, 5, 3.0, 4);
    const std::vector<LinkageTable> both{t, u};
    const auto m = merge_linkages(both);
    CHECK(*m.score(2, 5) == doctest::Approx(5.0 / 8.0));
}

TEST_CASE("clustering matches breadth-first components") {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = random_table(rng);
        const double threshold = rng.uniform();
        const auto got = cluster(r.table, threshold, r.ids);
        CHECK(oracle::same_partition(got.cluster_of, oracle::bfs_components(r.ids, r.edges, threshold)));
    }
}

TEST_CASE("raising the threshold only refines the partition") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto r = random_table(rng);
        std::map<int, int> prev;
        int prev_count = 0;
        for (double t = 0.0; t <= 1.0; t += 0.05) {
            const auto a = cluster(r.table, t, r.ids);
            if (!prev.empty()) {
                CHECK(refines(a.cluster_of, prev));
                CHECK(a.cluster_count >= prev_count);
            }
            prev = a.cluster_of;
            prev_count = a.cluster_count;
        }
    }
}

TEST_CASE("links need a score strictly above the threshold") {
    LinkageTable t;
    t.add(1, 2, 0.5, 1);
    const std::vector<int> ids{1, 2};
    CHECK(cluster(t, 0.5, ids).cluster_count == 2);
    CHECK(cluster(t, 0.4999, ids).cluster_count == 1);
}

TEST_CASE("cluster ids follow the smallest member") {
    LinkageTable t;
    t.add(9, 4, 0.9, 1);
    t.add(7, 2, 0.9, 1);
    const std::vector<int> ids{9, 7, 4, 2, 11};
    const auto a = cluster(t, 0.5, ids);
    CHECK(a.cluster_count == 3);
    CHECK(a.cluster_of.at(2) == 0);
    CHECK(a.cluster_of.at(7) == 0);
    CHECK(a.cluster_of.at(4) == 1);
    CHECK(a.cluster_of.at(9) == 1);
    CHECK(a.cluster_of.at(11) == 2);
}

TEST_CASE("track linkage is the mean over spanning clue pairs") {
    Rng rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = oracle::random_graph(rng, 14, 4);
        const auto n = static_cast<Eigen::Index>(g.size());
        Matrix a(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                a(i, j) = a(j, i) = rng.bernoulli(0.2) ? std::numeric_limits<double>::quiet_NaN() : rng.uniform();
            }
        }
        const auto got = track_linkage(g, a);
        std::map<std::pair<int, int>, std::pair<double, long>> want;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                int ti = g.track_id(static_cast<std::size_t>(i)), tj = g.track_id(static_cast<std::size_t>(j));
                if (ti == tj || std::isnan(a(i, j))) continue;
                auto& w = want[{std::min(ti, tj), std::max(ti, tj)}];
                w.first += a(i, j);
                w.second++;
            }
        }
        REQUIRE(got.size() == want.size());
        for (const auto& e : got) {
            const auto& w = want.at({e.track_a, e.track_b});
            CHECK(e.count == w.second);
            CHECK(e.sum == doctest::Approx(w.first).epsilon(1e-12));
        }
    }
    Rng r2(1);
    const auto g = oracle::random_graph(r2, 5, 2);
    CHECK_THROWS_AS(track_linkage(g, Matrix(1, 1)), InvalidInput);
}

TEST_CASE("per-modality linkage only sees pairs within that modality") {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = oracle::random_graph(rng, 14, 4);
        const auto n = static_cast<Eigen::Index>(g.size());
        Matrix a(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform();
        }
        for (Modality m : kModalities) {
            Matrix masked = a;
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = 0; j < n; ++j) {
                    if (g.modality(static_cast<std::size_t>(i)) != m || g.modality(static_cast<std::size_t>(j)) != m) {
                        masked(i, j) = std::numeric_limits<double>::quiet_NaN();
                    }
                }
            }
            const auto got = track_linkage(g, a, m);
            const auto want = track_linkage(g, masked);
            REQUIRE(got.size() == want.size());
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got[k].track_a == want[k].track_a);
                CHECK(got[k].track_b == want[k].track_b);
                CHECK(got[k].count == want[k].count);
                CHECK(got[k].sum == want[k].sum);
            }
        }
    }
}

TEST_CASE("strongest modality takes the best pooled score per pair") {
    std::array<LinkageTable, 3> modal;
    modal[0].add(1, 2, 0.9, 1);
    modal[0].add(1, 2, 0.1, 1); // pooled face score 0.5
    modal[1].add(2, 1, 1.4, 2); // body 0.7
    modal[2].add(3, 4, 0.2, 1);
    const auto t = strongest_modality(modal);
    CHECK(t.size() == 2);
    CHECK(*t.score(1, 2) == doctest::Approx(0.7));
    CHECK(*t.score(3, 4) == doctest::Approx(0.2));
    // One modality linking two tracks is enough.
    const std::vector<int> ids{1, 2, 3, 4};
    CHECK(cluster(t, 0.6, ids).cluster_count == 3);
}
