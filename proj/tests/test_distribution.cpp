#include "oracles.hpp"

#include "radnet/distribution.hpp"
#include "radnet/errors.hpp"

#include <doctest.h>

#include <numeric>

using namespace radnet;

TEST_CASE("distribution config validation") {
    DistributionConfig c;
    c.validate();
    c.eta = 1.5;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = {};
    c.alpha = -0.1;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("soft initialization") {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = oracle::random_graph(rng, 15, 4);
        const auto d = init_distribution(g, 0.7);
        const auto want = oracle::init(oracle::nodes_of(g, g.features()), 0.7);
        CHECK((d.d - want).cwiseAbs().maxCoeff() == 0.0);
        CHECK(d.cycle == 0);
    }
}

TEST_CASE("intra-modality probability") {
    Vector a(2), b(2);
    a << 1, 0;
    b << -1, 0;
    CHECK(intra_modality_prob(a, a) == doctest::Approx(1.0));
    CHECK(intra_modality_prob(a, b) == doctest::Approx(0.0));
    b << 0, 1;
    CHECK(intra_modality_prob(a, b) == doctest::Approx(0.5));
}

TEST_CASE("cross-modality probability uses bridges and carries over without them") {
    // Track 1: face f0, body b1. Track 2: face f2. Track 3: voice v3.
    std::vector<Clue> nodes(4);
    Vector e0(2), e1(2);
    e0 << 1, 0;
    e1 << 0, 1;
    nodes[0] = {0, 1, Modality::face, e0, 0};
    nodes[1] = {1, 1, Modality::body, e1, 0};
    nodes[2] = {2, 2, Modality::face, e1, 1};
    nodes[3] = {3, 3, Modality::voice, e0, 1};
    const MultiModalGraph g(nodes, 1);
    const auto feats = g.features();
    const Matrix intra = intra_modality_matrix(g, feats);
    DistributionState prev = init_distribution(g, 0.7);
    prev.d(1, 2) = 0.123;

    // Same track.
    CHECK(cross_modality_prob(g, 0, 1, intra, prev) == 1.0);
    // body b1 towards face f2: no body node in track 2, carry over.
    CHECK(cross_modality_prob(g, 1, 2, intra, prev) == 0.123);
    // face f2 towards body b1: bridge is f0 in track 1.
    CHECK(cross_modality_prob(g, 2, 1, intra, prev) == doctest::Approx(0.5));
    CHECK_THROWS_AS(cross_modality_prob(g, 0, 2, intra, prev), InvalidInput);
}

TEST_CASE("cycle update matches the brute-force oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        const auto g = oracle::random_graph(rng, 18, 5);
        auto feats = g.features();
        const auto nodes = oracle::nodes_of(g, feats);
        DistributionConfig cfg;
        cfg.eta = rng.uniform(0.5, 1.0);
        cfg.alpha = rng.uniform(0.0, 1.0);
        DistributionState st = init_distribution(g, cfg.eta);
        Matrix want = oracle::init(nodes, cfg.eta);
        for (int cycle = 1; cycle <= 3; ++cycle) {
            st = compute_distribution(g, feats, st, cfg);
            want = oracle::step(nodes, want, cfg.alpha);
            CHECK(st.cycle == cycle);
            CHECK((st.d - want).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("distribution invariants") {
    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const auto g = oracle::random_graph(rng, 16, 5);
        const auto feats = g.features();
        DistributionConfig cfg;
        auto st = compute_distribution(g, feats, init_distribution(g, cfg.eta), cfg);
        CHECK((st.d - st.d.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((st.d.diagonal().array() == 1.0).all());
        CHECK(st.d.minCoeff() >= 0.0);
        CHECK(st.d.maxCoeff() <= 1.0);
    }
}

TEST_CASE("relabelling nodes permutes the distribution") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = oracle::random_graph(rng, 12, 4);
        std::vector<std::size_t> perm(g.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
        std::vector<Clue> shuffled;
        for (std::size_t p : perm) shuffled.push_back(g.node(p));
        const MultiModalGraph h(shuffled, g.pivot_track_id());

        DistributionConfig cfg;
        auto a = compute_distribution(g, g.features(), init_distribution(g, cfg.eta), cfg);
        auto b = compute_distribution(h, h.features(), init_distribution(h, cfg.eta), cfg);
        a = compute_distribution(g, g.features(), a, cfg);
        b = compute_distribution(h, h.features(), b, cfg);
        double worst = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            for (std::size_t j = 0; j < perm.size(); ++j) {
                worst = std::max(worst, std::abs(b.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                                 a.d(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]))));
            }
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("distribution rejects mismatched inputs") {
    Rng rng(2);
    const auto g = oracle::random_graph(rng, 6, 2);
    auto feats = g.features();
    feats.pop_back();
    CHECK_THROWS_AS(compute_distribution(g, feats, init_distribution(g, 0.7), {}), InvalidInput);
    CHECK_THROWS_AS(init_distribution(g, 1.2), InvalidInput);
}
