#include "oracles.hpp"

#include "radnet/errors.hpp"
#include "radnet/gradcheck.hpp"
#include "radnet/trainer.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace radnet;

namespace {

ModelShape shape_for(const MultiModalGraph& g, Mode mode, int cycles = 2) {
    ModelShape s;
    s.width = static_cast<int>(g.size());
    s.hidden = 6;
    s.cycles = cycles;
    s.mode = mode;
    for (std::size_t i = 0; i < g.size(); ++i) s.dims[index_of(g.modality(i))] = static_cast<int>(g.node(i).feature.size());
    return s;
}

// Two identities, two tracks each, with face and body clues near the identity direction.
MultiModalGraph separable_graph(Rng& rng) {
    std::vector<Clue> nodes;
    int id = 0;
    for (int track = 0; track < 4; ++track) {
        const int identity = track % 2;
        for (Modality m : {Modality::face, Modality::body}) {
            for (int k = 0; k < 2; ++k) {
                Clue c;
                c.clue_id = id++;
                c.track_id = track;
                c.modality = m;
                c.identity = identity;
                c.feature = Vector::Zero(3);
                c.feature(identity) = 1.0;
                for (int d = 0; d < 3; ++d) c.feature(d) += rng.uniform(-0.6, 0.6);
                c.feature.normalize();
                nodes.push_back(c);
            }
        }
    }
    return MultiModalGraph(nodes, 0);
}

double bce_ref(double y, double p) {
    p = std::min(std::max(p, 1e-6), 1.0 - 1e-6);
    return -(y * std::log(p) + (1 - y) * std::log(1 - p));
}

} // namespace

TEST_CASE("mode names round trip") {
    for (Mode m : {Mode::full, Mode::feature_only, Mode::distribution_only}) CHECK(parse_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_mode("both"), InvalidInput);
}

TEST_CASE("model tensors follow a fixed order") {
    ModelShape s;
    s.width = 5;
    s.hidden = 3;
    s.cycles = 2;
    s.dims = {4, 0, 2};
    auto m = Model::create(s, 1);
    std::vector<std::string> names;
    for (const auto& t : m.tensors()) names.push_back(t.name);
    REQUIRE(names.size() == 2 * (4 + 8));
    CHECK(names[0] == "cycle0.sigma.w1");
    CHECK(names[4] == "cycle0.phi.face.wt");
    CHECK(names[8] == "cycle0.phi.voice.wt");
    CHECK(names[12] == "cycle1.sigma.w1");

    s.mode = Mode::feature_only;
    CHECK(Model::create(s, 1).tensors().size() == 2 * 8);
    s.mode = Mode::distribution_only;
    CHECK(Model::create(s, 1).tensors().size() == 2 * 4);
    s.width = 0;
    CHECK_THROWS_AS(Model::create(s, 1), InvalidInput);
}

TEST_CASE("model creation is deterministic in the seed") {
    ModelShape s;
    s.width = 5;
    s.hidden = 3;
    s.dims = {4, 4, 0};
    auto a = Model::create(s, 9), b = Model::create(s, 9), c = Model::create(s, 10);
    auto ta = a.tensors(), tb = b.tensors(), tc = c.tensors();
    bool same = true, differ = false;
    for (std::size_t t = 0; t < ta.size(); ++t) {
        for (std::size_t k = 0; k < ta[t].data.size(); ++k) {
            same &= ta[t].data[k] == tb[t].data[k];
            differ |= ta[t].data[k] != tc[t].data[k];
        }
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("label matrix") {
    Rng rng(1);
    const auto g = separable_graph(rng);
    const auto y = label_matrix(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < g.size(); ++j) {
            CHECK(y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == (*g.node(i).identity == *g.node(j).identity ? 1.0 : 0.0));
        }
    }
    auto nodes = g.nodes();
    nodes[2].identity.reset();
    CHECK_THROWS_AS(label_matrix(MultiModalGraph(nodes, 0)), InvalidInput);
}

TEST_CASE("bce forms agree") {
    for (double y : {0.0, 1.0}) {
        for (double z : {-8.0, -1.0, 0.0, 0.5, 6.0}) {
            CHECK(bce_logit(y, z) == doctest::Approx(bce(y, sigmoid(z))).epsilon(1e-9));
        }
    }
    CHECK(std::isfinite(bce_logit(1.0, -1000.0)));
    CHECK(bce_logit(1.0, -1000.0) == doctest::Approx(1000.0));
}

TEST_CASE("inference trace shapes and affinity invariants") {
    Rng rng(2);
    for (Mode mode : {Mode::full, Mode::feature_only, Mode::distribution_only}) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto g = oracle::random_graph(rng, 14, 4);
            const auto model = Model::create(shape_for(g, mode, 3), 5);
            const auto trace = run_inference(g, model, {});
            REQUIRE(trace.generations() == 3);
            const auto n = static_cast<Eigen::Index>(g.size());
            CHECK(trace.final_affinity.rows() == n);
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double a = trace.final_affinity(i, j);
                    const bool cross = g.modality(static_cast<std::size_t>(i)) != g.modality(static_cast<std::size_t>(j));
                    if (mode == Mode::feature_only && cross) {
                        CHECK(std::isnan(a));
                        continue;
                    }
                    CHECK(a >= 0.0);
                    CHECK(a <= 1.0);
                    CHECK(a == trace.final_affinity(j, i));
                }
            }
            for (const auto& f : trace.cycles.back().features) CHECK(f.norm() == doctest::Approx(1.0));
            if (mode == Mode::distribution_only) {
                for (std::size_t i = 0; i < g.size(); ++i) CHECK(trace.cycles.back().features[i] == g.node(i).feature);
            }
        }
    }
}

TEST_CASE("relabelling nodes permutes the final affinity") {
    Rng rng(3);
    for (Mode mode : {Mode::full, Mode::feature_only}) {
        for (int trial = 0; trial < 8; ++trial) {
            const auto g = oracle::random_graph(rng, 12, 4);
            std::vector<std::size_t> perm(g.size());
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
            std::vector<Clue> shuffled;
            for (std::size_t p : perm) shuffled.push_back(g.node(p));
            const MultiModalGraph h(shuffled, g.pivot_track_id());
            const auto model = Model::create(shape_for(g, mode), 4);
            const auto a = run_inference(g, model, {}).final_affinity;
            const auto b = run_inference(h, model, {}).final_affinity;
            double worst = 0.0;
            for (std::size_t i = 0; i < perm.size(); ++i) {
                for (std::size_t j = 0; j < perm.size(); ++j) {
                    const double x = b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    const double y = a(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
                    if (std::isnan(x) || std::isnan(y)) {
                        CHECK(std::isnan(x) == std::isnan(y));
                        continue;
                    }
                    worst = std::max(worst, std::abs(x - y));
                }
            }
            CHECK(worst < 1e-10);
        }
    }
}

TEST_CASE("losses match a direct sum over the trace") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = oracle::random_graph(rng, 12, 4);
        const auto model = Model::create(shape_for(g, Mode::full), 6);
        const auto trace = run_inference(g, model, {});
        const auto y = label_matrix(g);
        const std::vector<double> mu{0.2, 1.0};
        double lf = 0.0, ld = 0.0;
        for (int l = 1; l <= 2; ++l) {
            const auto& st = trace.cycles[static_cast<std::size_t>(l)];
            for (std::size_t i = 0; i < g.size(); ++i) {
                for (std::size_t j = i + 1; j < g.size(); ++j) {
                    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                    if (g.modality(i) == g.modality(j)) {
                        lf += mu[static_cast<std::size_t>(l - 1)] * bce_ref(y(ii, jj), (1 + st.features[i].dot(st.features[j])) / 2);
                    }
                    ld += mu[static_cast<std::size_t>(l - 1)] * bce_ref(y(ii, jj), st.affinity(ii, jj));
                }
            }
        }
        CHECK(feature_loss(g, trace, y, mu) == doctest::Approx(lf).epsilon(1e-10));
        CHECK(distribution_loss(g, trace, y, mu) == doctest::Approx(ld).epsilon(1e-6));

        TrainerConfig cfg;
        const auto lb = loss_and_gradient(g, model, {}, cfg, nullptr);
        CHECK(lb.total == doctest::Approx(cfg.lambda_f * lb.feature + cfg.lambda_d * lb.distribution));
    }
}

TEST_CASE("training lowers the loss on a separable graph") {
    Rng rng(5);
    std::vector<MultiModalGraph> batch{separable_graph(rng), separable_graph(rng)};
    for (Mode mode : {Mode::full, Mode::feature_only, Mode::distribution_only}) {
        TrainerConfig cfg;
        cfg.mode = mode;
        cfg.lr = 1e-2;
        auto model = Model::create(shape_for(batch[0], mode), 8);
        AdamState opt;
        opt.cfg.lr = cfg.lr;
        const double first = train_iteration(batch, model, opt, {}, cfg).total;
        double last = first;
        for (int it = 0; it < 150; ++it) last = train_iteration(batch, model, opt, {}, cfg).total;
        CHECK(last < 0.8 * first);
    }
}

TEST_CASE("a non-finite loss names the pivot track") {
    Rng rng(6);
    auto g = separable_graph(rng);
    auto nodes = g.nodes();
    for (auto& c : nodes) c.track_id += 40;
    const MultiModalGraph h(nodes, 40);
    TrainerConfig cfg;
    auto model = Model::create(shape_for(h, Mode::full), 1);
    model.sigma[0].w2(0) = std::nan("");
    AdamState opt;
    std::vector<MultiModalGraph> batch{h};
    try {
        train_iteration(batch, model, opt, {}, cfg);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("40") != std::string::npos);
    }
}

TEST_CASE("inference rejects graphs wider than the model") {
    Rng rng(7);
    const auto g = separable_graph(rng);
    auto s = shape_for(g, Mode::full);
    s.width = static_cast<int>(g.size()) - 1;
    CHECK_THROWS_AS(run_inference(g, Model::create(s, 1), {}), InvalidInput);
}

TEST_CASE("trainer config validation") {
    TrainerConfig c;
    c.validate();
    c.mu_f = {1.0};
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = {};
    c.lr = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    CHECK(TrainerConfig::default_mu(3) == std::vector<double>{0.2, 0.2, 1.0});
}

TEST_CASE("gradient check passes and its negative control fails") {
    const auto ok = run_gradcheck(1);
    for (const auto& e : ok.entries) {
        INFO(e.name << " error " << e.max_error);
        CHECK(e.passed());
    }
    CHECK(ok.passed());
    const auto bad = run_gradcheck(1, true);
    CHECK_FALSE(bad.passed());
    for (const auto& e : bad.entries) CHECK_FALSE(e.passed());
}
