#include "radnet/errors.hpp"
#include "radnet/neural.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace radnet;

namespace {

Vector random_vector(Rng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.uniform(lo, hi);
    return v;
}

SigmaParams random_sigma(Rng& rng, Eigen::Index width, Eigen::Index hidden) {
    auto p = SigmaParams::random(width, hidden, rng);
    p.b1 = random_vector(rng, hidden, -0.3, 0.3);
    p.b2 = rng.uniform(-0.3, 0.3);
    return p;
}

PhiParams random_phi(Rng& rng, Eigen::Index dim) {
    auto p = PhiParams::random(dim, rng);
    p.bt = random_vector(rng, dim, -0.3, 0.3);
    p.bg = random_vector(rng, dim, -0.3, 0.3);
    return p;
}

double rel_error(double a, double n) { return std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)}); }

// Central difference of f with respect to one scalar.
template <typename F>
double numeric(double& x, F&& f, double h = 1e-6) {
    const double keep = x;
    x = keep + h;
    const double up = f();
    x = keep - h;
    const double down = f();
    x = keep;
    return (up - down) / (2.0 * h);
}

} // namespace

TEST_CASE("sigma output is a probability, symmetric and order-invariant") {
    Rng rng(1);
    const auto p = random_sigma(rng, 12, 8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<Eigen::Index>(rng.uniform_int(1, 12));
        const Vector a = random_vector(rng, n, 0, 1), b = random_vector(rng, n, 0, 1);
        const double ab = sigma_forward(p, a, b).first;
        CHECK(ab > 0.0);
        CHECK(ab < 1.0);
        CHECK(ab == sigma_forward(p, b, a).first);
        Vector ra = a.reverse(), rb = b.reverse();
        CHECK(ab == doctest::Approx(sigma_forward(p, ra, rb).first).epsilon(1e-14));
    }
}

TEST_CASE("sigma input sorts descending and pads with zeros") {
    Vector a(3), b(3);
    a << 0.2, 0.9, 0.5;
    b << 0.4, 0.1, 0.5;
    const auto in = make_sigma_input(a, b, 5);
    CHECK(in.x.size() == 5);
    CHECK(in.x(0) == doctest::Approx(0.8));
    CHECK(in.x(1) == doctest::Approx(0.2));
    CHECK(in.x(2) == 0.0);
    CHECK(in.x(4) == 0.0);
    CHECK(in.from[0] == 1);
    CHECK(in.sign(0) == -1.0);
    CHECK_THROWS_AS(make_sigma_input(a, b, 2), InvalidInput);
    CHECK_THROWS_AS(make_sigma_input(a, Vector(2), 5), InvalidInput);
}

TEST_CASE("sigma gradients agree with finite differences") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index width = 7, hidden = 5;
        auto p = random_sigma(rng, width, hidden);
        const auto n = static_cast<Eigen::Index>(rng.uniform_int(2, width));
        Vector a = random_vector(rng, n, 0, 1), b = random_vector(rng, n, 0, 1);
        const double up = rng.uniform(-2, 2);
        const auto [out, cache] = sigma_forward(p, a, b);
        const auto g = sigma_backward(p, cache, up);
        const auto f = [&] { return up * sigma_forward(p, a, b).first; };
        double worst = 0.0;
        for (Eigen::Index k = 0; k < p.w1.size(); ++k) worst = std::max(worst, rel_error(g.params.w1.data()[k], numeric(p.w1.data()[k], f)));
        for (Eigen::Index k = 0; k < hidden; ++k) {
            worst = std::max(worst, rel_error(g.params.b1(k), numeric(p.b1(k), f)));
            worst = std::max(worst, rel_error(g.params.w2(k), numeric(p.w2(k), f)));
        }
        worst = std::max(worst, rel_error(g.params.b2, numeric(p.b2, f)));
        for (Eigen::Index k = 0; k < n; ++k) {
            worst = std::max(worst, rel_error(g.d_i(k), numeric(a(k), f)));
            worst = std::max(worst, rel_error(g.d_j(k), numeric(b(k), f)));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("sigma backward refuses a stale cache") {
    Rng rng(3);
    auto p = random_sigma(rng, 4, 3);
    const auto [out, cache] = sigma_forward(p, Vector::Ones(2), Vector::Zero(2));
    p.revision++;
    CHECK_THROWS_AS(sigma_backward(p, cache, 1.0), InvalidState);
}

TEST_CASE("batched sigma matches the single-pair path") {
    Rng rng(4);
    const auto p = random_sigma(rng, 6, 4);
    Matrix x(5, 6);
    std::vector<std::pair<Vector, Vector>> pairs;
    for (int r = 0; r < 5; ++r) {
        pairs.emplace_back(random_vector(rng, 6, 0, 1), random_vector(rng, 6, 0, 1));
        x.row(r) = make_sigma_input(pairs.back().first, pairs.back().second, 6).x.transpose();
    }
    const auto batch = sigma_forward_batch(p, x);
    Vector gl = random_vector(rng, 5);
    SigmaParams grads = SigmaParams::zeros(6, 4);
    sigma_backward_batch(p, batch, gl, grads);
    SigmaParams want = SigmaParams::zeros(6, 4);
    for (int r = 0; r < 5; ++r) {
        const auto [out, cache] = sigma_forward(p, pairs[static_cast<std::size_t>(r)].first, pairs[static_cast<std::size_t>(r)].second);
        CHECK(batch.out(r) == doctest::Approx(out).epsilon(1e-14));
        // Single-pair backward takes d/d(out); convert the logit gradient.
        const auto g = sigma_backward(p, cache, gl(r) / (out * (1.0 - out)));
        want.w1 += g.params.w1;
        want.b1 += g.params.b1;
        want.w2 += g.params.w2;
        want.b2 += g.params.b2;
    }
    CHECK((grads.w1 - want.w1).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((grads.b1 - want.b1).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((grads.w2 - want.w2).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(grads.b2 == doctest::Approx(want.b2).epsilon(1e-10));
}

TEST_CASE("phi output has unit norm and matches finite differences") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index dim = 4;
        auto p = random_phi(rng, dim);
        Vector h = random_vector(rng, dim), f = random_vector(rng, dim);
        const Vector up = random_vector(rng, dim);
        const auto [out, cache] = phi_forward(p, h, f);
        CHECK(out.norm() == doctest::Approx(1.0));
        const auto g = phi_backward(p, cache, up);
        const auto fn = [&] { return up.dot(phi_forward(p, h, f).first); };
        double worst = 0.0;
        for (Eigen::Index k = 0; k < p.wt.size(); ++k) worst = std::max(worst, rel_error(g.params.wt.data()[k], numeric(p.wt.data()[k], fn)));
        for (Eigen::Index k = 0; k < p.wg.size(); ++k) worst = std::max(worst, rel_error(g.params.wg.data()[k], numeric(p.wg.data()[k], fn)));
        for (Eigen::Index k = 0; k < dim; ++k) {
            worst = std::max(worst, rel_error(g.params.bt(k), numeric(p.bt(k), fn)));
            worst = std::max(worst, rel_error(g.params.bg(k), numeric(p.bg(k), fn)));
            worst = std::max(worst, rel_error(g.h(k), numeric(h(k), fn)));
            worst = std::max(worst, rel_error(g.f(k), numeric(f(k), fn)));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("phi rejects a vanishing mix and stale caches") {
    const auto p = PhiParams::zeros(3);
    CHECK_THROWS_AS(phi_forward(p, Vector::Zero(3), Vector::Zero(3)), NumericalError);
    CHECK_THROWS_AS(phi_forward(p, Vector::Zero(2), Vector::Zero(3)), InvalidInput);
    auto q = PhiParams::zeros(3);
    const auto [out, cache] = phi_forward(q, Vector::Ones(3), Vector::Ones(3));
    q.revision = 9;
    CHECK_THROWS_AS(phi_backward(q, cache, Vector::Ones(3)), InvalidState);
}

TEST_CASE("adam takes the textbook step") {
    Vector p(2), g(2);
    p << 1.0, -1.0;
    g << 0.5, -2.0;
    std::vector<TensorRef> params{{"p", 2, 1, std::span<double>(p.data(), 2)}};
    std::vector<TensorRef> grads{{"g", 2, 1, std::span<double>(g.data(), 2)}};
    AdamState st;
    st.cfg.lr = 0.1;
    adam_step(st, params, grads);
    // First step: m_hat = g, v_hat = g^2, so each entry moves by lr * sign(g).
    CHECK(p(0) == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(p(1) == doctest::Approx(-0.9).epsilon(1e-7));

    // Second step with the same gradient, computed by hand.
    const double before = p(0);
    adam_step(st, params, grads);
    const double m = 0.9 * 0.05 + 0.1 * 0.5, v = 0.999 * 0.00025 + 0.001 * 0.25;
    const double step = 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
    CHECK(p(0) == doctest::Approx(before - step).epsilon(1e-12));
    CHECK(st.step == 2);
}

TEST_CASE("adam names the tensor holding a non-finite gradient") {
    Vector p = Vector::Ones(2), g(2);
    g << 1.0, std::nan("");
    std::vector<TensorRef> params{{"layer.w", 2, 1, std::span<double>(p.data(), 2)}};
    std::vector<TensorRef> grads{{"layer.w", 2, 1, std::span<double>(g.data(), 2)}};
    AdamState st;
    try {
        adam_step(st, params, grads);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("layer.w") != std::string::npos);
    }
    CHECK(p(0) == 1.0);
}

TEST_CASE("sigmoid is stable at the extremes") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) == 0.0);
    CHECK(std::isfinite(sigmoid(-800.0)));
}
