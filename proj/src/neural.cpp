#include "radnet/neural.hpp"

#include "radnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace radnet {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

TensorRef view(std::string name, Matrix& m) {
    return {std::move(name), m.rows(), m.cols(), std::span<double>(m.data(), static_cast<std::size_t>(m.size()))};
}

TensorRef view(std::string name, Vector& v) {
    return {std::move(name), v.size(), 1, std::span<double>(v.data(), static_cast<std::size_t>(v.size()))};
}

TensorRef view(std::string name, double& x) { return {std::move(name), 1, 1, std::span<double>(&x, 1)}; }

void fill_uniform(Matrix& m, double bound, Rng& rng) {
    // Column-major fill order keeps the stream layout-defined.
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
    }
}

} // namespace

// ---------------------------------------------------------------------------

SigmaParams SigmaParams::zeros(Eigen::Index width, Eigen::Index hidden) {
    SigmaParams p;
    p.w1 = Matrix::Zero(hidden, width);
    p.b1 = Vector::Zero(hidden);
    p.w2 = Vector::Zero(hidden);
    p.b2 = 0.0;
    return p;
}

SigmaParams SigmaParams::random(Eigen::Index width, Eigen::Index hidden, Rng& rng) {
    if (width < 1 || hidden < 1) throw InvalidInput("sigma block needs positive width and hidden size");
    auto p = zeros(width, hidden);
    fill_uniform(p.w1, 1.0 / std::sqrt(static_cast<double>(width)), rng);
    Matrix w2(hidden, 1);
    fill_uniform(w2, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
    p.w2 = w2.col(0);
    return p;
}

std::vector<TensorRef> SigmaParams::tensors(const std::string& prefix) {
    return {view(prefix + ".w1", w1), view(prefix + ".b1", b1), view(prefix + ".w2", w2), view(prefix + ".b2", b2)};
}

SigmaInput make_sigma_input(const Vector& d_i, const Vector& d_j, Eigen::Index width) {
    if (d_i.size() != d_j.size()) throw InvalidInput("sigma input rows differ in length");
    if (d_i.size() > width) throw InvalidInput("distribution row longer than the sigma block width");
    const Eigen::Index n = d_i.size();
    SigmaInput in;
    in.sign.resize(n);
    Vector diff(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double delta = d_i(k) - d_j(k);
        in.sign(k) = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
        diff(k) = std::abs(delta);
    }
    in.from.resize(static_cast<std::size_t>(n));
    std::iota(in.from.begin(), in.from.end(), Eigen::Index{0});
    std::stable_sort(in.from.begin(), in.from.end(), [&](Eigen::Index a, Eigen::Index b) { return diff(a) > diff(b); });
    in.x = Vector::Zero(width);
    for (Eigen::Index r = 0; r < n; ++r) in.x(r) = diff(in.from[static_cast<std::size_t>(r)]);
    return in;
}

SigmaBatch sigma_forward_batch(const SigmaParams& params, Matrix x) {
    if (x.cols() != params.width()) throw InvalidInput("sigma batch input has the wrong width");
    SigmaBatch b;
    b.x = std::move(x);
    b.pre.noalias() = b.x * params.w1.transpose();
    b.pre.rowwise() += params.b1.transpose();
    b.logit.noalias() = b.pre.cwiseMax(0.0) * params.w2;
    b.logit.array() += params.b2;
    b.out = b.logit.unaryExpr([](double z) { return sigmoid(z); });
    return b;
}

Matrix sigma_backward_batch(const SigmaParams& params, const SigmaBatch& batch, const Vector& grad_logit,
                            SigmaParams& grads) {
    const Matrix hidden = batch.pre.cwiseMax(0.0);
    grads.w2.noalias() += hidden.transpose() * grad_logit;
    grads.b2 += grad_logit.sum();
    Matrix g_pre = grad_logit * params.w2.transpose();
    g_pre = g_pre.cwiseProduct((batch.pre.array() > 0.0).cast<double>().matrix());
    grads.w1.noalias() += g_pre.transpose() * batch.x;
    grads.b1.noalias() += g_pre.colwise().sum().transpose();
    return g_pre * params.w1;
}

std::pair<double, SigmaCache> sigma_forward(const SigmaParams& params, const Vector& d_i, const Vector& d_j) {
    SigmaCache cache;
    cache.input = make_sigma_input(d_i, d_j, params.width());
    cache.pre = params.w1 * cache.input.x + params.b1;
    cache.logit = params.w2.dot(cache.pre.cwiseMax(0.0)) + params.b2;
    cache.out = sigmoid(cache.logit);
    cache.revision = params.revision;
    cache.width = params.width();
    return {cache.out, std::move(cache)};
}

SigmaGrads sigma_backward(const SigmaParams& params, const SigmaCache& cache, double upstream) {
    if (cache.revision != params.revision || cache.width != params.width() || cache.pre.size() != params.hidden()) {
        throw InvalidState("sigma_backward: cache was produced with different parameters");
    }
    SigmaGrads g;
    g.params = SigmaParams::zeros(params.width(), params.hidden());
    const double g_logit = upstream * cache.out * (1.0 - cache.out);
    const Vector hidden = cache.pre.cwiseMax(0.0);
    g.params.w2 = g_logit * hidden;
    g.params.b2 = g_logit;
    Vector g_pre = g_logit * params.w2;
    for (Eigen::Index h = 0; h < g_pre.size(); ++h) {
        if (!(cache.pre(h) > 0.0)) g_pre(h) = 0.0;
    }
    g.params.w1 = g_pre * cache.input.x.transpose();
    g.params.b1 = g_pre;
    const Vector g_x = params.w1.transpose() * g_pre;

    const auto n = cache.input.sign.size();
    g.d_i = Vector::Zero(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto k = cache.input.from[static_cast<std::size_t>(r)];
        g.d_i(k) = g_x(r) * cache.input.sign(k);
    }
    g.d_j = -g.d_i;
    return g;
}

// ---------------------------------------------------------------------------

PhiParams PhiParams::zeros(Eigen::Index dim) {
    PhiParams p;
    p.wt = Matrix::Zero(dim, dim);
    p.bt = Vector::Zero(dim);
    p.wg = Matrix::Zero(dim, 2 * dim);
    p.bg = Vector::Zero(dim);
    return p;
}

PhiParams PhiParams::random(Eigen::Index dim, Rng& rng) {
    if (dim < 1) throw InvalidInput("phi block needs a positive dimension");
    auto p = zeros(dim);
    fill_uniform(p.wt, 1.0 / std::sqrt(static_cast<double>(dim)), rng);
    fill_uniform(p.wg, 1.0 / std::sqrt(static_cast<double>(2 * dim)), rng);
    return p;
}

std::vector<TensorRef> PhiParams::tensors(const std::string& prefix) {
    return {view(prefix + ".wt", wt), view(prefix + ".bt", bt), view(prefix + ".wg", wg), view(prefix + ".bg", bg)};
}

std::pair<Vector, PhiCache> phi_forward(const PhiParams& params, const Vector& h, const Vector& f) {
    const Eigen::Index o = params.dim();
    if (h.size() != o || f.size() != o) throw InvalidInput("phi_forward: input dimension mismatch");
    PhiCache c;
    c.h = h;
    c.f = f;
    c.gate = (params.wg.leftCols(o) * h + params.wg.rightCols(o) * f + params.bg).unaryExpr([](double u) {
        return sigmoid(u);
    });
    c.z = (params.wt * h + params.bt).array().tanh().matrix();
    c.mix = c.gate.cwiseProduct(c.z) + (Vector::Ones(o) - c.gate).cwiseProduct(f);
    c.norm = c.mix.norm();
    if (!(c.norm > 0.0) || !std::isfinite(c.norm)) throw NumericalError("phi_forward: gated output has zero norm");
    c.out = c.mix / c.norm;
    c.revision = params.revision;
    c.dim = o;
    Vector out = c.out;
    return {std::move(out), std::move(c)};
}

void phi_backward_into(const PhiParams& params, const PhiCache& c, const Vector& upstream, PhiParams& grads,
                       Vector& grad_h, Vector& grad_f) {
    if (c.revision != params.revision || c.dim != params.dim()) {
        throw InvalidState("phi_backward: cache was produced with different parameters");
    }
    const Eigen::Index o = params.dim();
    if (upstream.size() != o) throw InvalidInput("phi_backward: upstream dimension mismatch");

    // d(mix/|mix|) = (I - out out^T) / |mix|
    const Vector g_mix = (upstream - c.out * c.out.dot(upstream)) / c.norm;
    const Vector g_gate = g_mix.cwiseProduct(c.z - c.f);
    const Vector g_z = g_mix.cwiseProduct(c.gate);
    const Vector g_v = g_z.cwiseProduct((Vector::Ones(o) - c.z.cwiseProduct(c.z)));
    const Vector g_u = g_gate.cwiseProduct(c.gate.cwiseProduct(Vector::Ones(o) - c.gate));

    grads.wt.noalias() += g_v * c.h.transpose();
    grads.bt += g_v;
    grads.wg.leftCols(o).noalias() += g_u * c.h.transpose();
    grads.wg.rightCols(o).noalias() += g_u * c.f.transpose();
    grads.bg += g_u;

    grad_h = params.wt.transpose() * g_v + params.wg.leftCols(o).transpose() * g_u;
    grad_f = g_mix.cwiseProduct(Vector::Ones(o) - c.gate) + params.wg.rightCols(o).transpose() * g_u;
}

PhiGrads phi_backward(const PhiParams& params, const PhiCache& cache, const Vector& upstream) {
    PhiGrads g;
    g.params = PhiParams::zeros(params.dim());
    phi_backward_into(params, cache, upstream, g.params, g.h, g.f);
    return g;
}

// ---------------------------------------------------------------------------

void adam_step(AdamState& state, std::span<TensorRef> params, std::span<const TensorRef> grads) {
    if (params.size() != grads.size()) throw InvalidInput("adam_step: parameter/gradient count mismatch");
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].data.size() != grads[t].data.size()) {
            throw InvalidInput("adam_step: shape mismatch for " + params[t].name);
        }
        for (double g : grads[t].data) {
            if (!std::isfinite(g)) throw NumericalError("adam_step: non-finite gradient in " + grads[t].name);
        }
    }
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.push_back(Vector::Zero(static_cast<Eigen::Index>(p.data.size())));
            state.v.push_back(Vector::Zero(static_cast<Eigen::Index>(p.data.size())));
        }
    }
    if (state.m.size() != params.size()) throw InvalidInput("adam_step: state does not match parameters");

    ++state.step;
    const auto& c = state.cfg;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t t = 0; t < params.size(); ++t) {
        auto& m = state.m[t];
        auto& v = state.v[t];
        auto p = params[t].data;
        auto g = grads[t].data;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            m(kk) = c.beta1 * m(kk) + (1.0 - c.beta1) * g[k];
            v(kk) = c.beta2 * v(kk) + (1.0 - c.beta2) * g[k] * g[k];
            p[k] -= c.lr * (m(kk) / bc1) / (std::sqrt(v(kk) / bc2) + c.eps);
        }
    }
}

} // namespace radnet
