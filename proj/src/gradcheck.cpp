#include "radnet/gradcheck.hpp"

#include "radnet/graph.hpp"
#include "radnet/neural.hpp"
#include "radnet/rng.hpp"
#include "radnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace radnet {

bool GradCheckReport::passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.passed(); });
}

namespace {

constexpr double kStep = 1e-6;

double mixed_error(double a, double n) { return std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)}); }

double central(double& x, const std::function<double()>& f) {
    const double saved = x;
    x = saved + kStep;
    const double up = f();
    x = saved - kStep;
    const double down = f();
    x = saved;
    return (up - down) / (2.0 * kStep);
}

Vector random_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
    Vector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.uniform(lo, hi);
    return v;
}

// Compares every entry of `analytic` with finite differences over `params`.
double compare(std::vector<TensorRef> params, const std::vector<TensorRef>& analytic, const std::function<double()>& f,
               double corrupt) {
    double worst = 0.0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t k = 0; k < params[t].data.size(); ++k) {
            const double n = central(params[t].data[k], f);
            worst = std::max(worst, mixed_error(analytic[t].data[k] * corrupt, n));
        }
    }
    return worst;
}

GradCheckEntry check_sigma(std::uint64_t seed, double corrupt) {
    GradCheckEntry e{"sigma block", 24, 0.0, 1e-5};
    for (int draw = 0; draw < e.draws; ++draw) {
        Rng rng(derive_seed(seed, "gradcheck-sigma", static_cast<std::uint64_t>(draw)));
        const Eigen::Index n = 3 + draw % 5;
        auto params = SigmaParams::random(n + 2, 6, rng);
        params.b1 = random_vector(rng, 6, -0.3, 0.3);
        params.b2 = rng.uniform(-0.5, 0.5);
        Vector di = random_vector(rng, n, 0.0, 1.0);
        Vector dj = random_vector(rng, n, 0.0, 1.0);
        const auto f = [&] { return sigma_forward(params, di, dj).first; };
        const auto [out, cache] = sigma_forward(params, di, dj);
        auto g = sigma_backward(params, cache, 1.0);
        std::vector<TensorRef> analytic = g.params.tensors("g");
        analytic.push_back({"di", n, 1, std::span<double>(g.d_i.data(), static_cast<std::size_t>(n))});
        analytic.push_back({"dj", n, 1, std::span<double>(g.d_j.data(), static_cast<std::size_t>(n))});
        auto live = params.tensors("p");
        live.push_back({"di", n, 1, std::span<double>(di.data(), static_cast<std::size_t>(n))});
        live.push_back({"dj", n, 1, std::span<double>(dj.data(), static_cast<std::size_t>(n))});
        e.max_error = std::max(e.max_error, compare(live, analytic, f, corrupt));
    }
    return e;
}

GradCheckEntry check_phi(std::uint64_t seed, double corrupt) {
    GradCheckEntry e{"feature block", 24, 0.0, 1e-5};
    for (int draw = 0; draw < e.draws; ++draw) {
        Rng rng(derive_seed(seed, "gradcheck-phi", static_cast<std::uint64_t>(draw)));
        const Eigen::Index dim = 2 + draw % 5;
        auto params = PhiParams::random(dim, rng);
        params.bt = random_vector(rng, dim, -0.3, 0.3);
        params.bg = random_vector(rng, dim, -0.3, 0.3);
        Vector h = random_vector(rng, dim, -1.0, 1.0);
        Vector x = random_vector(rng, dim, -1.0, 1.0);
        const Vector r = random_vector(rng, dim, -1.0, 1.0);
        const auto f = [&] { return r.dot(phi_forward(params, h, x).first); };
        const auto [out, cache] = phi_forward(params, h, x);
        auto g = phi_backward(params, cache, r);
        std::vector<TensorRef> analytic = g.params.tensors("g");
        analytic.push_back({"h", dim, 1, std::span<double>(g.h.data(), static_cast<std::size_t>(dim))});
        analytic.push_back({"f", dim, 1, std::span<double>(g.f.data(), static_cast<std::size_t>(dim))});
        auto live = params.tensors("p");
        live.push_back({"h", dim, 1, std::span<double>(h.data(), static_cast<std::size_t>(dim))});
        live.push_back({"f", dim, 1, std::span<double>(x.data(), static_cast<std::size_t>(dim))});
        e.max_error = std::max(e.max_error, compare(live, analytic, f, corrupt));
    }
    return e;
}

// Six clues over three tracks and two identities, with every kind of edge
// and a cross-modality pair that has no bridge.
MultiModalGraph toy_graph(std::uint64_t seed, int dim) {
    Rng rng(derive_seed(seed, "gradcheck-toy"));
    struct Spec {
        int track;
        Modality m;
        int identity;
    };
    const Spec specs[] = {{0, Modality::face, 0}, {0, Modality::body, 0}, {0, Modality::voice, 0},
                          {1, Modality::face, 0}, {1, Modality::face, 0}, {2, Modality::body, 1}};
    std::vector<Clue> nodes;
    int id = 0;
    for (const auto& s : specs) {
        Clue c;
        c.clue_id = id++;
        c.track_id = s.track;
        c.modality = s.m;
        c.identity = s.identity;
        c.feature = normalized(random_vector(rng, dim, -1.0, 1.0));
        nodes.push_back(std::move(c));
    }
    return MultiModalGraph(std::move(nodes), 0);
}

GradCheckEntry check_model(std::uint64_t seed, Mode mode, int cycles, bool unroll, double corrupt) {
    const int dim = 4;
    const auto graph = toy_graph(seed, dim);
    ModelShape shape;
    shape.width = static_cast<int>(graph.size()) + 1;
    shape.hidden = 5;
    shape.cycles = cycles;
    shape.dims = {dim, dim, dim};
    shape.mode = mode;
    Model model = Model::create(shape, derive_seed(seed, "gradcheck-model"));
    // Biases start at zero, which parks the diagonal similarity row on the
    // ReLU kink; move them off it.
    Rng rng(derive_seed(seed, "gradcheck-bias"));
    for (auto& t : model.tensors()) {
        if (t.cols != 1) continue;
        const auto dot = t.name.rfind('.');
        if (t.name.compare(dot + 1, 1, "b") != 0) continue;
        for (double& v : t.data) v = rng.uniform(-0.3, 0.3);
    }
    TrainerConfig cfg;
    cfg.cycles = cycles;
    cfg.mode = mode;
    cfg.full_unroll = unroll;
    cfg.hidden = shape.hidden;
    DistributionConfig dist;

    Model grads = Model::zeros(shape);
    loss_and_gradient(graph, model, dist, cfg, &grads);
    const auto f = [&] { return loss_and_gradient(graph, model, dist, cfg, nullptr).total; };

    std::string name = "loss, " + std::string(to_string(mode)) + ", " + std::to_string(cycles) + " cycles";
    if (unroll) name += ", unrolled";
    GradCheckEntry e{name, 1, 0.0, 1e-4};
    e.max_error = compare(model.tensors(), grads.tensors(), f, corrupt);
    return e;
}

} // namespace

GradCheckReport run_gradcheck(std::uint64_t seed, bool corrupt_backward) {
    const double corrupt = corrupt_backward ? 1.05 : 1.0;
    GradCheckReport r;
    r.entries.push_back(check_sigma(seed, corrupt));
    r.entries.push_back(check_phi(seed, corrupt));
    r.entries.push_back(check_model(seed, Mode::full, 2, false, corrupt));
    r.entries.push_back(check_model(seed, Mode::feature_only, 2, false, corrupt));
    r.entries.push_back(check_model(seed, Mode::distribution_only, 2, false, corrupt));
    r.entries.push_back(check_model(seed, Mode::full, 3, true, corrupt));
    return r;
}

} // namespace radnet
