#include "radnet/trainer.hpp"

#include "radnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

namespace radnet {

std::string_view to_string(Mode m) {
    switch (m) {
    case Mode::full: return "full";
    case Mode::feature_only: return "feature-only";
    case Mode::distribution_only: return "distribution-only";
    }
    throw InvalidInput("unknown mode");
}

Mode parse_mode(std::string_view name) {
    if (name == "full") return Mode::full;
    if (name == "feature-only") return Mode::feature_only;
    if (name == "distribution-only") return Mode::distribution_only;
    throw InvalidInput("unknown mode '" + std::string(name) + "'");
}

void ModelShape::validate() const {
    if (cycles < 1) throw InvalidInput("model needs at least one cycle");
    if (hidden < 1) throw InvalidInput("hidden width must be positive");
    if (width < 1) throw InvalidInput("graph width must be positive");
    for (int d : dims) {
        if (d < 0) throw InvalidInput("negative feature dimension");
    }
}

Model Model::zeros(const ModelShape& shape) {
    shape.validate();
    Model m;
    m.shape = shape;
    for (int l = 0; l < shape.cycles; ++l) {
        if (m.uses_sigma()) m.sigma.push_back(SigmaParams::zeros(shape.width, shape.hidden));
        std::array<PhiParams, kModalityCount> phi;
        if (m.uses_phi()) {
            for (Modality mod : kModalities) {
                if (shape.dims[index_of(mod)] > 0) phi[index_of(mod)] = PhiParams::zeros(shape.dims[index_of(mod)]);
            }
        }
        m.phi.push_back(std::move(phi));
    }
    return m;
}

Model Model::create(const ModelShape& shape, std::uint64_t seed) {
    Model m = zeros(shape);
    for (int l = 0; l < shape.cycles; ++l) {
        if (m.uses_sigma()) {
            Rng rng(derive_seed(seed, "sigma", static_cast<std::uint64_t>(l)));
            m.sigma[static_cast<std::size_t>(l)] = SigmaParams::random(shape.width, shape.hidden, rng);
        }
        if (m.uses_phi()) {
            for (Modality mod : kModalities) {
                const int d = shape.dims[index_of(mod)];
                if (d == 0) continue;
                Rng rng(derive_seed(seed, "phi", static_cast<std::uint64_t>(l * 3) + index_of(mod)));
                m.phi[static_cast<std::size_t>(l)][index_of(mod)] = PhiParams::random(d, rng);
            }
        }
    }
    return m;
}

std::vector<TensorRef> Model::tensors() {
    std::vector<TensorRef> out;
    for (std::size_t l = 0; l < phi.size(); ++l) {
        const std::string cyc = "cycle" + std::to_string(l);
        if (uses_sigma()) {
            for (auto& t : sigma[l].tensors(cyc + ".sigma")) out.push_back(std::move(t));
        }
        if (uses_phi()) {
            for (Modality mod : kModalities) {
                auto& p = phi[l][index_of(mod)];
                if (p.empty()) continue;
                for (auto& t : p.tensors(cyc + ".phi." + std::string(to_string(mod)))) out.push_back(std::move(t));
            }
        }
    }
    return out;
}

void Model::bump_revision() {
    for (auto& s : sigma) ++s.revision;
    for (auto& cyc : phi) {
        for (auto& p : cyc) ++p.revision;
    }
}

std::vector<double> TrainerConfig::default_mu(int cycles) {
    std::vector<double> mu(static_cast<std::size_t>(std::max(cycles, 0)), 0.2);
    if (!mu.empty()) mu.back() = 1.0;
    return mu;
}

std::vector<double> TrainerConfig::mu_f_or_default() const { return mu_f.empty() ? default_mu(cycles) : mu_f; }
std::vector<double> TrainerConfig::mu_d_or_default() const { return mu_d.empty() ? default_mu(cycles) : mu_d; }

void TrainerConfig::validate() const {
    if (cycles < 1) throw InvalidInput("trainer: cycles must be >= 1");
    if (lambda_f < 0.0 || lambda_d < 0.0) throw InvalidInput("trainer: loss weights must be >= 0");
    for (const auto* mu : {&mu_f, &mu_d}) {
        if (!mu->empty() && mu->size() != static_cast<std::size_t>(cycles)) {
            throw InvalidInput("trainer: per-cycle weights must have one entry per cycle");
        }
        for (double w : *mu) {
            if (w < 0.0) throw InvalidInput("trainer: per-cycle weights must be >= 0");
        }
    }
    if (batch < 1) throw InvalidInput("trainer: batch must be >= 1");
    if (iterations < 0) throw InvalidInput("trainer: iterations must be >= 0");
    if (!(lr > 0.0)) throw InvalidInput("trainer: learning rate must be positive");
    if (hidden < 1) throw InvalidInput("trainer: hidden width must be positive");
}

Matrix label_matrix(const MultiModalGraph& graph) {
    const auto n = static_cast<Eigen::Index>(graph.size());
    Matrix y(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& a = graph.node(static_cast<std::size_t>(i)).identity;
        if (!a) throw InvalidInput("node " + std::to_string(i) + " has no identity label");
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& b = graph.node(static_cast<std::size_t>(j)).identity;
            if (!b) throw InvalidInput("node " + std::to_string(j) + " has no identity label");
            y(i, j) = *a == *b ? 1.0 : 0.0;
        }
    }
    return y;
}

double bce(double y, double p) {
    const double q = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
    return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double bce_logit(double y, double z) {
    return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

namespace {

using Index = Eigen::Index;

/// d BCE / dp, zero where the clamp is active.
double bce_grad(double y, double p) {
    if (p <= kBceClamp || p >= 1.0 - kBceClamp) return 0.0;
    return (p - y) / (p * (1.0 - p));
}

double feature_sim(const Vector& a, const Vector& b) { return (1.0 + a.dot(b)) / 2.0; }

/// Similarity-block evaluation over every unordered pair plus one shared
/// row for the diagonal (input all zeros).
struct SigmaPass {
    std::vector<std::pair<Index, Index>> pairs; ///< pairs.size() == rows - 1
    std::vector<Index> from;                    ///< rows-1 blocks of n slots
    Matrix sign;                                ///< (rows-1) x n
    SigmaBatch batch;
};

SigmaPass sigma_pass(const SigmaParams& sigma, const Matrix& d, Matrix& affinity, Matrix* logits = nullptr) {
    const Index n = d.rows();
    if (n > sigma.width()) {
        throw InvalidInput("graph has " + std::to_string(n) + " nodes but the similarity block accepts at most " +
                           std::to_string(sigma.width()));
    }
    SigmaPass pass;
    const Index rows = n * (n - 1) / 2 + 1;
    pass.pairs.reserve(static_cast<std::size_t>(rows - 1));
    pass.from.resize(static_cast<std::size_t>((rows - 1) * n));
    pass.sign.resize(rows - 1, n);
    Matrix x = Matrix::Zero(rows, sigma.width());
    std::vector<double> diff(static_cast<std::size_t>(n));
    Index r = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j, ++r) {
            pass.pairs.emplace_back(i, j);
            for (Index k = 0; k < n; ++k) {
                const double delta = d(i, k) - d(j, k);
                pass.sign(r, k) = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
                diff[static_cast<std::size_t>(k)] = std::abs(delta);
            }
            auto first = pass.from.begin() + r * n;
            std::iota(first, first + n, Index{0});
            std::stable_sort(first, first + n, [&](Index a, Index b) {
                return diff[static_cast<std::size_t>(a)] > diff[static_cast<std::size_t>(b)];
            });
            for (Index s = 0; s < n; ++s) x(r, s) = diff[static_cast<std::size_t>(first[s])];
        }
    }
    pass.batch = sigma_forward_batch(sigma, std::move(x));
    affinity.resize(n, n);
    for (std::size_t p = 0; p < pass.pairs.size(); ++p) {
        const auto [i, j] = pass.pairs[p];
        affinity(i, j) = affinity(j, i) = pass.batch.out(static_cast<Index>(p));
    }
    affinity.diagonal().setConstant(pass.batch.out(rows - 1));
    if (logits) {
        logits->resize(n, n);
        for (std::size_t p = 0; p < pass.pairs.size(); ++p) {
            const auto [i, j] = pass.pairs[p];
            (*logits)(i, j) = (*logits)(j, i) = pass.batch.logit(static_cast<Index>(p));
        }
        logits->diagonal().setConstant(pass.batch.logit(rows - 1));
    }
    return pass;
}

Matrix feature_affinity(const MultiModalGraph& graph, std::span<const Vector> features) {
    const auto n = static_cast<Index>(graph.size());
    Matrix a = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    for (Modality m : kModalities) {
        const auto& nodes = graph.modality_nodes(m);
        for (auto i : nodes) {
            for (auto j : nodes) {
                a(static_cast<Index>(i), static_cast<Index>(j)) = std::clamp(feature_sim(features[i], features[j]), 0.0, 1.0);
            }
        }
    }
    return a;
}

struct AggregationPass {
    std::vector<std::vector<double>> weights; ///< per node, over modality_nodes(m(i))
    std::vector<double> norm;                 ///< per node: sum of raw affinities
    std::vector<PhiCache> phi;
};

AggregationPass aggregate(const MultiModalGraph& graph, const Matrix& affinity, std::span<const Vector> features,
                          const std::array<PhiParams, kModalityCount>& phi, std::vector<Vector>& out) {
    const std::size_t n = graph.size();
    AggregationPass pass;
    pass.weights.resize(n);
    pass.norm.resize(n);
    pass.phi.resize(n);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& params = phi[index_of(graph.modality(i))];
        if (params.empty()) throw InvalidInput("no feature block for modality " + std::string(to_string(graph.modality(i))));
        const auto& nbrs = graph.modality_nodes(graph.modality(i));
        double s = 0.0;
        for (auto j : nbrs) s += affinity(static_cast<Index>(i), static_cast<Index>(j));
        if (!(s > 0.0)) throw NumericalError("aggregation weights sum to zero at node " + std::to_string(i));
        auto& w = pass.weights[i];
        w.resize(nbrs.size());
        Vector h = Vector::Zero(features[i].size());
        for (std::size_t t = 0; t < nbrs.size(); ++t) {
            w[t] = affinity(static_cast<Index>(i), static_cast<Index>(nbrs[t])) / s;
            h += w[t] * features[nbrs[t]];
        }
        pass.norm[i] = s;
        auto [o, cache] = phi_forward(params, h, features[i]);
        out[i] = std::move(o);
        pass.phi[i] = std::move(cache);
    }
    return pass;
}

struct Unrolled {
    CycleTrace trace;
    std::vector<std::optional<SigmaPass>> sigma;   ///< index l = cycle, [0] unused
    std::vector<std::optional<AggregationPass>> agg;
};

Unrolled forward(const MultiModalGraph& graph, const Model& model, const DistributionConfig& dist) {
    dist.validate();
    const auto& shape = model.shape;
    if (graph.size() == 0) throw InvalidInput("empty graph");
    if (static_cast<int>(graph.size()) > shape.width) {
        throw InvalidInput("graph has " + std::to_string(graph.size()) + " nodes; model width is " +
                           std::to_string(shape.width));
    }
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const int want = shape.dims[index_of(graph.modality(i))];
        if (want != 0 && graph.node(i).feature.size() != want) {
            throw InvalidInput("node " + std::to_string(i) + " feature dimension does not match the model");
        }
    }

    Unrolled u;
    const int cycles = shape.cycles;
    u.sigma.resize(static_cast<std::size_t>(cycles) + 1);
    u.agg.resize(static_cast<std::size_t>(cycles) + 1);
    auto& states = u.trace.cycles;
    states.resize(static_cast<std::size_t>(cycles) + 1);
    states[0].features = graph.features();
    if (shape.mode != Mode::feature_only) states[0].dist = init_distribution(graph, dist.eta);

    for (int l = 1; l <= cycles; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        auto& prev = states[lu - 1];
        auto& cur = states[lu];
        if (shape.mode == Mode::feature_only) {
            cur.affinity = feature_affinity(graph, prev.features);
            cur.dist.cycle = l;
        } else {
            cur.dist = compute_distribution(graph, prev.features, prev.dist, dist);
            u.sigma[lu] = sigma_pass(model.sigma[lu - 1], cur.dist.d, cur.affinity, &cur.logits);
        }
        if (shape.mode == Mode::distribution_only) {
            cur.features = prev.features;
        } else {
            u.agg[lu] = aggregate(graph, cur.affinity, prev.features, model.phi[lu - 1], cur.features);
        }
    }
    u.trace.final_affinity =
        shape.mode == Mode::feature_only ? feature_affinity(graph, states.back().features) : states.back().affinity;
    return u;
}

} // namespace

Matrix build_affinity(const SigmaParams& sigma, const DistributionState& dist) {
    if (dist.d.rows() != dist.d.cols()) throw InvalidInput("distribution matrix must be square");
    Matrix a;
    sigma_pass(sigma, dist.d, a);
    return a;
}

std::vector<Vector> aggregate_features(const MultiModalGraph& graph, const Matrix& affinity,
                                       std::span<const Vector> features,
                                       const std::array<PhiParams, kModalityCount>& phi) {
    const auto n = static_cast<Index>(graph.size());
    if (affinity.rows() != n || affinity.cols() != n || features.size() != graph.size()) {
        throw InvalidInput("aggregate_features: shape mismatch");
    }
    std::vector<Vector> out;
    aggregate(graph, affinity, features, phi, out);
    return out;
}

double feature_loss(const MultiModalGraph& graph, const CycleTrace& trace, const Matrix& labels,
                    std::span<const double> mu_f) {
    const int cycles = trace.generations();
    if (mu_f.size() != static_cast<std::size_t>(cycles)) throw InvalidInput("feature_loss: one weight per cycle");
    double loss = 0.0;
    for (int l = 1; l <= cycles; ++l) {
        const auto& f = trace.cycles[static_cast<std::size_t>(l)].features;
        const double mu = mu_f[static_cast<std::size_t>(l - 1)];
        for (Modality m : kModalities) {
            const auto& nodes = graph.modality_nodes(m);
            for (std::size_t a = 0; a < nodes.size(); ++a) {
                for (std::size_t b = a + 1; b < nodes.size(); ++b) {
                    const auto i = nodes[a];
                    const auto j = nodes[b];
                    loss += mu * bce(labels(static_cast<Index>(i), static_cast<Index>(j)), feature_sim(f[i], f[j]));
                }
            }
        }
    }
    return loss;
}

double distribution_loss(const MultiModalGraph& graph, const CycleTrace& trace, const Matrix& labels,
                         std::span<const double> mu_d) {
    const int cycles = trace.generations();
    if (mu_d.size() != static_cast<std::size_t>(cycles)) throw InvalidInput("distribution_loss: one weight per cycle");
    const auto n = static_cast<Index>(graph.size());
    double loss = 0.0;
    for (int l = 1; l <= cycles; ++l) {
        const auto& state = trace.cycles[static_cast<std::size_t>(l)];
        const double mu = mu_d[static_cast<std::size_t>(l - 1)];
        const bool have_logits = state.logits.rows() == n;
        for (Index i = 0; i < n; ++i) {
            for (Index j = i + 1; j < n; ++j) {
                loss += mu * (have_logits ? bce_logit(labels(i, j), state.logits(i, j))
                                          : bce(labels(i, j), state.affinity(i, j)));
            }
        }
    }
    return loss;
}

CycleTrace run_inference(const MultiModalGraph& graph, const Model& model, const DistributionConfig& dist) {
    return forward(graph, model, dist).trace;
}

LossBreakdown loss_and_gradient(const MultiModalGraph& graph, const Model& model, const DistributionConfig& dist,
                                const TrainerConfig& cfg, Model* grads) {
    if (cfg.cycles != model.shape.cycles) throw InvalidInput("trainer cycles differ from the model's");
    const Matrix y = label_matrix(graph);
    const auto mu_f = cfg.mu_f_or_default();
    const auto mu_d = cfg.mu_d_or_default();
    Unrolled u = forward(graph, model, dist);
    const auto& states = u.trace.cycles;
    const Mode mode = model.shape.mode;

    LossBreakdown loss;
    loss.feature = feature_loss(graph, u.trace, y, mu_f);
    if (mode != Mode::feature_only) loss.distribution = distribution_loss(graph, u.trace, y, mu_d);
    loss.total = cfg.lambda_f * loss.feature + (mode != Mode::feature_only ? cfg.lambda_d * loss.distribution : 0.0);
    if (grads == nullptr) return loss;

    const std::size_t n = graph.size();
    const auto ni = static_cast<Index>(n);
    const int cycles = model.shape.cycles;
    const double alpha = dist.alpha;

    // g_feat[l][i] = dL/dF^l_i, g_dist[l] = dL/dd^l (only with full unrolling across cycles).
    std::vector<std::vector<Vector>> g_feat(static_cast<std::size_t>(cycles) + 1);
    for (auto& g : g_feat) {
        g.resize(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = Vector::Zero(states[0].features[i].size());
    }
    std::vector<Matrix> g_dist(static_cast<std::size_t>(cycles) + 1, Matrix::Zero(ni, ni));

    const auto add_sim_grad = [&](std::vector<Vector>& g, const std::vector<Vector>& f, std::size_t i, std::size_t j,
                                  double coeff) {
        // d/dF_i of (1 + F_i . F_j) / 2
        g[i] += 0.5 * coeff * f[j];
        g[j] += 0.5 * coeff * f[i];
    };

    for (int l = cycles; l >= 1; --l) {
        const auto lu = static_cast<std::size_t>(l);
        const auto& cur = states[lu];
        const auto& prev = states[lu - 1];
        auto& gf_cur = g_feat[lu];
        auto& gf_prev = g_feat[lu - 1];

        // Feature loss at cycle l.
        const double wf = cfg.lambda_f * mu_f[lu - 1];
        for (Modality m : kModalities) {
            const auto& nodes = graph.modality_nodes(m);
            for (std::size_t a = 0; a < nodes.size(); ++a) {
                for (std::size_t b = a + 1; b < nodes.size(); ++b) {
                    const auto i = nodes[a];
                    const auto j = nodes[b];
                    const double g = bce_grad(y(static_cast<Index>(i), static_cast<Index>(j)),
                                              feature_sim(cur.features[i], cur.features[j]));
                    if (g != 0.0) add_sim_grad(gf_cur, cur.features, i, j, wf * g);
                }
            }
        }

        // Aggregation and feature blocks.
        Matrix g_aff = Matrix::Zero(ni, ni);
        if (mode != Mode::distribution_only) {
            const auto& agg = *u.agg[lu];
            auto& phi_grads = grads->phi[lu - 1];
            Vector gh;
            Vector gfi;
            for (std::size_t i = 0; i < n; ++i) {
                const Modality m = graph.modality(i);
                phi_backward_into(model.phi[lu - 1][index_of(m)], agg.phi[i], gf_cur[i], phi_grads[index_of(m)], gh, gfi);
                gf_prev[i] += gfi;
                const auto& nbrs = graph.modality_nodes(m);
                const auto& w = agg.weights[i];
                std::vector<double> gw(nbrs.size());
                double mean = 0.0;
                for (std::size_t t = 0; t < nbrs.size(); ++t) {
                    gf_prev[nbrs[t]] += w[t] * gh;
                    gw[t] = gh.dot(prev.features[nbrs[t]]);
                    mean += w[t] * gw[t];
                }
                for (std::size_t t = 0; t < nbrs.size(); ++t) {
                    g_aff(static_cast<Index>(i), static_cast<Index>(nbrs[t])) += (gw[t] - mean) / agg.norm[i];
                }
            }
        }

        if (mode == Mode::feature_only) {
            // A^l(i, j) = (1 + F^{l-1}_i . F^{l-1}_j) / 2 on same-modality pairs.
            for (Modality m : kModalities) {
                const auto& nodes = graph.modality_nodes(m);
                for (std::size_t a = 0; a < nodes.size(); ++a) {
                    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
                        const auto i = nodes[a];
                        const auto j = nodes[b];
                        const double g = g_aff(static_cast<Index>(i), static_cast<Index>(j)) +
                                         g_aff(static_cast<Index>(j), static_cast<Index>(i));
                        if (g != 0.0) add_sim_grad(gf_prev, prev.features, i, j, g);
                    }
                }
            }
            continue;
        }

        // Similarity block: loss on A^l plus gradients arriving from aggregation.
        const auto& pass = *u.sigma[lu];
        const Index rows = pass.batch.out.size();
        Vector g_logit(rows);
        const double wd = cfg.lambda_d * mu_d[lu - 1];
        for (std::size_t p = 0; p < pass.pairs.size(); ++p) {
            const auto [i, j] = pass.pairs[p];
            const double a = pass.batch.out(static_cast<Index>(p));
            const double from_agg = (g_aff(i, j) + g_aff(j, i)) * a * (1.0 - a);
            const double from_loss = wd * (a - y(i, j));
            g_logit(static_cast<Index>(p)) = from_agg + from_loss;
        }
        {
            const double a0 = pass.batch.out(rows - 1);
            g_logit(rows - 1) = g_aff.diagonal().sum() * a0 * (1.0 - a0);
        }
        const Matrix g_x = sigma_backward_batch(model.sigma[lu - 1], pass.batch, g_logit, grads->sigma[lu - 1]);

        if (mode == Mode::distribution_only) continue; // distributions are constants here

        Matrix& gd = g_dist[lu];
        for (std::size_t p = 0; p < pass.pairs.size(); ++p) {
            const auto [i, j] = pass.pairs[p];
            const auto r = static_cast<Index>(p);
            const auto first = pass.from.begin() + r * ni;
            for (Index s = 0; s < ni; ++s) {
                const Index k = first[s];
                const double g = g_x(r, s) * pass.sign(r, k);
                gd(i, k) += g;
                gd(j, k) -= g;
            }
        }

        // d^l = alpha d^{l-1} + (1 - alpha) sym(raw^l)
        if (cfg.full_unroll) g_dist[lu - 1] += alpha * gd;
        Matrix g_raw = 0.5 * (1.0 - alpha) * (gd + gd.transpose());
        g_raw.diagonal().setZero();

        Matrix g_intra = Matrix::Zero(ni, ni);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double g = g_raw(static_cast<Index>(i), static_cast<Index>(j));
                if (g == 0.0) continue;
                if (graph.modality(i) == graph.modality(j)) {
                    g_intra(static_cast<Index>(i), static_cast<Index>(j)) += g;
                } else if (!graph.track_edge(i, j)) {
                    const auto& bridges = graph.group(graph.track_slot(j), graph.modality(i));
                    if (bridges.empty()) {
                        if (cfg.full_unroll) g_dist[lu - 1](static_cast<Index>(i), static_cast<Index>(j)) += g;
                    } else {
                        const double share = g / static_cast<double>(bridges.size());
                        for (auto k : bridges) g_intra(static_cast<Index>(i), static_cast<Index>(k)) += share;
                    }
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                const double g = g_intra(static_cast<Index>(i), static_cast<Index>(k));
                if (g != 0.0) add_sim_grad(gf_prev, prev.features, i, k, g);
            }
        }
    }
    return loss;
}

LossBreakdown train_iteration(std::span<const MultiModalGraph> batch, Model& model, AdamState& optimizer,
                              const DistributionConfig& dist, const TrainerConfig& cfg) {
    cfg.validate();
    Model grads = Model::zeros(model.shape);
    LossBreakdown sum;
    for (const auto& g : batch) {
        LossBreakdown l;
        try {
            l = loss_and_gradient(g, model, dist, cfg, &grads);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (graph of pivot track " + std::to_string(g.pivot_track_id()) + ")");
        }
        if (!std::isfinite(l.total)) {
            throw NumericalError("non-finite loss on the graph of pivot track " + std::to_string(g.pivot_track_id()));
        }
        sum.total += l.total;
        sum.feature += l.feature;
        sum.distribution += l.distribution;
    }
    auto params = model.tensors();
    const auto gt = grads.tensors();
    adam_step(optimizer, params, gt);
    model.bump_revision();
    return sum;
}

} // namespace radnet
