#include "radnet/distribution.hpp"

#include "radnet/errors.hpp"

#include <algorithm>
#include <string>

namespace radnet {

void DistributionConfig::validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidInput("eta must lie in [0, 1]");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
}

DistributionState init_distribution(const MultiModalGraph& graph, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidInput("eta must lie in [0, 1]");
    const auto n = static_cast<Eigen::Index>(graph.size());
    if (n == 0) throw InvalidInput("init_distribution: empty graph");
    DistributionState st;
    st.d.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool same = graph.track_id(static_cast<std::size_t>(i)) == graph.track_id(static_cast<std::size_t>(j));
            st.d(i, j) = i == j ? 1.0 : (same ? eta : 1.0 - eta);
        }
    }
    return st;
}

double intra_modality_prob(const Vector& f_i, const Vector& f_j) {
    if (f_i.size() != f_j.size()) throw InvalidInput("intra_modality_prob: dimension mismatch");
    const double ni = f_i.norm();
    const double nj = f_j.norm();
    if (!(ni > 0.0) || !(nj > 0.0)) throw InvalidInput("intra_modality_prob: zero vector");
    return std::clamp((1.0 + f_i.dot(f_j) / (ni * nj)) / 2.0, 0.0, 1.0);
}

Matrix intra_modality_matrix(const MultiModalGraph& graph, std::span<const Vector> features) {
    const std::size_t n = graph.size();
    if (features.size() != n) throw InvalidInput("feature count does not match graph size");
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Modality m : kModalities) {
        const auto& nodes = graph.modality_nodes(m);
        for (std::size_t a = 0; a < nodes.size(); ++a) {
            const auto i = nodes[a];
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
            for (std::size_t b = a + 1; b < nodes.size(); ++b) {
                const auto j = nodes[b];
                const double p = intra_modality_prob(features[i], features[j]);
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p;
                out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = p;
            }
        }
    }
    return out;
}

double cross_modality_prob(const MultiModalGraph& graph, std::size_t i, std::size_t j, const Matrix& intra,
                           const DistributionState& prev) {
    if (graph.modality(i) == graph.modality(j)) {
        throw InvalidInput("cross_modality_prob: nodes " + std::to_string(i) + " and " + std::to_string(j) +
                           " share a modality");
    }
    if (graph.track_edge(i, j)) return 1.0;
    const auto& bridges = graph.group(graph.track_slot(j), graph.modality(i));
    const auto ii = static_cast<Eigen::Index>(i);
    if (bridges.empty()) return prev.d(ii, static_cast<Eigen::Index>(j));
    double sum = 0.0;
    for (auto k : bridges) sum += intra(ii, static_cast<Eigen::Index>(k));
    return sum / static_cast<double>(bridges.size());
}

Matrix raw_distribution(const MultiModalGraph& graph, std::span<const Vector> features,
                        const DistributionState& prev) {
    const auto n = static_cast<Eigen::Index>(graph.size());
    if (prev.d.rows() != n || prev.d.cols() != n) throw InvalidInput("previous distribution has the wrong size");
    const Matrix intra = intra_modality_matrix(graph, features);
    Matrix raw(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto ui = static_cast<std::size_t>(i);
            const auto uj = static_cast<std::size_t>(j);
            if (graph.modality(ui) == graph.modality(uj)) {
                raw(i, j) = intra(i, j);
            } else {
                raw(i, j) = cross_modality_prob(graph, ui, uj, intra, prev);
            }
        }
    }
    Matrix sym = 0.5 * (raw + raw.transpose());
    sym.diagonal().setOnes();
    return sym;
}

DistributionState compute_distribution(const MultiModalGraph& graph, std::span<const Vector> features,
                                       const DistributionState& prev, const DistributionConfig& cfg) {
    cfg.validate();
    const Matrix raw = raw_distribution(graph, features, prev);
    DistributionState out;
    out.d = cfg.alpha * prev.d + (1.0 - cfg.alpha) * raw;
    out.cycle = prev.cycle + 1;
    return out;
}

} // namespace radnet
