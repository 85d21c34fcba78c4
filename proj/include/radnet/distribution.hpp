#pragma once

#include "radnet/graph.hpp"
#include "radnet/types.hpp"

#include <span>

namespace radnet {

struct DistributionConfig {
    double eta = 0.7;   ///< soft initialization for same-track pairs
    double alpha = 0.5; ///< momentum weight on the previous cycle

    void validate() const;
};

/// Row i is the distribution representation of node i: its identity
/// probability with every node of the graph. Symmetric, unit diagonal.
struct DistributionState {
    Matrix d;
    int cycle = 0;
};

/// Soft initialization: eta for same-track pairs, 1 - eta otherwise, 1 on the diagonal.
DistributionState init_distribution(const MultiModalGraph& graph, double eta);

/// (1 + cos) / 2 clamped to [0, 1].
double intra_modality_prob(const Vector& f_i, const Vector& f_j);

/// Same-modality identity probabilities; entries of cross-modality pairs are 0.
Matrix intra_modality_matrix(const MultiModalGraph& graph, std::span<const Vector> features);

/// Identity probability of two nodes of different modality.
///
/// Same track: 1. Otherwise the bridge set is every node sharing i's modality
/// inside j's track; the result is the mean intra-modality probability from i
/// to those bridges. With no bridge the previous cycle's value carries over.
double cross_modality_prob(const MultiModalGraph& graph, std::size_t i, std::size_t j, const Matrix& intra,
                           const DistributionState& prev);

/// Unsmoothed distribution for one cycle: one-sided probabilities averaged
/// with their transpose, unit diagonal.
Matrix raw_distribution(const MultiModalGraph& graph, std::span<const Vector> features,
                        const DistributionState& prev);

/// alpha * prev + (1 - alpha) * raw, with the cycle counter advanced.
DistributionState compute_distribution(const MultiModalGraph& graph, std::span<const Vector> features,
                                       const DistributionState& prev, const DistributionConfig& cfg);

} // namespace radnet
