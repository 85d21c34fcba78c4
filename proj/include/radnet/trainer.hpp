#pragma once

#include "radnet/distribution.hpp"
#include "radnet/graph.hpp"
#include "radnet/neural.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace radnet {

/// full: the complete cyclic model. feature_only: affinities are feature
/// similarities and no distribution is built. distribution_only: features
/// stay at their input values and only the similarity blocks learn.
enum class Mode { full, feature_only, distribution_only };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view name);

struct ModelShape {
    int width = 0;  ///< maximum nodes per graph (similarity-block input width)
    int hidden = 64;
    int cycles = 2;
    std::array<int, kModalityCount> dims{0, 0, 0}; ///< 0 = modality absent
    Mode mode = Mode::full;

    void validate() const;
};

/// All learnable blocks: one similarity block per cycle and one feature
/// block per (cycle, modality).
struct Model {
    ModelShape shape;
    std::vector<SigmaParams> sigma;
    std::vector<std::array<PhiParams, kModalityCount>> phi;

    static Model create(const ModelShape& shape, std::uint64_t seed);
    static Model zeros(const ModelShape& shape);

    bool uses_sigma() const { return shape.mode != Mode::feature_only; }
    bool uses_phi() const { return shape.mode != Mode::distribution_only; }

    /// Parameter tensors in a fixed order: per cycle, sigma then phi by modality.
    std::vector<TensorRef> tensors();
    void bump_revision();
};

struct TrainerConfig {
    int cycles = 2;
    double lambda_f = 1.0;
    double lambda_d = 0.2;
    std::vector<double> mu_f; ///< per cycle; empty selects the default schedule
    std::vector<double> mu_d;
    int batch = 2;
    int iterations = 2000;
    double lr = 1e-3;
    double lr_decay = 0.1;
    double decay_at = 0.8; ///< fraction of iterations after which lr is multiplied by lr_decay
    int hidden = 64;
    bool full_unroll = false; ///< also backpropagate through the momentum's previous-cycle term
    Mode mode = Mode::full;
    std::uint64_t seed = 7;

    /// 0.2 for every cycle but the last, 1.0 for the last.
    static std::vector<double> default_mu(int cycles);
    std::vector<double> mu_f_or_default() const;
    std::vector<double> mu_d_or_default() const;
    void validate() const;
};

/// Cycle 0 holds the input features and the soft-initialized distribution
/// (affinity empty). Cycle l >= 1 holds F^l, d^l and A^l.
struct CycleState {
    std::vector<Vector> features;
    DistributionState dist;
    Matrix affinity;
    Matrix logits; ///< pre-sigmoid affinities; empty when no similarity block ran
};

struct CycleTrace {
    std::vector<CycleState> cycles;
    /// Affinity used for clustering; NaN marks pairs without evidence
    /// (cross-modality pairs in feature-only mode).
    Matrix final_affinity;

    int generations() const { return static_cast<int>(cycles.size()) - 1; }
};

/// y(i, j) = 1 iff both nodes carry the same identity. Throws InvalidInput on unlabeled nodes.
Matrix label_matrix(const MultiModalGraph& graph);

/// A(i, j) = sigma(d_i, d_j) over all pairs, computed once per unordered pair.
Matrix build_affinity(const SigmaParams& sigma, const DistributionState& dist);

/// For each node: neighbours are same-modality nodes plus itself, weighted by
/// row-normalized affinity; the weighted mean and the node's own feature feed
/// its modality's feature block.
std::vector<Vector> aggregate_features(const MultiModalGraph& graph, const Matrix& affinity,
                                       std::span<const Vector> features,
                                       const std::array<PhiParams, kModalityCount>& phi);

inline constexpr double kBceClamp = 1e-6;

double bce(double y, double p);

/// BCE(y, sigmoid(z)) evaluated from the logit, stable for any z.
double bce_logit(double y, double z);

/// Sum over cycles and same-modality pairs i < j of mu_f[l] * BCE(y, (1 + cos) / 2).
double feature_loss(const MultiModalGraph& graph, const CycleTrace& trace, const Matrix& labels,
                    std::span<const double> mu_f);

/// Sum over cycles and all pairs i < j of mu_d[l] * BCE(y, a), taken from the
/// logits so that saturated affinities keep their gradient.
double distribution_loss(const MultiModalGraph& graph, const CycleTrace& trace, const Matrix& labels,
                         std::span<const double> mu_d);

/// The L-cycle forward pass.
CycleTrace run_inference(const MultiModalGraph& graph, const Model& model, const DistributionConfig& dist);

struct LossBreakdown {
    double total = 0.0;
    double feature = 0.0;
    double distribution = 0.0;
};

/// Loss of one labeled graph and, when `grads` is non-null, its exact gradient
/// accumulated into `grads` (same shape as `model`).
LossBreakdown loss_and_gradient(const MultiModalGraph& graph, const Model& model, const DistributionConfig& dist,
                                const TrainerConfig& cfg, Model* grads);

/// One optimization step over a batch of labeled graphs: summed loss and
/// gradient, then a single Adam update. Throws NumericalError naming the
/// pivot track of a graph whose loss is not finite.
LossBreakdown train_iteration(std::span<const MultiModalGraph> batch, Model& model, AdamState& optimizer,
                              const DistributionConfig& dist, const TrainerConfig& cfg);

} // namespace radnet
