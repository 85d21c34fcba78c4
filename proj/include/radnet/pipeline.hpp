#pragma once

#include "radnet/clusterer.hpp"
#include "radnet/config.hpp"
#include "radnet/graph.hpp"
#include "radnet/io.hpp"
#include "radnet/metrics.hpp"
#include "radnet/sampler.hpp"
#include "radnet/trainer.hpp"

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace radnet {

/// Drops the clues of modalities not in `keep` and zeroes their dimensions.
/// Tracks left without clues are removed.
Dataset restrict_modalities(const Dataset& data, const std::array<bool, kModalityCount>& keep);

/// Density-sampled tracks plus the track kNN, ready to cut one graph per pivot.
class GraphSampler {
public:
    GraphSampler(const Dataset& data, const SamplerConfig& cfg);

    std::vector<int> pivots() const;
    MultiModalGraph graph_for(int pivot) const;
    const KnnGraph& knn() const { return knn_; }

private:
    SamplerConfig cfg_;
    std::vector<Track> tracks_;
    std::unordered_map<int, std::size_t> index_;
    KnnGraph knn_;
};

/// Largest graph the sampler can produce for data like `data`:
/// (p + 1) * sum over modalities of min(q, largest clue count).
int required_width(const Dataset& data, const SamplerConfig& cfg);

struct TrainResult {
    Model model;
    std::vector<LogRow> log;
};

/// Trains a model on a labeled dataset (already restricted to the run's
/// modalities). `on_step` sees every logged row as it is produced.
TrainResult train_model(const Dataset& data, const RunConfig& cfg,
                        const std::function<void(const LogRow&)>& on_step = {});

/// Pooled track linkage over one graph per track.
/// Throws InvalidInput if a graph exceeds the model's width.
LinkageTable infer_linkage(const Dataset& data, const Model& model, const RunConfig& cfg);

/// Ground-truth partition of tracks; throws InvalidInput on unlabeled tracks.
Partition ground_truth(const Dataset& data);

Partition to_partition(const ClusterAssignment& a);

std::vector<SweepRow> sweep(const LinkageTable& linkage, std::span<const double> thresholds,
                            std::span<const int> track_ids, const Partition& truth);

/// Restrict, infer, cluster at `cfg.threshold`: the end-to-end cluster step.
ClusterAssignment cluster_dataset(const Dataset& data, const Model& model, const RunConfig& cfg);

} // namespace radnet
