#pragma once

#include "radnet/graph.hpp"
#include "radnet/types.hpp"

#include <span>
#include <unordered_map>
#include <vector>

namespace radnet {

struct SamplerConfig {
    int p = 8;        ///< neighbour tracks per pivot
    int q = 8;        ///< features per track and modality
    int k = 8;        ///< kNN width, k >= p
    double tau = 0.8; ///< density threshold on the (1 + cos) / 2 scale

    void validate() const;
};

struct Neighborhood {
    std::vector<int> track_ids; ///< pivot first
    bool degenerate = false;    ///< dataset had fewer than p + 1 tracks
};

/// Pivot plus p neighbour tracks drawn from the pivot's kNN. A modality that
/// no selected track carries is pulled in from the remaining first-hop
/// candidates or from neighbours of neighbours, replacing the lowest-ranked
/// track whose removal does not orphan another modality.
Neighborhood sample_neighborhood(int pivot, std::span<const Track> tracks, const KnnGraph& knn,
                                 const SamplerConfig& cfg);

struct DensityStats {
    std::vector<double> density; ///< local density rho_i
    std::vector<double> peak;    ///< peak distance r_i in [0, 1]
    std::vector<double> score;   ///< min-max normalized rho times r
};

/// Density-peak statistics over the features of one track and modality.
/// Similarity is (1 + cos) / 2; a feature's peak is the most similar feature
/// that is denser, where equal densities order by index.
DensityStats density_stats(std::span<const Vector> features, double tau);

/// The min(q, available) highest-scoring clues of one modality, returned in
/// ascending clue_id order. Score ties prefer the lower clue_id.
std::vector<Clue> density_sample_features(const Track& track, Modality m, const SamplerConfig& cfg);

/// Copy of `track` keeping only the density-sampled clues of every modality.
Track density_sample_track(const Track& track, const SamplerConfig& cfg);

} // namespace radnet
