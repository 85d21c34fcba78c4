#pragma once

#include "radnet/types.hpp"

#include <span>
#include <unordered_map>
#include <vector>

namespace radnet {

/// The sampled clue graph. Nodes are ordered by track (input order), then
/// modality (face < body < voice), then clue order within the track.
///
/// Modality edges join distinct same-modality nodes; track edges join
/// different-modality nodes of one track. Both relations are symmetric,
/// irreflexive and disjoint. Immutable after construction.
class MultiModalGraph {
public:
    MultiModalGraph(std::vector<Clue> nodes, int pivot_track_id);

    std::size_t size() const { return nodes_.size(); }
    const Clue& node(std::size_t i) const { return nodes_[i]; }
    const std::vector<Clue>& nodes() const { return nodes_; }
    int pivot_track_id() const { return pivot_; }

    Modality modality(std::size_t i) const { return nodes_[i].modality; }
    int track_id(std::size_t i) const { return nodes_[i].track_id; }

    /// Dense index of a node's track in [0, track_count()).
    std::size_t track_slot(std::size_t i) const { return slot_[i]; }
    std::size_t track_count() const { return track_ids_.size(); }
    const std::vector<int>& track_ids() const { return track_ids_; }

    bool modality_edge(std::size_t i, std::size_t j) const {
        return i != j && modality(i) == modality(j);
    }
    bool track_edge(std::size_t i, std::size_t j) const {
        return track_id(i) == track_id(j) && modality(i) != modality(j);
    }

    /// Nodes of a given track slot and modality, ascending.
    const std::vector<std::size_t>& group(std::size_t slot, Modality m) const {
        return groups_[slot * kModalityCount + index_of(m)];
    }
    /// All nodes of one modality, ascending.
    const std::vector<std::size_t>& modality_nodes(Modality m) const { return by_modality_[index_of(m)]; }

    /// Feature vectors of all nodes, in node order.
    std::vector<Vector> features() const;

private:
    std::vector<Clue> nodes_;
    int pivot_;
    std::vector<int> track_ids_;
    std::vector<std::size_t> slot_;
    std::vector<std::vector<std::size_t>> groups_;
    std::array<std::vector<std::size_t>, kModalityCount> by_modality_;
};

/// Concatenates the clues of `tracks` in deterministic order. At most
/// `features_per_track` clues per modality are taken from each track
/// (0 takes all). The first track is the pivot.
MultiModalGraph build_graph(std::span<const Track> tracks, int features_per_track = 0);

/// Per-track representative: re-normalized mean feature per available modality.
struct TrackRep {
    int track_id = 0;
    std::array<std::optional<Vector>, kModalityCount> means;
};

TrackRep track_representative(const Track& track);

/// Cosine between two representatives, compared in the first modality both
/// carry (face, then body, then voice). Returns -2 when they share none.
double representative_similarity(const TrackRep& a, const TrackRep& b);

/// Exact k-nearest-neighbour lists over tracks, keyed by track id.
class KnnGraph {
public:
    KnnGraph() = default;
    KnnGraph(std::vector<int> ids, std::vector<std::vector<int>> neighbors);

    const std::vector<int>& neighbors(int track_id) const;
    const std::vector<int>& ids() const { return ids_; }
    bool contains(int track_id) const { return index_.count(track_id) != 0; }

private:
    std::vector<int> ids_;
    std::vector<std::vector<int>> neighbors_;
    std::unordered_map<int, std::size_t> index_;
};

/// For each track, the k most similar other tracks (ties by ascending id).
KnnGraph knn_tracks(std::span<const TrackRep> reps, int k);

} // namespace radnet
