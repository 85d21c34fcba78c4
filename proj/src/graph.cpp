#include "radnet/graph.hpp"

#include "radnet/errors.hpp"

#include <algorithm>
#include <string>

namespace radnet {

MultiModalGraph::MultiModalGraph(std::vector<Clue> nodes, int pivot_track_id)
    : nodes_(std::move(nodes)), pivot_(pivot_track_id) {
    std::unordered_map<int, std::size_t> slot_of;
    slot_.reserve(nodes_.size());
    for (const auto& c : nodes_) {
        auto [it, inserted] = slot_of.emplace(c.track_id, track_ids_.size());
        if (inserted) track_ids_.push_back(c.track_id);
        slot_.push_back(it->second);
    }
    groups_.assign(track_ids_.size() * kModalityCount, {});
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        groups_[slot_[i] * kModalityCount + index_of(nodes_[i].modality)].push_back(i);
        by_modality_[index_of(nodes_[i].modality)].push_back(i);
    }
}

std::vector<Vector> MultiModalGraph::features() const {
    std::vector<Vector> out;
    out.reserve(nodes_.size());
    for (const auto& c : nodes_) out.push_back(c.feature);
    return out;
}

MultiModalGraph build_graph(std::span<const Track> tracks, int features_per_track) {
    if (tracks.empty()) throw InvalidInput("build_graph: empty track list");
    std::vector<Clue> nodes;
    for (const auto& t : tracks) {
        t.validate();
        for (Modality m : kModalities) {
            const auto& list = t.of(m);
            std::size_t take = list.size();
            if (features_per_track > 0) take = std::min(take, static_cast<std::size_t>(features_per_track));
            nodes.insert(nodes.end(), list.begin(), list.begin() + static_cast<std::ptrdiff_t>(take));
        }
    }
    return MultiModalGraph(std::move(nodes), tracks.front().track_id);
}

TrackRep track_representative(const Track& track) {
    TrackRep rep;
    rep.track_id = track.track_id;
    for (Modality m : kModalities) {
        const auto& list = track.of(m);
        if (list.empty()) continue;
        Vector sum = Vector::Zero(list.front().feature.size());
        for (const auto& c : list) sum += c.feature;
        const double n = sum.norm();
        // Antipodal clues can cancel; such a modality carries no direction.
        if (n > 0.0) rep.means[index_of(m)] = sum / n;
    }
    return rep;
}

double representative_similarity(const TrackRep& a, const TrackRep& b) {
    for (Modality m : kModalities) {
        const auto& va = a.means[index_of(m)];
        const auto& vb = b.means[index_of(m)];
        if (va && vb && va->size() == vb->size()) return va->dot(*vb);
    }
    return -2.0;
}

KnnGraph::KnnGraph(std::vector<int> ids, std::vector<std::vector<int>> neighbors)
    : ids_(std::move(ids)), neighbors_(std::move(neighbors)) {
    for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
}

const std::vector<int>& KnnGraph::neighbors(int track_id) const {
    auto it = index_.find(track_id);
    if (it == index_.end()) throw InvalidInput("track " + std::to_string(track_id) + " not in kNN graph");
    return neighbors_[it->second];
}

KnnGraph knn_tracks(std::span<const TrackRep> reps, int k) {
    if (k < 0 || static_cast<std::size_t>(k) >= reps.size()) {
        if (!(k == 0 && reps.empty())) {
            throw InvalidInput("knn_tracks: k=" + std::to_string(k) + " must be below the track count " +
                               std::to_string(reps.size()));
        }
    }
    std::vector<int> ids;
    ids.reserve(reps.size());
    for (const auto& r : reps) ids.push_back(r.track_id);

    std::vector<std::vector<int>> lists(reps.size());
    if (k > 0) {
        std::vector<std::pair<double, int>> cand;
        cand.reserve(reps.size());
        const auto better = [](const auto& x, const auto& y) {
            return x.first != y.first ? x.first > y.first : x.second < y.second;
        };
        for (std::size_t i = 0; i < reps.size(); ++i) {
            cand.clear();
            for (std::size_t j = 0; j < reps.size(); ++j) {
                if (j == i) continue;
                cand.emplace_back(representative_similarity(reps[i], reps[j]), reps[j].track_id);
            }
            std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), better);
            auto& out = lists[i];
            out.reserve(static_cast<std::size_t>(k));
            for (int n = 0; n < k; ++n) out.push_back(cand[static_cast<std::size_t>(n)].second);
        }
    }
    return KnnGraph(std::move(ids), std::move(lists));
}

} // namespace radnet
