#include "radnet/pipeline.hpp"

#include "radnet/errors.hpp"
#include "radnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace radnet {

Dataset restrict_modalities(const Dataset& data, const std::array<bool, kModalityCount>& keep) {
    Dataset out;
    for (Modality m : kModalities) out.dims[index_of(m)] = keep[index_of(m)] ? data.dims[index_of(m)] : 0;
    for (const auto& t : data.tracks) {
        Track r;
        r.track_id = t.track_id;
        for (Modality m : kModalities) {
            if (keep[index_of(m)]) r.of(m) = t.of(m);
        }
        if (r.clue_count() > 0) out.tracks.push_back(std::move(r));
    }
    return out;
}

GraphSampler::GraphSampler(const Dataset& data, const SamplerConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (data.tracks.empty()) throw InvalidInput("dataset has no tracks");
    tracks_.reserve(data.tracks.size());
    std::vector<TrackRep> reps;
    reps.reserve(data.tracks.size());
    for (const auto& t : data.tracks) {
        t.validate();
        if (!index_.emplace(t.track_id, tracks_.size()).second) {
            throw InvalidInput("duplicate track id " + std::to_string(t.track_id));
        }
        tracks_.push_back(density_sample_track(t, cfg_));
        reps.push_back(track_representative(t));
    }
    const int k = std::min(cfg_.k, static_cast<int>(tracks_.size()) - 1);
    knn_ = knn_tracks(reps, k);
}

std::vector<int> GraphSampler::pivots() const {
    std::vector<int> ids;
    ids.reserve(tracks_.size());
    for (const auto& t : tracks_) ids.push_back(t.track_id);
    return ids;
}

MultiModalGraph GraphSampler::graph_for(int pivot) const {
    const auto hood = sample_neighborhood(pivot, tracks_, knn_, cfg_);
    std::vector<Track> chosen;
    chosen.reserve(hood.track_ids.size());
    for (int id : hood.track_ids) chosen.push_back(tracks_[index_.at(id)]);
    return build_graph(chosen);
}

int required_width(const Dataset& data, const SamplerConfig& cfg) {
    cfg.validate();
    int per_track = 0;
    for (Modality m : kModalities) {
        std::size_t most = 0;
        for (const auto& t : data.tracks) most = std::max(most, t.of(m).size());
        per_track += std::min(cfg.q, static_cast<int>(most));
    }
    return (cfg.p + 1) * per_track;
}

TrainResult train_model(const Dataset& data, const RunConfig& cfg, const std::function<void(const LogRow&)>& on_step) {
    cfg.validate();
    const TrainerConfig& tc = cfg.trainer;
    GraphSampler sampler(data, cfg.sampler);
    const auto pivots = sampler.pivots();
    std::vector<MultiModalGraph> graphs;
    graphs.reserve(pivots.size());
    for (int p : pivots) graphs.push_back(sampler.graph_for(p));

    ModelShape shape;
    shape.width = cfg.width > 0 ? cfg.width : required_width(data, cfg.sampler);
    shape.hidden = tc.hidden;
    shape.cycles = tc.cycles;
    shape.dims = data.dims;
    shape.mode = tc.mode;
    double positives = 0.0;
    double pairs = 0.0;
    for (const auto& g : graphs) {
        if (static_cast<int>(g.size()) > shape.width) {
            throw InvalidInput("graph of pivot " + std::to_string(g.pivot_track_id()) + " has " +
                               std::to_string(g.size()) + " nodes, more than the model width " +
                               std::to_string(shape.width));
        }
        const Matrix y = label_matrix(g);
        positives += (y.sum() - y.trace()) / 2.0;
        pairs += static_cast<double>(g.size() * (g.size() - 1)) / 2.0;
    }

    TrainResult result;
    result.model = Model::create(shape, derive_seed(tc.seed, "init"));
    // Same-identity pairs dominate kNN neighbourhoods. Starting the similarity
    // blocks at the base rate keeps that majority from dragging every score up
    // before the rare negatives get a say.
    if (pairs > 0.0) {
        const double rate = std::clamp(positives / pairs, 1e-3, 1.0 - 1e-3);
        for (auto& s : result.model.sigma) s.b2 = std::log(rate / (1.0 - rate));
    }
    AdamState adam;
    adam.cfg.lr = tc.lr;
    Rng rng(derive_seed(tc.seed, "batches"));
    const int decay_iter = static_cast<int>(tc.decay_at * tc.iterations);
    std::vector<MultiModalGraph> batch;
    for (int it = 0; it < tc.iterations; ++it) {
        adam.cfg.lr = it < decay_iter ? tc.lr : tc.lr * tc.lr_decay;
        batch.clear();
        for (int b = 0; b < tc.batch; ++b) {
            batch.push_back(graphs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(graphs.size()) - 1))]);
        }
        LogRow row;
        row.iteration = it + 1;
        row.loss = train_iteration(batch, result.model, adam, cfg.distribution, tc);
        row.lr = adam.cfg.lr;
        if (on_step) on_step(row);
        result.log.push_back(row);
    }
    return result;
}

LinkageTable infer_linkage(const Dataset& data, const Model& model, const RunConfig& cfg) {
    for (Modality m : kModalities) {
        const int want = model.shape.dims[index_of(m)];
        const int have = data.dims[index_of(m)];
        if (have > 0 && want != have) {
            throw InvalidInput(std::string(to_string(m)) + " features have dimension " + std::to_string(have) +
                               " but the model expects " + std::to_string(want));
        }
    }
    GraphSampler sampler(data, cfg.sampler);
    // Without distributions there is no cross-modality evidence: each
    // modality is linked on its own and tracks join modalities afterwards.
    const bool per_modality = model.shape.mode == Mode::feature_only;
    LinkageTable table;
    std::array<LinkageTable, kModalityCount> modal;
    for (int pivot : sampler.pivots()) {
        const auto graph = sampler.graph_for(pivot);
        if (static_cast<int>(graph.size()) > model.shape.width) {
            throw InvalidInput("graph of pivot " + std::to_string(pivot) + " has " + std::to_string(graph.size()) +
                               " nodes; the model is incompatible with graphs wider than " +
                               std::to_string(model.shape.width));
        }
        const auto trace = run_inference(graph, model, cfg.distribution);
        if (per_modality) {
            for (Modality m : kModalities) {
                for (const auto& e : track_linkage(graph, trace.final_affinity, m)) modal[index_of(m)].add(e);
            }
        } else {
            for (const auto& e : track_linkage(graph, trace.final_affinity)) table.add(e);
        }
    }
    return per_modality ? strongest_modality(modal) : table;
}

Partition ground_truth(const Dataset& data) {
    Partition p;
    for (const auto& t : data.tracks) {
        const auto id = t.identity();
        if (!id) throw InvalidInput("track " + std::to_string(t.track_id) + " has no identity label");
        p[t.track_id] = *id;
    }
    return p;
}

Partition to_partition(const ClusterAssignment& a) { return Partition(a.cluster_of.begin(), a.cluster_of.end()); }

std::vector<SweepRow> sweep(const LinkageTable& linkage, std::span<const double> thresholds,
                            std::span<const int> track_ids, const Partition& truth) {
    std::vector<SweepRow> rows;
    for (double t : thresholds) {
        const auto a = cluster(linkage, t, track_ids);
        SweepRow r;
        r.threshold = t;
        r.clusters = a.cluster_count;
        r.metrics = evaluate(to_partition(a), truth);
        rows.push_back(r);
    }
    return rows;
}

ClusterAssignment cluster_dataset(const Dataset& data, const Model& model, const RunConfig& cfg) {
    const auto restricted = restrict_modalities(data, cfg.modalities());
    const auto linkage = infer_linkage(restricted, model, cfg);
    const auto ids = data.track_ids();
    return cluster(linkage, cfg.threshold, ids);
}

} // namespace radnet
