#include "radnet/sampler.hpp"

#include "radnet/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_set>

namespace radnet {

void SamplerConfig::validate() const {
    if (p < 1) throw InvalidInput("sampler: p must be >= 1");
    if (q < 1) throw InvalidInput("sampler: q must be >= 1");
    if (k < p) throw InvalidInput("sampler: k must be >= p");
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidInput("sampler: tau must lie in [0, 1]");
}

namespace {

using ModalitySet = std::array<bool, kModalityCount>;

ModalitySet modalities_of(const Track& t) {
    return {t.has(Modality::face), t.has(Modality::body), t.has(Modality::voice)};
}

} // namespace

Neighborhood sample_neighborhood(int pivot, std::span<const Track> tracks, const KnnGraph& knn,
                                 const SamplerConfig& cfg) {
    cfg.validate();
    std::unordered_map<int, const Track*> by_id;
    for (const auto& t : tracks) by_id.emplace(t.track_id, &t);
    if (!by_id.count(pivot)) throw InvalidInput("sample_neighborhood: unknown pivot " + std::to_string(pivot));

    Neighborhood out;
    const auto wanted = static_cast<std::size_t>(cfg.p);
    if (tracks.size() < wanted + 1) {
        out.degenerate = true;
        out.track_ids.push_back(pivot);
        std::vector<int> rest;
        for (const auto& t : tracks) {
            if (t.track_id != pivot) rest.push_back(t.track_id);
        }
        std::sort(rest.begin(), rest.end());
        out.track_ids.insert(out.track_ids.end(), rest.begin(), rest.end());
        return out;
    }

    // Candidate order: first-hop neighbours, then neighbours of neighbours.
    std::vector<int> candidates;
    std::unordered_set<int> seen{pivot};
    for (int n : knn.neighbors(pivot)) {
        if (seen.insert(n).second) candidates.push_back(n);
    }
    const std::size_t first_hop = candidates.size();
    for (std::size_t c = 0; c < first_hop; ++c) {
        if (!knn.contains(candidates[c])) continue;
        for (int n : knn.neighbors(candidates[c])) {
            if (seen.insert(n).second) candidates.push_back(n);
        }
    }

    const std::size_t take = std::min(wanted, candidates.size());
    std::vector<int> selected(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
    std::vector<int> pool(candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end());

    const auto carriers = [&](Modality m) {
        int n = by_id.at(pivot)->has(m) ? 1 : 0;
        for (int id : selected) n += by_id.at(id)->has(m) ? 1 : 0;
        return n;
    };

    for (Modality m : kModalities) {
        if (carriers(m) > 0) continue;
        auto cand = std::find_if(pool.begin(), pool.end(), [&](int id) { return by_id.at(id)->has(m); });
        if (cand == pool.end()) continue;
        // Drop the lowest-ranked track that is not the sole carrier of a covered modality.
        for (auto victim = selected.rbegin(); victim != selected.rend(); ++victim) {
            const ModalitySet mods = modalities_of(*by_id.at(*victim));
            bool sole = false;
            for (Modality other : kModalities) {
                if (mods[index_of(other)] && carriers(other) == 1) sole = true;
            }
            if (sole) continue;
            *victim = *cand;
            pool.erase(cand);
            break;
        }
    }

    out.track_ids.reserve(selected.size() + 1);
    out.track_ids.push_back(pivot);
    out.track_ids.insert(out.track_ids.end(), selected.begin(), selected.end());
    return out;
}

DensityStats density_stats(std::span<const Vector> features, double tau) {
    const std::size_t n = features.size();
    if (n == 0) throw InvalidInput("density_stats: no features");

    Matrix sim(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double c = features[i].dot(features[j]) / (features[i].norm() * features[j].norm());
            const double s = std::clamp((1.0 + c) / 2.0, 0.0, 1.0);
            sim(i, j) = sim(j, i) = s;
        }
    }

    DensityStats st;
    st.density.assign(n, 0.0);
    st.peak.assign(n, 1.0);
    st.score.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && sim(i, j) > tau) st.density[i] += sim(i, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double best = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const bool denser = st.density[j] > st.density[i] || (st.density[j] == st.density[i] && j < i);
            if (denser && sim(i, j) > best) best = sim(i, j);
        }
        if (best >= 0.0) st.peak[i] = 1.0 - best;
    }

    const auto minmax = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        std::vector<double> out(v.size(), 1.0);
        if (*hi > *lo) {
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / (*hi - *lo);
        }
        return out;
    };
    const auto rho = minmax(st.density);
    const auto r = minmax(st.peak);
    for (std::size_t i = 0; i < n; ++i) st.score[i] = rho[i] * r[i];
    return st;
}

std::vector<Clue> density_sample_features(const Track& track, Modality m, const SamplerConfig& cfg) {
    std::vector<Clue> clues = track.of(m);
    if (clues.empty()) return {};
    std::sort(clues.begin(), clues.end(), [](const Clue& a, const Clue& b) { return a.clue_id < b.clue_id; });

    std::vector<Vector> feats;
    feats.reserve(clues.size());
    for (const auto& c : clues) feats.push_back(c.feature);
    const auto stats = density_stats(feats, cfg.tau);

    std::vector<std::size_t> order(clues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return stats.score[a] > stats.score[b]; });
    const std::size_t take = std::min(order.size(), static_cast<std::size_t>(std::max(cfg.q, 0)));
    order.resize(take);
    std::sort(order.begin(), order.end());

    std::vector<Clue> out;
    out.reserve(take);
    for (std::size_t idx : order) out.push_back(clues[idx]);
    return out;
}

Track density_sample_track(const Track& track, const SamplerConfig& cfg) {
    Track out;
    out.track_id = track.track_id;
    for (Modality m : kModalities) out.of(m) = density_sample_features(track, m, cfg);
    return out;
}

} // namespace radnet
