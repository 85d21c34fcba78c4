#include "radnet/synthgen.hpp"

#include "radnet/errors.hpp"
#include "radnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace radnet {

void SynthConfig::validate() const {
    if (identities < 1) throw InvalidInput("synth: identity count must be >= 1");
    if (tracks_per_identity < 1) throw InvalidInput("synth: tracks per identity must be >= 1");
    bool any = false;
    for (const auto& m : modalities) {
        if (!(m.presence >= 0.0 && m.presence <= 1.0)) throw InvalidInput("synth: presence must lie in [0, 1]");
        if (m.presence == 0.0) continue;
        any = true;
        if (m.dim < 2) throw InvalidInput("synth: feature dimension must be >= 2");
        if (m.min_clues < 1 || m.max_clues < m.min_clues) throw InvalidInput("synth: invalid clue count range");
        if (m.noise < 0.0 || m.track_noise < 0.0) throw InvalidInput("synth: noise must be >= 0");
        if (!(m.cross_cosine >= 0.0 && m.cross_cosine < 1.0)) throw InvalidInput("synth: cross_cosine must lie in [0, 1)");
    }
    if (!any) throw InvalidInput("synth: every modality has zero presence");
}

namespace {

Vector gaussian(Rng& rng, int dim, double scale) {
    Vector v(dim);
    for (int k = 0; k < dim; ++k) v(k) = rng.normal() * scale;
    return v;
}

} // namespace

Dataset generate(const SynthConfig& cfg) {
    cfg.validate();
    Dataset data;
    for (Modality m : kModalities) {
        const auto& mc = cfg.modalities[index_of(m)];
        data.dims[index_of(m)] = mc.presence > 0.0 ? mc.dim : 0;
    }

    const auto unit = [](Rng& rng, int dim) {
        Vector p;
        do {
            p = gaussian(rng, dim, 1.0);
        } while (p.norm() == 0.0);
        return Vector(p.normalized());
    };
    std::vector<std::array<Vector, kModalityCount>> prototypes(static_cast<std::size_t>(cfg.identities));
    for (Modality m : kModalities) {
        const int dim = data.dims[index_of(m)];
        if (dim == 0) continue;
        const double c = cfg.modalities[index_of(m)].cross_cosine;
        Rng common_rng(derive_seed(cfg.seed, "prototype-common", index_of(m)));
        const Vector common = unit(common_rng, dim);
        for (int id = 0; id < cfg.identities; ++id) {
            Rng rng(derive_seed(cfg.seed, "prototype", static_cast<std::uint64_t>(id * 3) + index_of(m)));
            const Vector own = unit(rng, dim);
            prototypes[static_cast<std::size_t>(id)][index_of(m)] = (std::sqrt(c) * common + std::sqrt(1.0 - c) * own).normalized();
        }
    }

    const int total = cfg.identities * cfg.tracks_per_identity;
    std::vector<int> track_ids(static_cast<std::size_t>(total));
    std::iota(track_ids.begin(), track_ids.end(), 0);
    {
        Rng rng(derive_seed(cfg.seed, "track-ids"));
        for (int i = total - 1; i > 0; --i) {
            std::swap(track_ids[static_cast<std::size_t>(i)],
                      track_ids[static_cast<std::size_t>(rng.uniform_int(0, i))]);
        }
    }

    data.tracks.reserve(static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t) {
        const int identity = t / cfg.tracks_per_identity;
        Rng rng(derive_seed(cfg.seed, "track", static_cast<std::uint64_t>(t)));
        std::array<bool, kModalityCount> present{};
        do {
            for (Modality m : kModalities) present[index_of(m)] = rng.bernoulli(cfg.modalities[index_of(m)].presence);
        } while (!present[0] && !present[1] && !present[2]);

        Track track;
        track.track_id = track_ids[static_cast<std::size_t>(t)];
        for (Modality m : kModalities) {
            if (!present[index_of(m)]) continue;
            const auto& mc = cfg.modalities[index_of(m)];
            const double dscale = 1.0 / std::sqrt(static_cast<double>(mc.dim));
            const Vector offset = gaussian(rng, mc.dim, mc.track_noise * dscale);
            const auto count = rng.uniform_int(mc.min_clues, mc.max_clues);
            const Vector& proto = prototypes[static_cast<std::size_t>(identity)][index_of(m)];
            for (std::int64_t c = 0; c < count; ++c) {
                Clue clue;
                clue.track_id = track.track_id;
                clue.modality = m;
                clue.identity = identity;
                Vector v = proto + offset + gaussian(rng, mc.dim, mc.noise * dscale);
                clue.feature = v.normalized();
                track.of(m).push_back(std::move(clue));
            }
        }
        data.tracks.push_back(std::move(track));
    }

    std::sort(data.tracks.begin(), data.tracks.end(),
              [](const Track& a, const Track& b) { return a.track_id < b.track_id; });
    int next_id = 0;
    for (auto& track : data.tracks) {
        for (auto& list : track.clues) {
            for (auto& c : list) c.clue_id = next_id++;
        }
    }
    return data;
}

void NoiseConfig::validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidInput("noise: rho must lie in [0, 1]");
}

Dataset inject_noise(const Dataset& data, const NoiseConfig& cfg, std::uint64_t seed, std::vector<int>* swapped) {
    cfg.validate();
    Dataset out = data;
    if (swapped) swapped->clear();

    std::vector<std::size_t> order(out.tracks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return out.tracks[a].track_id < out.tracks[b].track_id; });

    std::vector<std::size_t> selected;
    for (auto idx : order) {
        const auto& t = out.tracks[idx];
        if (!t.has(Modality::body)) continue;
        Rng rng(derive_seed(seed, "noise-select", static_cast<std::uint64_t>(t.track_id)));
        if (rng.uniform() < cfg.rho) selected.push_back(idx);
    }
    {
        Rng rng(derive_seed(seed, "noise-pair"));
        for (std::size_t i = selected.size(); i > 1; --i) {
            std::swap(selected[i - 1], selected[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
        }
    }
    for (std::size_t p = 0; p + 1 < selected.size(); p += 2) {
        auto& a = out.tracks[selected[p]];
        auto& b = out.tracks[selected[p + 1]];
        std::swap(a.of(Modality::body), b.of(Modality::body));
        for (auto& c : a.of(Modality::body)) c.track_id = a.track_id;
        for (auto& c : b.of(Modality::body)) c.track_id = b.track_id;
        if (swapped) {
            swapped->push_back(a.track_id);
            swapped->push_back(b.track_id);
        }
    }
    if (swapped) std::sort(swapped->begin(), swapped->end());
    return out;
}

} // namespace radnet
