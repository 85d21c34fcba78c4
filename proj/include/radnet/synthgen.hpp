#pragma once

#include "radnet/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace radnet {

/// Generation knobs for one modality. Each clue is
///   normalize(prototype + track_offset + clue_noise)
/// with isotropic Gaussian offsets whose expected norms are track_noise and
/// noise. Same-identity clues from different tracks then have cosine close
/// to 1 / (1 + track_noise^2 + noise^2). Prototypes of different identities
/// share a common direction so that their cosine is about cross_cosine.
struct ModalitySynth {
    int dim = 32;
    int min_clues = 1;
    int max_clues = 4;
    double presence = 1.0; ///< probability a track carries this modality
    double noise = 0.3;
    double track_noise = 0.3;
    double cross_cosine = 0.0;
};

struct SynthConfig {
    int identities = 16;
    int tracks_per_identity = 12;
    std::array<ModalitySynth, kModalityCount> modalities{
        ModalitySynth{32, 1, 4, 0.8, 0.3, 0.3, 0.0},
        ModalitySynth{32, 1, 4, 0.8, 0.3, 0.3, 0.0},
        ModalitySynth{32, 1, 1, 0.6, 0.3, 0.3, 0.0},
    };
    std::uint64_t seed = 1;

    void validate() const;
};

/// Labeled dataset with independent per-modality identity prototypes.
/// Track ids are a seeded permutation of 0..T-1; clue ids are unique.
Dataset generate(const SynthConfig& cfg);

struct NoiseConfig {
    double rho = 0.0; ///< probability a body-bearing track has its body clues exchanged

    void validate() const;
};

/// Exchanges whole body clue sets between randomly paired selected tracks.
/// Selection uses one uniform draw per track, so the selected set grows
/// monotonically with rho for a fixed seed. `swapped` receives the ids of
/// tracks whose body clues changed.
Dataset inject_noise(const Dataset& data, const NoiseConfig& cfg, std::uint64_t seed,
                     std::vector<int>* swapped = nullptr);

} // namespace radnet
