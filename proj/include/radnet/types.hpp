#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace radnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Modality : std::uint8_t { face = 0, body = 1, voice = 2 };

inline constexpr std::size_t kModalityCount = 3;
inline constexpr std::array<Modality, kModalityCount> kModalities{Modality::face, Modality::body,
                                                                  Modality::voice};

constexpr std::size_t index_of(Modality m) { return static_cast<std::size_t>(m); }

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view name);

/// One modality-specific feature of a track.
struct Clue {
    int clue_id = 0;
    int track_id = 0;
    Modality modality = Modality::face;
    Vector feature;
    std::optional<int> identity;
};

/// A person track: clue lists per modality. Voice usually holds at most one clue.
struct Track {
    int track_id = 0;
    std::array<std::vector<Clue>, kModalityCount> clues;

    const std::vector<Clue>& of(Modality m) const { return clues[index_of(m)]; }
    std::vector<Clue>& of(Modality m) { return clues[index_of(m)]; }
    bool has(Modality m) const { return !of(m).empty(); }
    std::size_t clue_count() const;

    /// Ground-truth identity: the first labeled clue in face, body, voice order.
    std::optional<int> identity() const;

    /// Throws InvalidInput if a clue carries a foreign track id or modality, or the track is empty.
    void validate() const;
};

/// A labeled (or unlabeled) collection of tracks with per-modality feature dimension.
/// A dimension of 0 means the modality is absent from the dataset.
struct Dataset {
    std::array<int, kModalityCount> dims{0, 0, 0};
    std::vector<Track> tracks;

    std::size_t clue_count(Modality m) const;
    std::vector<int> track_ids() const;
};

/// Returns v / ||v||; throws InvalidInput on a zero vector.
Vector normalized(const Vector& v);

} // namespace radnet
