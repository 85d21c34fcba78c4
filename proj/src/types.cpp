#include "radnet/types.hpp"

#include "radnet/errors.hpp"
#include "radnet/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace radnet {

std::string_view to_string(Modality m) {
    switch (m) {
    case Modality::face: return "face";
    case Modality::body: return "body";
    case Modality::voice: return "voice";
    }
    throw InvalidInput("unknown modality");
}

Modality parse_modality(std::string_view name) {
    if (name == "face") return Modality::face;
    if (name == "body") return Modality::body;
    if (name == "voice") return Modality::voice;
    throw InvalidInput("unknown modality '" + std::string(name) + "'");
}

std::size_t Track::clue_count() const {
    std::size_t n = 0;
    for (const auto& list : clues) n += list.size();
    return n;
}

std::optional<int> Track::identity() const {
    for (const auto& list : clues) {
        for (const auto& c : list) {
            if (c.identity) return c.identity;
        }
    }
    return std::nullopt;
}

void Track::validate() const {
    if (clue_count() == 0) {
        throw InvalidInput("track " + std::to_string(track_id) + " has no clues");
    }
    for (Modality m : kModalities) {
        for (const auto& c : of(m)) {
            if (c.track_id != track_id) {
                throw InvalidInput("clue " + std::to_string(c.clue_id) + " is filed under track " +
                                   std::to_string(track_id) + " but carries track " +
                                   std::to_string(c.track_id));
            }
            if (c.modality != m) {
                throw InvalidInput("clue " + std::to_string(c.clue_id) + " is in the wrong modality list");
            }
        }
    }
}

std::size_t Dataset::clue_count(Modality m) const {
    std::size_t n = 0;
    for (const auto& t : tracks) n += t.of(m).size();
    return n;
}

std::vector<int> Dataset::track_ids() const {
    std::vector<int> ids;
    ids.reserve(tracks.size());
    for (const auto& t : tracks) ids.push_back(t.track_id);
    return ids;
}

Vector normalized(const Vector& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("cannot normalize a zero or non-finite vector");
    return v / n;
}

double Rng::normal() {
    // 1 - uniform() lies in (0, 1], so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace radnet
