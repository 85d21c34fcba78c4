#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace radnet {

/// Analytic gradients against central finite differences.
struct GradCheckEntry {
    std::string name;
    int draws = 0;
    double max_error = 0.0; ///< max |a - n| / max(1, |a|, |n|)
    double tolerance = 0.0;

    bool passed() const { return max_error < tolerance; }
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;

    bool passed() const;
};

/// Checks the similarity block and the feature blocks on random draws, and
/// the whole loss on small labeled graphs in every model mode (plus a
/// three-cycle fully unrolled run). `corrupt_backward` perturbs the analytic
/// gradients so the check must fail.
GradCheckReport run_gradcheck(std::uint64_t seed, bool corrupt_backward = false);

} // namespace radnet
