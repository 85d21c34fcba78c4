#pragma once

#include "radnet/distribution.hpp"
#include "radnet/sampler.hpp"
#include "radnet/synthgen.hpp"
#include "radnet/trainer.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace radnet {

/// Everything a CLI run needs. `mode` is one of full, feature-only,
/// distribution-only, fb, fv, f; the last three are full-model runs on a
/// modality subset (face+body, face+voice, face).
struct RunConfig {
    SamplerConfig sampler;
    DistributionConfig distribution;
    TrainerConfig trainer;
    SynthConfig synth;
    std::string mode = "full";
    double threshold = 0.5;
    std::vector<double> sweep{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    double rho = 0.0;
    int width = 0; ///< similarity-block width; 0 derives it from the training data
    std::uint64_t seed = 7;

    /// Model mode implied by `mode`.
    Mode model_mode() const;
    /// Modalities kept by `mode`.
    std::array<bool, kModalityCount> modalities() const;

    /// Pushes the root seed and mode into the nested configs.
    void finalize();
    void validate() const;
};

bool operator==(const SamplerConfig& a, const SamplerConfig& b);
bool operator==(const DistributionConfig& a, const DistributionConfig& b);
bool operator==(const TrainerConfig& a, const TrainerConfig& b);
bool operator==(const ModalitySynth& a, const ModalitySynth& b);
bool operator==(const SynthConfig& a, const SynthConfig& b);
bool operator==(const RunConfig& a, const RunConfig& b);

void to_json(nlohmann::json& j, const RunConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& c);

} // namespace radnet
