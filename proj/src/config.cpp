#include "radnet/config.hpp"

#include "radnet/errors.hpp"
#include "radnet/rng.hpp"

#include <fstream>
#include <set>

namespace radnet {

using nlohmann::json;

Mode RunConfig::model_mode() const {
    if (mode == "full" || mode == "fb" || mode == "fv" || mode == "f") return Mode::full;
    return parse_mode(mode);
}

std::array<bool, kModalityCount> RunConfig::modalities() const {
    if (mode == "fb") return {true, true, false};
    if (mode == "fv") return {true, false, true};
    if (mode == "f") return {true, false, false};
    return {true, true, true};
}

void RunConfig::finalize() {
    trainer.mode = model_mode();
    trainer.seed = derive_seed(seed, "trainer");
    synth.seed = derive_seed(seed, "synth");
}

void RunConfig::validate() const {
    (void)model_mode();
    sampler.validate();
    distribution.validate();
    trainer.validate();
    if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidInput("threshold must lie in (0, 1)");
    for (double t : sweep) {
        if (!(t > 0.0 && t < 1.0)) throw InvalidInput("sweep thresholds must lie in (0, 1)");
    }
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidInput("rho must lie in [0, 1]");
    if (width < 0) throw InvalidInput("width must be >= 0");
}

bool operator==(const SamplerConfig& a, const SamplerConfig& b) {
    return a.p == b.p && a.q == b.q && a.k == b.k && a.tau == b.tau;
}
bool operator==(const DistributionConfig& a, const DistributionConfig& b) {
    return a.eta == b.eta && a.alpha == b.alpha;
}
bool operator==(const TrainerConfig& a, const TrainerConfig& b) {
    return a.cycles == b.cycles && a.lambda_f == b.lambda_f && a.lambda_d == b.lambda_d && a.mu_f == b.mu_f &&
           a.mu_d == b.mu_d && a.batch == b.batch && a.iterations == b.iterations && a.lr == b.lr &&
           a.lr_decay == b.lr_decay && a.decay_at == b.decay_at && a.hidden == b.hidden &&
           a.full_unroll == b.full_unroll && a.mode == b.mode && a.seed == b.seed;
}
bool operator==(const ModalitySynth& a, const ModalitySynth& b) {
    return a.dim == b.dim && a.min_clues == b.min_clues && a.max_clues == b.max_clues && a.presence == b.presence &&
           a.noise == b.noise && a.track_noise == b.track_noise && a.cross_cosine == b.cross_cosine;
}
bool operator==(const SynthConfig& a, const SynthConfig& b) {
    return a.identities == b.identities && a.tracks_per_identity == b.tracks_per_identity &&
           a.modalities == b.modalities && a.seed == b.seed;
}
bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.sampler == b.sampler && a.distribution == b.distribution && a.trainer == b.trainer &&
           a.synth == b.synth && a.mode == b.mode && a.threshold == b.threshold && a.sweep == b.sweep &&
           a.rho == b.rho && a.width == b.width && a.seed == b.seed;
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* where) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw InvalidInput(std::string("unknown key '") + k + "' in " + where);
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

json modality_json(const ModalitySynth& m) {
    return {{"dim", m.dim},           {"min_clues", m.min_clues}, {"max_clues", m.max_clues},
            {"presence", m.presence}, {"noise", m.noise},         {"track_noise", m.track_noise},
            {"cross_cosine", m.cross_cosine}};
}

void modality_from(const json& j, ModalitySynth& m) {
    reject_unknown(j, {"dim", "min_clues", "max_clues", "presence", "noise", "track_noise", "cross_cosine"},
                   "synth modality");
    maybe(j, "dim", m.dim);
    maybe(j, "min_clues", m.min_clues);
    maybe(j, "max_clues", m.max_clues);
    maybe(j, "presence", m.presence);
    maybe(j, "noise", m.noise);
    maybe(j, "track_noise", m.track_noise);
    maybe(j, "cross_cosine", m.cross_cosine);
}

} // namespace

void to_json(json& j, const RunConfig& c) {
    json synth_mods = json::object();
    for (Modality m : kModalities) synth_mods[std::string(to_string(m))] = modality_json(c.synth.modalities[index_of(m)]);
    j = json{
        {"seed", c.seed},
        {"mode", c.mode},
        {"threshold", c.threshold},
        {"sweep", c.sweep},
        {"rho", c.rho},
        {"width", c.width},
        {"sampler", {{"p", c.sampler.p}, {"q", c.sampler.q}, {"k", c.sampler.k}, {"tau", c.sampler.tau}}},
        {"distribution", {{"eta", c.distribution.eta}, {"alpha", c.distribution.alpha}}},
        {"trainer",
         {{"generations", c.trainer.cycles},
          {"lambda_f", c.trainer.lambda_f},
          {"lambda_d", c.trainer.lambda_d},
          {"mu_f", c.trainer.mu_f},
          {"mu_d", c.trainer.mu_d},
          {"batch", c.trainer.batch},
          {"iterations", c.trainer.iterations},
          {"lr", c.trainer.lr},
          {"lr_decay", c.trainer.lr_decay},
          {"decay_at", c.trainer.decay_at},
          {"hidden", c.trainer.hidden},
          {"full_unroll", c.trainer.full_unroll}}},
        {"synth",
         {{"identities", c.synth.identities},
          {"tracks_per_identity", c.synth.tracks_per_identity},
          {"modalities", synth_mods}}},
    };
}

void from_json(const json& j, RunConfig& c) {
    reject_unknown(j, {"seed", "mode", "threshold", "sweep", "rho", "width", "sampler", "distribution", "trainer", "synth"},
                   "config");
    maybe(j, "seed", c.seed);
    maybe(j, "mode", c.mode);
    maybe(j, "threshold", c.threshold);
    maybe(j, "sweep", c.sweep);
    maybe(j, "rho", c.rho);
    maybe(j, "width", c.width);
    if (j.contains("sampler")) {
        const auto& s = j.at("sampler");
        reject_unknown(s, {"p", "q", "k", "tau"}, "sampler");
        maybe(s, "p", c.sampler.p);
        maybe(s, "q", c.sampler.q);
        maybe(s, "k", c.sampler.k);
        maybe(s, "tau", c.sampler.tau);
    }
    if (j.contains("distribution")) {
        const auto& d = j.at("distribution");
        reject_unknown(d, {"eta", "alpha"}, "distribution");
        maybe(d, "eta", c.distribution.eta);
        maybe(d, "alpha", c.distribution.alpha);
    }
    if (j.contains("trainer")) {
        const auto& t = j.at("trainer");
        reject_unknown(t, {"generations", "lambda_f", "lambda_d", "mu_f", "mu_d", "batch", "iterations", "lr",
                           "lr_decay", "decay_at", "hidden", "full_unroll"},
                       "trainer");
        maybe(t, "generations", c.trainer.cycles);
        maybe(t, "lambda_f", c.trainer.lambda_f);
        maybe(t, "lambda_d", c.trainer.lambda_d);
        maybe(t, "mu_f", c.trainer.mu_f);
        maybe(t, "mu_d", c.trainer.mu_d);
        maybe(t, "batch", c.trainer.batch);
        maybe(t, "iterations", c.trainer.iterations);
        maybe(t, "lr", c.trainer.lr);
        maybe(t, "lr_decay", c.trainer.lr_decay);
        maybe(t, "decay_at", c.trainer.decay_at);
        maybe(t, "hidden", c.trainer.hidden);
        maybe(t, "full_unroll", c.trainer.full_unroll);
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        reject_unknown(s, {"identities", "tracks_per_identity", "modalities"}, "synth");
        maybe(s, "identities", c.synth.identities);
        maybe(s, "tracks_per_identity", c.synth.tracks_per_identity);
        if (s.contains("modalities")) {
            const auto& mods = s.at("modalities");
            for (const auto& [name, v] : mods.items()) modality_from(v, c.synth.modalities[index_of(parse_modality(name))]);
        }
    }
    c.finalize();
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput("config " + path + ": " + e.what());
    }
    RunConfig c;
    try {
        from_json(j, c);
    } catch (const json::exception& e) {
        throw InvalidInput("config " + path + ": " + e.what());
    }
    return c;
}

void save_config(const std::string& path, const RunConfig& c) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config " + path);
    out << json(c).dump(2) << '\n';
    if (!out) throw IoError("failed writing config " + path);
}

} // namespace radnet
