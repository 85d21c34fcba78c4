#include "radnet/config.hpp"
#include "radnet/errors.hpp"
#include "radnet/gradcheck.hpp"
#include "radnet/io.hpp"
#include "radnet/metrics.hpp"
#include "radnet/pipeline.hpp"
#include "radnet/synthgen.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

namespace py = pybind11;
using namespace radnet;

namespace {

RunConfig make_config(const std::optional<std::string>& config_json, std::optional<std::uint64_t> seed,
                      const std::optional<std::string>& mode) {
    RunConfig c;
    if (config_json) nlohmann::json::parse(*config_json).get_to(c);
    if (seed) c.seed = *seed;
    if (mode) c.mode = *mode;
    c.finalize();
    c.validate();
    return c;
}

py::dict metrics_dict(const MetricReport& r) {
    py::dict d;
    d["wcp"] = r.wcp;
    d["nmi"] = r.nmi;
    d["cp"] = r.cp;
    d["cr"] = r.cr;
    d["cf"] = r.cf;
    return d;
}

} // namespace

PYBIND11_MODULE(_radnet, m) {
    m.doc() = "Multi-modal person clustering";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<InvalidState>(m, "InvalidState", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def(
        "generate",
        [](const std::filesystem::path& out, std::optional<std::string> config, std::optional<std::uint64_t> seed,
           double rho) {
            const auto cfg = make_config(config, seed, std::nullopt);
            auto data = generate(cfg.synth);
            if (rho > 0.0) data = inject_noise(data, {rho}, derive_seed(cfg.seed, "noise"));
            save_dataset(out, data);
            return data.tracks.size();
        },
        py::arg("out"), py::arg("config") = py::none(), py::arg("seed") = py::none(), py::arg("rho") = 0.0,
        "Writes a synthetic dataset directory and returns its track count.");

    m.def(
        "train",
        [](const std::filesystem::path& data_dir, const std::filesystem::path& model_path, std::optional<std::string> config,
           std::optional<std::uint64_t> seed, std::optional<std::string> mode, std::optional<int> iterations) {
            auto cfg = make_config(config, seed, mode);
            if (iterations) cfg.trainer.iterations = *iterations;
            cfg.validate();
            const auto data = restrict_modalities(load_dataset(data_dir), cfg.modalities());
            TrainResult result;
            {
                py::gil_scoped_release release;
                result = train_model(data, cfg);
            }
            save_checkpoint(model_path, {std::move(result.model), cfg});
            std::vector<double> losses;
            for (const auto& row : result.log) losses.push_back(row.loss.total);
            return losses;
        },
        py::arg("data"), py::arg("model"), py::arg("config") = py::none(), py::arg("seed") = py::none(),
        py::arg("mode") = py::none(), py::arg("iterations") = py::none(),
        "Trains on a labeled dataset directory, writes a checkpoint and returns the per-iteration loss.");

    m.def(
        "cluster",
        [](const std::filesystem::path& data_dir, const std::filesystem::path& model_path, std::optional<double> threshold) {
            auto ck = load_checkpoint(model_path);
            if (threshold) ck.config.threshold = *threshold;
            ck.config.validate();
            const auto data = load_dataset(data_dir);
            py::gil_scoped_release release;
            return cluster_dataset(data, ck.model, ck.config).cluster_of;
        },
        py::arg("data"), py::arg("model"), py::arg("threshold") = py::none(),
        "Clusters a dataset directory with a checkpoint; returns {track_id: cluster_id}.");

    m.def(
        "ground_truth", [](const std::filesystem::path& data_dir) { return ground_truth(load_dataset(data_dir)); },
        py::arg("data"), "Returns {track_id: identity} for a labeled dataset directory.");

    m.def(
        "evaluate", [](const Partition& pred, const Partition& truth) { return metrics_dict(evaluate(pred, truth)); },
        py::arg("pred"), py::arg("truth"), "WCP, NMI, CP, CR and CF of a predicted partition.");

    m.def(
        "gradcheck",
        [](std::uint64_t seed) {
            const auto report = run_gradcheck(seed);
            py::dict out;
            for (const auto& e : report.entries) out[py::str(e.name)] = e.max_error;
            return py::make_tuple(report.passed(), out);
        },
        py::arg("seed") = 1, "Runs the gradient check; returns (passed, {check: max error}).");
}
