#include "radnet/config.hpp"
#include "radnet/errors.hpp"
#include "radnet/gradcheck.hpp"
#include "radnet/io.hpp"
#include "radnet/pipeline.hpp"
#include "radnet/synthgen.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

using namespace radnet;

// Flags shared by subcommands that build a RunConfig. Unset flags leave the
// config file (or the defaults) alone.
struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<double> eta;
    std::optional<double> alpha;
    std::optional<double> lambda_f;
    std::optional<double> lambda_d;
    std::optional<int> generations;
    std::optional<int> iterations;
    std::optional<int> width;
    std::optional<double> threshold;
    std::optional<double> rho;

    void add_base(CLI::App* app) {
        app->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "root seed");
    }

    void add_model(CLI::App* app) {
        app->add_option("--mode", mode, "full, feature-only, distribution-only, fb, fv or f");
        app->add_option("--eta", eta, "soft initialization for same-track pairs");
        app->add_option("--alpha", alpha, "distribution momentum");
        app->add_option("--lambda-f", lambda_f, "feature loss weight");
        app->add_option("--lambda-d", lambda_d, "distribution loss weight");
        app->add_option("--generations", generations, "number of cycles");
        app->add_option("--iterations", iterations, "training iterations");
        app->add_option("--width", width, "similarity-block width (0 = derive from data)");
    }

    RunConfig build(const RunConfig& base) const {
        RunConfig c = base;
        if (!config.empty()) c = load_config(config);
        apply(c);
        return c;
    }

    RunConfig build() const { return build(RunConfig{}); }

    void apply(RunConfig& c) const {
        if (seed) c.seed = *seed;
        if (mode) c.mode = *mode;
        if (eta) c.distribution.eta = *eta;
        if (alpha) c.distribution.alpha = *alpha;
        if (lambda_f) c.trainer.lambda_f = *lambda_f;
        if (lambda_d) c.trainer.lambda_d = *lambda_d;
        if (generations) c.trainer.cycles = *generations;
        if (iterations) c.trainer.iterations = *iterations;
        if (width) c.width = *width;
        if (threshold) c.threshold = *threshold;
        if (rho) c.rho = *rho;
        c.finalize();
        c.validate();
    }
};

void print_metrics(const MetricReport& r) {
    std::cout << "wcp " << format_double(r.wcp) << "\nnmi " << format_double(r.nmi) << "\ncp "
              << format_double(r.cp) << "\ncr " << format_double(r.cr) << "\ncf " << format_double(r.cf) << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"Multi-modal person clustering on graphs of face, body and voice clues"};
    app.require_subcommand(1);

    // gen
    Overrides gen_o;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Generate a labeled synthetic dataset");
    gen_o.add_base(gen);
    gen->add_option("--rho", gen_o.rho, "fraction of body-bearing tracks whose body clues are swapped");
    gen->add_option("--out", gen_out, "output dataset directory")->required();

    // train
    Overrides train_o;
    std::string train_data, train_out, train_log;
    auto* train = app.add_subcommand("train", "Train a model on a labeled dataset");
    train_o.add_base(train);
    train_o.add_model(train);
    train->add_option("--data", train_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
    train->add_option("--out", train_out, "checkpoint path")->required();
    train->add_option("--log", train_log, "training log CSV");

    // cluster
    std::string cl_data, cl_model, cl_out, cl_sweep;
    std::optional<double> cl_threshold, cl_rho;
    std::optional<std::uint64_t> cl_seed;
    auto* clus = app.add_subcommand("cluster", "Cluster the tracks of a dataset with a trained model");
    clus->add_option("--data", cl_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
    clus->add_option("--model", cl_model, "checkpoint path")->required()->check(CLI::ExistingFile);
    clus->add_option("--out", cl_out, "assignment CSV (track_id,cluster_id)");
    auto* thr = clus->add_option("--threshold", cl_threshold, "linkage threshold");
    clus->add_option("--sweep", cl_sweep, "write metrics over the configured thresholds (needs labels)")
        ->excludes(thr);
    clus->add_option("--rho", cl_rho, "swap body clues of this fraction of tracks before clustering");
    clus->add_option("--seed", cl_seed, "seed for --rho");

    // eval
    std::string ev_data, ev_assign, ev_out;
    auto* ev = app.add_subcommand("eval", "Score an assignment against dataset labels");
    ev->add_option("--data", ev_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--assignment", ev_assign, "assignment CSV")->required()->check(CLI::ExistingFile);
    ev->add_option("--out", ev_out, "metric CSV");

    // gradcheck
    std::uint64_t gc_seed = 1;
    bool gc_corrupt = false;
    auto* gc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
    gc->add_option("--seed", gc_seed, "seed for the random draws");
    gc->add_flag("--corrupt-backward", gc_corrupt)->group("");

    CLI11_PARSE(app, argc, argv);

    if (*gen) {
        const RunConfig cfg = gen_o.build();
        Dataset data = generate(cfg.synth);
        if (cfg.rho > 0.0) data = inject_noise(data, NoiseConfig{cfg.rho}, derive_seed(cfg.seed, "noise"));
        save_dataset(gen_out, data);
        std::cout << "wrote " << data.tracks.size() << " tracks to " << gen_out << '\n';
        return 0;
    }
    if (*train) {
        const RunConfig cfg = train_o.build();
        const Dataset data = restrict_modalities(load_dataset(train_data), cfg.modalities());
        const int every = std::max(1, cfg.trainer.iterations / 20);
        auto result = train_model(data, cfg, [&](const LogRow& row) {
            if (row.iteration % every == 0 || row.iteration == cfg.trainer.iterations) {
                std::cerr << "iter " << row.iteration << " loss " << format_double(row.loss.total) << '\n';
            }
        });
        save_checkpoint(train_out, Checkpoint{result.model, cfg});
        if (!train_log.empty()) write_training_log(train_log, result.log);
        return 0;
    }
    if (*clus) {
        const Checkpoint ck = load_checkpoint(cl_model);
        RunConfig cfg = ck.config;
        if (cl_threshold) cfg.threshold = *cl_threshold;
        if (cl_rho) cfg.rho = *cl_rho;
        if (cl_seed) cfg.seed = *cl_seed;
        cfg.finalize();
        cfg.validate();
        Dataset data = load_dataset(cl_data);
        if (cfg.rho > 0.0) data = inject_noise(data, NoiseConfig{cfg.rho}, derive_seed(cfg.seed, "noise"));
        const auto restricted = restrict_modalities(data, cfg.modalities());
        const auto linkage = infer_linkage(restricted, ck.model, cfg);
        const auto ids = data.track_ids();
        if (!cl_sweep.empty()) {
            const auto rows = sweep(linkage, cfg.sweep, ids, ground_truth(data));
            write_sweep(cl_sweep, rows);
            for (const auto& r : rows) {
                std::cout << "threshold " << format_double(r.threshold) << " clusters " << r.clusters << " nmi "
                          << format_double(r.metrics.nmi) << " wcp " << format_double(r.metrics.wcp) << '\n';
            }
        }
        if (!cl_out.empty()) {
            const auto assignment = cluster(linkage, cfg.threshold, ids);
            write_assignment(cl_out, assignment);
            std::cout << assignment.cluster_count << " clusters over " << ids.size() << " tracks\n";
        }
        if (cl_out.empty() && cl_sweep.empty()) throw InvalidInput("cluster needs --out or --sweep");
        return 0;
    }
    if (*ev) {
        const Dataset data = load_dataset(ev_data);
        const auto assignment = read_assignment(ev_assign);
        const auto report = evaluate(to_partition(assignment), ground_truth(data));
        print_metrics(report);
        if (!ev_out.empty()) write_metrics(ev_out, report);
        return 0;
    }
    if (*gc) {
        const auto report = run_gradcheck(gc_seed, gc_corrupt);
        for (const auto& e : report.entries) {
            std::cout << (e.passed() ? "ok   " : "FAIL ") << e.name << ": max error " << e.max_error << " (tol "
                      << e.tolerance << ", " << e.draws << " draws)\n";
        }
        return report.passed() ? 0 : 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const radnet::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const radnet::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const radnet::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
