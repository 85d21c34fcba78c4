#pragma once

#include "radnet/clusterer.hpp"
#include "radnet/config.hpp"
#include "radnet/metrics.hpp"
#include "radnet/trainer.hpp"
#include "radnet/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace radnet {

/// Dataset directory layout:
///   manifest.json      {"format": 1, "dims": {...}, "tracks": T, "clues": {...}}
///   face.txt, body.txt, voice.txt
///                      one clue per line: clue_id track_id identity f1 ... fD
///                      (identity -1 = unknown); files of absent modalities are omitted
///   tracks.csv         track_id,identity,n_face,n_body,n_voice (association table)
void save_dataset(const std::filesystem::path& dir, const Dataset& data);

/// Reads and validates a dataset directory. Clue lines referring to tracks
/// missing from tracks.csv, mismatched counts, duplicate clue ids, wrong
/// widths and non-finite values all raise InvalidInput.
Dataset load_dataset(const std::filesystem::path& dir);

/// Binary checkpoint:
///   "RADNETCK", u32 version, u32 header length, JSON header (model shape and
///   the configuration used to train), u32 tensor count, then per tensor
///   u32 name length, name, u32 rows, u32 cols, rows*cols little-endian f64
///   in column-major order.
struct Checkpoint {
    Model model;
    RunConfig config;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct LogRow {
    int iteration = 0;
    LossBreakdown loss;
    double lr = 0.0;
};

void write_training_log(const std::filesystem::path& path, const std::vector<LogRow>& rows);
void write_assignment(const std::filesystem::path& path, const ClusterAssignment& a);
ClusterAssignment read_assignment(const std::filesystem::path& path);
void write_metrics(const std::filesystem::path& path, const MetricReport& r);

struct SweepRow {
    double threshold = 0.0;
    MetricReport metrics;
    int clusters = 0;
};

void write_sweep(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

/// Shortest round-trip decimal form.
std::string format_double(double v);

} // namespace radnet
