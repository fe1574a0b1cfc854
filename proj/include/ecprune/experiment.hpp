#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecprune/adam.hpp"
#include "ecprune/data_io.hpp"
#include "ecprune/loss.hpp"
#include "ecprune/scores.hpp"

namespace ecprune {

enum class DatasetKind { Synth, Tabular, Mnist };

struct DatasetSpec {
    DatasetKind kind = DatasetKind::Synth;
    // synth
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    // tabular
    std::string path;
    // mnist (IDX file pairs; train_subset > 0 keeps a seeded random subset)
    std::string train_images, train_labels, test_images, test_labels;
    std::size_t train_subset = 0;
    std::size_t test_subset = 0;

    NoiseSpec noise;           // regression targets only
    double train_fraction = 0.8; // synth/tabular
    std::uint64_t split_seed = 0;
};

// A strategy cell in the experiment matrix: one of the five mask strategies,
// or the fully-connected baseline that retrains a uniformly narrowed
// architecture from scratch.
struct StrategyRef {
    bool fully_connected = false;
    Strategy strategy = Strategy::ElimCompensation;

    std::string name() const { return fully_connected ? "fully_connected" : strategy_name(strategy); }
};

StrategyRef strategy_ref_from_name(const std::string& name);

struct ExperimentSpec {
    DatasetSpec dataset;
    std::vector<std::size_t> arch;   // layer widths, input first
    ActKind hidden_activation = ActKind::PReLU;
    LossKind loss = LossKind::MeanSquaredError;
    std::vector<StrategyRef> strategies;
    std::vector<double> ratios;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    TrainConfig train;    // initial training (seed field is ignored; per-cell seeds are derived)
    TrainConfig finetune; // post-prune fine-tuning
    std::size_t expectation_subset = 0;
    double dead_neuron_eps = 1e-12;
    bool apply_compensation = true; // for ec/nonlinear at prune time
    bool zero_score_timing = false; // report score_wall_ms as 0 (reproducible byte-level output)

    void validate() const;
};

// Spec files are JSON mirroring ExperimentSpec; see README for the schema.
ExperimentSpec load_experiment_spec(const std::string& path);
ExperimentSpec parse_experiment_spec(const std::string& json_text);

struct ReportRow {
    std::string dataset;
    double noise = 0.0;
    std::string arch;
    std::string strategy;
    std::uint64_t seed = 0;
    double ratio = 0.0;
    double baseline_loss = 0.0;
    double loss_after_prune = 0.0;
    double loss_after_finetune = 0.0;
    double score_wall_ms = 0.0;
    std::string error; // empty on success; failed cells carry NaN losses
};

struct ExperimentReport {
    std::vector<ReportRow> rows;

    bool all_ok() const {
        for (const auto& r : rows)
            if (!r.error.empty()) return false;
        return true;
    }
};

std::size_t count_weights(const std::vector<std::size_t>& arch);

// Uniformly narrows the hidden widths (single scale, round, floor 1) to the
// densest architecture whose weight count stays within round((1-r)*|W|).
std::vector<std::size_t> shrink_architecture(const std::vector<std::size_t>& arch, double ratio);

// Runs the full (strategy, seed, ratio) matrix: train to a checkpoint, score,
// mask, prune (compensating where the strategy defines it), fine-tune, and
// record test losses. Failed cells are recorded and the run continues.
ExperimentReport run_experiment(const ExperimentSpec& spec);

enum class ReportFormat { Csv, Json };

void write_report(const ExperimentReport& report, const std::string& path, ReportFormat format);
ExperimentReport read_report(const std::string& path, ReportFormat format);

} // namespace ecprune
