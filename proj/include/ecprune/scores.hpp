#pragma once

#include <cstdint>
#include <string>

#include "ecprune/gradient.hpp"
#include "ecprune/network.hpp"

namespace ecprune {

// Per-weight importance values, aligned with the weight matrices.
struct ScoreSet {
    std::vector<Matrix> layers;
    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& m : layers) n += m.size();
        return n;
    }
};

// Per-weight bias compensations: entry (i, j) of layer l is the perturbation
// added to bias i if weight (i, j) is pruned.
struct CompensationSet {
    std::vector<Matrix> layers;
};

enum class Strategy { ElimCompensation, NonLinearDirect, Magnitude, GradientMagnitude, Random };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct PruneConfig {
    double ratio = 0.0;
    Strategy strategy = Strategy::ElimCompensation;
    std::size_t expectation_subset = 0; // 0 = use every sample
    double dead_neuron_eps = 1e-12;
    std::uint64_t seed = 0; // Random strategy and expectation subsampling

    void validate() const;
};

struct ScoreResult {
    ScoreSet scores;
    CompensationSet compensation;
};

// Importance by optimal bias compensation of the linearized output change.
// With per-sample sensitivities g_ki = dy_k/db^l_i and layer inputs z_j,
// three empirical moments per layer
//   D_i  = sum_k E[g_ki^2]
//   B_ij = sum_k E[g_ki^2 z_j]
//   A_ij = sum_k E[g_ki^2 z_j^2]
// give the optimal compensation W_ij B_ij / D_i and importance
// W_ij^2 (A_ij - B_ij^2 / D_i). Neurons with D_i below dead_neuron_eps get
// compensation 0 and importance 0.
ScoreResult ec_scores(const Network& net, const Dataset& data, const PruneConfig& cfg);
ScoreResult ec_scores_serial(const Network& net, const Dataset& data, const PruneConfig& cfg);
ScoreResult ec_scores_parallel(const Network& net, const Dataset& data, const PruneConfig& cfg,
                               int jobs);

// Brute-force importance with mean-signal compensation: each weight is
// zeroed in turn, its bias compensated by W_ij E[z_j], and the expected
// squared output discrepancy measured by re-evaluating the network on every
// sample. Cost scales with weight_count() full dataset passes.
ScoreResult nonlinear_scores(const Network& net, const Dataset& data, const PruneConfig& cfg);
ScoreResult nonlinear_scores_serial(const Network& net, const Dataset& data,
                                    const PruneConfig& cfg);
ScoreResult nonlinear_scores_parallel(const Network& net, const Dataset& data,
                                      const PruneConfig& cfg, int jobs);

// |W_ij|.
ScoreSet magnitude_scores(const Network& net);

// |W_ij * dL/dW_ij| with the full-dataset mean loss gradient.
ScoreSet gradient_magnitude_scores(const Network& net, const Dataset& data, LossKind kind);

// I.i.d. uniform scores, deterministic per seed.
ScoreSet random_scores(const Network& net, std::uint64_t seed);

// Masks out exactly round(r * |W|) entries (ties-to-even rounding), chosen
// as the globally smallest scores; ties break by ascending (layer, row,
// column).
MaskSet select_mask(const ScoreSet& scores, double ratio);

// W^l <- M^l o W^l and, when compensations are given, each bias receives the
// summed compensation of its pruned row entries.
Network apply_prune(const Network& net, const MaskSet& mask, const CompensationSet* comp);

// Strategy dispatch; non-compensating strategies return an all-zero
// compensation set.
ScoreResult compute_scores(const Network& net, const Dataset& data, const PruneConfig& cfg,
                           LossKind kind);

// 1 - nonzero(mask) / original_count.
double pruning_ratio(const MaskSet& mask, std::size_t original_count);

CompensationSet zero_compensation(const Network& net);

} // namespace ecprune
