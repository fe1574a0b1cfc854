#include "ecprune/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ecprune/rng.hpp"
#include "ecprune/threading.hpp"

namespace ecprune {

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::ElimCompensation:  return "ec";
        case Strategy::NonLinearDirect:   return "nonlinear";
        case Strategy::Magnitude:         return "magnitude";
        case Strategy::GradientMagnitude: return "gradient_magnitude";
        case Strategy::Random:            return "random";
    }
    return "ec";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "ec") return Strategy::ElimCompensation;
    if (name == "nonlinear") return Strategy::NonLinearDirect;
    if (name == "magnitude") return Strategy::Magnitude;
    if (name == "gradient_magnitude") return Strategy::GradientMagnitude;
    if (name == "random") return Strategy::Random;
    throw std::invalid_argument("unknown strategy: " + name);
}

void PruneConfig::validate() const {
    if (ratio < 0.0 || ratio > 1.0) throw std::invalid_argument("ratio must be in [0, 1]");
    if (!(dead_neuron_eps >= 0.0)) throw std::invalid_argument("dead_neuron_eps must be >= 0");
}

CompensationSet zero_compensation(const Network& net) {
    CompensationSet c;
    c.layers.reserve(net.depth());
    for (const auto& l : net.layers) c.layers.emplace_back(l.weights.rows, l.weights.cols, 0.0);
    return c;
}

namespace {

ScoreSet zero_scores(const Network& net) {
    ScoreSet s;
    s.layers.reserve(net.depth());
    for (const auto& l : net.layers) s.layers.emplace_back(l.weights.rows, l.weights.cols, 0.0);
    return s;
}

// Samples over which the empirical expectation runs: everything, or a seeded
// subsample of size cfg.expectation_subset.
std::vector<std::size_t> expectation_indices(const Dataset& data, const PruneConfig& cfg) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (cfg.expectation_subset > 0 && cfg.expectation_subset < data.size()) {
        auto gen = make_engine(mix_seed(cfg.seed, 0x73756273ULL)); // "subs"
        shuffle(idx, gen);
        idx.resize(cfg.expectation_subset);
        std::sort(idx.begin(), idx.end());
    }
    return idx;
}

// Moment accumulators for the closed-form importance.
struct EcMoments {
    std::vector<Vector> d; // bias-shaped
    std::vector<Matrix> a; // weight-shaped
    std::vector<Matrix> b; // weight-shaped

    explicit EcMoments(const Network& net) {
        d.reserve(net.depth());
        a.reserve(net.depth());
        b.reserve(net.depth());
        for (const auto& l : net.layers) {
            d.emplace_back(l.weights.rows, 0.0);
            a.emplace_back(l.weights.rows, l.weights.cols, 0.0);
            b.emplace_back(l.weights.rows, l.weights.cols, 0.0);
        }
    }

    void add(const EcMoments& o) {
        for (std::size_t l = 0; l < d.size(); ++l) {
            for (std::size_t i = 0; i < d[l].size(); ++i) d[l][i] += o.d[l][i];
            for (std::size_t i = 0; i < a[l].data.size(); ++i) {
                a[l].data[i] += o.a[l].data[i];
                b[l].data[i] += o.b[l].data[i];
            }
        }
    }
};

struct EcScratch {
    ForwardTrace trace;
    Vector x;
    std::vector<Vector> sens; // one reverse sweep
    std::vector<Vector> gsq;  // sum_k g_ki^2 per layer
};

void accumulate_ec_sample(const Network& net, const Dataset& data, std::size_t sample,
                          EcMoments& mom, EcScratch& s) {
    const double* row = data.inputs.row(sample);
    s.x.assign(row, row + data.input_dim());
    forward_into(net, nullptr, s.x, s.trace);

    const std::size_t L = net.depth();
    s.gsq.resize(L);
    for (std::size_t l = 0; l < L; ++l) s.gsq[l].assign(net.layers[l].out_dim(), 0.0);

    for (std::size_t k = 0; k < net.output_dim(); ++k) {
        bias_sensitivity_sweep(net, s.trace, k, s.sens);
        for (std::size_t l = 0; l < L; ++l) {
            const Vector& g = s.sens[l];
            Vector& gsq = s.gsq[l];
            for (std::size_t i = 0; i < g.size(); ++i) gsq[i] += g[i] * g[i];
        }
    }

    // Rank-1 accumulation per layer: cost comparable to one forward pass.
    for (std::size_t l = 0; l < L; ++l) {
        const Vector& z = s.trace.layer_input(l);
        const std::size_t n = net.layers[l].out_dim();
        const std::size_t m = net.layers[l].in_dim();
        for (std::size_t i = 0; i < n; ++i) {
            const double g = s.gsq[l][i];
            if (g == 0.0) continue;
            mom.d[l][i] += g;
            double* arow = mom.a[l].row(i);
            double* brow = mom.b[l].row(i);
            for (std::size_t j = 0; j < m; ++j) {
                const double zj = z[j];
                brow[j] += g * zj;
                arow[j] += g * zj * zj;
            }
        }
    }
}

ScoreResult finalize_ec(const Network& net, EcMoments& mom, std::size_t n_samples,
                        double dead_eps) {
    const double inv = 1.0 / static_cast<double>(n_samples);
    ScoreResult out{zero_scores(net), zero_compensation(net)};
    for (std::size_t l = 0; l < net.depth(); ++l) {
        const Matrix& w = net.layers[l].weights;
        for (std::size_t i = 0; i < w.rows; ++i) {
            const double di = mom.d[l][i] * inv;
            if (!std::isfinite(di)) throw std::runtime_error("non-finite moment in ec_scores");
            double* score = out.scores.layers[l].row(i);
            double* comp = out.compensation.layers[l].row(i);
            const double* arow = mom.a[l].row(i);
            const double* brow = mom.b[l].row(i);
            const double* wrow = w.row(i);
            if (di < dead_eps) continue; // dead neuron: freely prunable
            for (std::size_t j = 0; j < w.cols; ++j) {
                const double aij = arow[j] * inv;
                const double bij = brow[j] * inv;
                if (!std::isfinite(aij) || !std::isfinite(bij))
                    throw std::runtime_error("non-finite moment in ec_scores");
                comp[j] = wrow[j] * bij / di;
                // Cauchy-Schwarz keeps a - b^2/d >= 0; clamp rounding dust.
                score[j] = std::max(0.0, wrow[j] * wrow[j] * (aij - bij * bij / di));
            }
        }
    }
    return out;
}

} // namespace

ScoreResult ec_scores_serial(const Network& net, const Dataset& data, const PruneConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    const auto idx = expectation_indices(data, cfg);
    EcMoments mom(net);
    EcScratch scratch;
    for (std::size_t sample : idx) accumulate_ec_sample(net, data, sample, mom, scratch);
    return finalize_ec(net, mom, idx.size(), cfg.dead_neuron_eps);
}

ScoreResult ec_scores_parallel(const Network& net, const Dataset& data, const PruneConfig& cfg,
                               int jobs) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    const auto idx = expectation_indices(data, cfg);

    std::vector<EcMoments> partial;
    partial.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) partial.emplace_back(net);

#pragma omp parallel num_threads(jobs)
    {
#ifdef _OPENMP
        const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
#else
        const std::size_t tid = 0;
#endif
        EcScratch scratch;
#pragma omp for schedule(static)
        for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(idx.size()); ++s)
            accumulate_ec_sample(net, data, idx[static_cast<std::size_t>(s)], partial[tid],
                                 scratch);
    }

    EcMoments mom(net);
    for (const auto& p : partial) mom.add(p);
    return finalize_ec(net, mom, idx.size(), cfg.dead_neuron_eps);
}

ScoreResult ec_scores(const Network& net, const Dataset& data, const PruneConfig& cfg) {
    const int jobs = max_jobs();
    if (jobs <= 1) return ec_scores_serial(net, data, cfg);
    return ec_scores_parallel(net, data, cfg, jobs);
}

namespace {

// Mean layer inputs E[z^{l-1}_j] and cached baseline outputs over the
// expectation samples.
struct NonlinearBase {
    std::vector<Vector> mean_z;
    Matrix baseline; // idx.size() x n_out
};

NonlinearBase nonlinear_baseline(const Network& net, const Dataset& data,
                                 const std::vector<std::size_t>& idx) {
    NonlinearBase base;
    base.mean_z.reserve(net.depth());
    for (const auto& l : net.layers) base.mean_z.emplace_back(l.in_dim(), 0.0);
    base.baseline = Matrix(idx.size(), net.output_dim());

    ForwardTrace trace;
    Vector x(data.input_dim());
    for (std::size_t s = 0; s < idx.size(); ++s) {
        const double* row = data.inputs.row(idx[s]);
        x.assign(row, row + data.input_dim());
        forward_into(net, nullptr, x, trace);
        for (std::size_t l = 0; l < net.depth(); ++l) {
            const Vector& z = trace.layer_input(l);
            for (std::size_t j = 0; j < z.size(); ++j) base.mean_z[l][j] += z[j];
        }
        const Vector& y = trace.output();
        for (std::size_t k = 0; k < y.size(); ++k) base.baseline(s, k) = y[k];
    }
    const double inv = 1.0 / static_cast<double>(idx.size());
    for (auto& mz : base.mean_z)
        for (double& v : mz) v *= inv;
    return base;
}

// Literal surgery for one weight: zero it, shift the adjacent bias, and
// re-evaluate the whole network on every expectation sample.
double nonlinear_one_weight(Network& work, const Dataset& data,
                            const std::vector<std::size_t>& idx, const NonlinearBase& base,
                            std::size_t l, std::size_t i, std::size_t j, double comp,
                            ForwardTrace& trace, Vector& x) {
    const double w_orig = work.layers[l].weights(i, j);
    const double b_orig = work.layers[l].bias[i];
    work.layers[l].weights(i, j) = 0.0;
    work.layers[l].bias[i] = b_orig + comp;

    double acc = 0.0;
    for (std::size_t s = 0; s < idx.size(); ++s) {
        const double* row = data.inputs.row(idx[s]);
        x.assign(row, row + data.input_dim());
        forward_into(work, nullptr, x, trace);
        const Vector& y = trace.output();
        const double* y0 = base.baseline.row(s);
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double d = y[k] - y0[k];
            acc += d * d;
        }
    }

    work.layers[l].weights(i, j) = w_orig;
    work.layers[l].bias[i] = b_orig;
    return acc / static_cast<double>(idx.size());
}

struct WeightRef {
    std::size_t l, i, j;
};

std::vector<WeightRef> all_weights(const Network& net) {
    std::vector<WeightRef> refs;
    refs.reserve(net.weight_count());
    for (std::size_t l = 0; l < net.depth(); ++l)
        for (std::size_t i = 0; i < net.layers[l].weights.rows; ++i)
            for (std::size_t j = 0; j < net.layers[l].weights.cols; ++j)
                refs.push_back({l, i, j});
    return refs;
}

} // namespace

ScoreResult nonlinear_scores_serial(const Network& net, const Dataset& data,
                                    const PruneConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    const auto idx = expectation_indices(data, cfg);
    const NonlinearBase base = nonlinear_baseline(net, data, idx);

    ScoreResult out{zero_scores(net), zero_compensation(net)};
    Network work = net;
    ForwardTrace trace;
    Vector x(data.input_dim());
    for (const WeightRef& r : all_weights(net)) {
        const double comp = net.layers[r.l].weights(r.i, r.j) * base.mean_z[r.l][r.j];
        out.compensation.layers[r.l](r.i, r.j) = comp;
        out.scores.layers[r.l](r.i, r.j) =
            nonlinear_one_weight(work, data, idx, base, r.l, r.i, r.j, comp, trace, x);
    }
    return out;
}

ScoreResult nonlinear_scores_parallel(const Network& net, const Dataset& data,
                                      const PruneConfig& cfg, int jobs) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    const auto idx = expectation_indices(data, cfg);
    const NonlinearBase base = nonlinear_baseline(net, data, idx);

    ScoreResult out{zero_scores(net), zero_compensation(net)};
    const auto refs = all_weights(net);

#pragma omp parallel num_threads(jobs)
    {
        Network work = net;
        ForwardTrace trace;
        Vector x(data.input_dim());
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t w = 0; w < static_cast<std::ptrdiff_t>(refs.size()); ++w) {
            const WeightRef& r = refs[static_cast<std::size_t>(w)];
            const double comp = net.layers[r.l].weights(r.i, r.j) * base.mean_z[r.l][r.j];
            out.compensation.layers[r.l](r.i, r.j) = comp;
            out.scores.layers[r.l](r.i, r.j) =
                nonlinear_one_weight(work, data, idx, base, r.l, r.i, r.j, comp, trace, x);
        }
    }
    return out;
}

ScoreResult nonlinear_scores(const Network& net, const Dataset& data, const PruneConfig& cfg) {
    const int jobs = max_jobs();
    if (jobs <= 1) return nonlinear_scores_serial(net, data, cfg);
    return nonlinear_scores_parallel(net, data, cfg, jobs);
}

ScoreSet magnitude_scores(const Network& net) {
    ScoreSet s = zero_scores(net);
    for (std::size_t l = 0; l < net.depth(); ++l)
        for (std::size_t i = 0; i < net.layers[l].weights.data.size(); ++i)
            s.layers[l].data[i] = std::fabs(net.layers[l].weights.data[i]);
    return s;
}

ScoreSet gradient_magnitude_scores(const Network& net, const Dataset& data, LossKind kind) {
    const BatchGradient bg = loss_gradient(net, nullptr, data, kind);
    ScoreSet s = zero_scores(net);
    for (std::size_t l = 0; l < net.depth(); ++l)
        for (std::size_t i = 0; i < net.layers[l].weights.data.size(); ++i)
            s.layers[l].data[i] =
                std::fabs(net.layers[l].weights.data[i] * bg.grads.weights[l].data[i]);
    return s;
}

ScoreSet random_scores(const Network& net, std::uint64_t seed) {
    auto gen = make_engine(mix_seed(seed, 0x726E6473ULL)); // "rnds"
    ScoreSet s = zero_scores(net);
    for (auto& layer : s.layers)
        for (double& v : layer.data) v = uniform_double(gen);
    return s;
}

MaskSet select_mask(const ScoreSet& scores, double ratio) {
    if (ratio < 0.0 || ratio > 1.0) throw std::invalid_argument("ratio must be in [0, 1]");
    const std::size_t total = scores.entry_count();
    // llrint under the default FP environment rounds ties to even.
    const std::size_t n_prune =
        static_cast<std::size_t>(std::llrint(ratio * static_cast<double>(total)));

    struct Entry {
        double score;
        std::uint32_t l, i, j;
    };
    std::vector<Entry> entries;
    entries.reserve(total);
    for (std::size_t l = 0; l < scores.layers.size(); ++l) {
        const Matrix& m = scores.layers[l];
        for (std::size_t i = 0; i < m.rows; ++i)
            for (std::size_t j = 0; j < m.cols; ++j)
                entries.push_back({m(i, j), static_cast<std::uint32_t>(l),
                                   static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
    // Entries were emitted in ascending (layer, row, column) order, so a
    // stable sort on the score alone realizes the tie-break rule.
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.score < b.score; });

    MaskSet mask;
    mask.layers.reserve(scores.layers.size());
    for (const auto& m : scores.layers)
        mask.layers.emplace_back(m.rows, m.cols, std::uint8_t{1});
    for (std::size_t e = 0; e < n_prune; ++e)
        mask.layers[entries[e].l](entries[e].i, entries[e].j) = 0;
    return mask;
}

Network apply_prune(const Network& net, const MaskSet& mask, const CompensationSet* comp) {
    if (mask.layers.size() != net.depth())
        throw std::invalid_argument("mask layer count mismatch");
    Network pruned = net;
    for (std::size_t l = 0; l < net.depth(); ++l) {
        Layer& layer = pruned.layers[l];
        const auto& lm = mask.layers[l];
        if (lm.rows != layer.weights.rows || lm.cols != layer.weights.cols)
            throw std::invalid_argument("mask shape mismatch at layer " + std::to_string(l));
        if (comp && !comp->layers[l].same_shape(layer.weights))
            throw std::invalid_argument("compensation shape mismatch at layer " +
                                        std::to_string(l));
        for (std::size_t i = 0; i < layer.weights.rows; ++i) {
            double delta = 0.0;
            std::size_t pruned_in_row = 0;
            for (std::size_t j = 0; j < layer.weights.cols; ++j) {
                if (lm(i, j)) continue;
                layer.weights(i, j) = 0.0;
                ++pruned_in_row;
                if (comp) delta += comp->layers[l](i, j);
            }
            if (comp && pruned_in_row > 0) layer.bias[i] += delta;
        }
    }
    return pruned;
}

ScoreResult compute_scores(const Network& net, const Dataset& data, const PruneConfig& cfg,
                           LossKind kind) {
    switch (cfg.strategy) {
        case Strategy::ElimCompensation:
            return ec_scores(net, data, cfg);
        case Strategy::NonLinearDirect:
            return nonlinear_scores(net, data, cfg);
        case Strategy::Magnitude:
            return {magnitude_scores(net), zero_compensation(net)};
        case Strategy::GradientMagnitude:
            return {gradient_magnitude_scores(net, data, kind), zero_compensation(net)};
        case Strategy::Random:
            return {random_scores(net, cfg.seed), zero_compensation(net)};
    }
    throw std::logic_error("unreachable strategy");
}

double pruning_ratio(const MaskSet& mask, std::size_t original_count) {
    if (original_count == 0) throw std::invalid_argument("original_count must be > 0");
    return 1.0 -
           static_cast<double>(mask.nonzero_count()) / static_cast<double>(original_count);
}

} // namespace ecprune
