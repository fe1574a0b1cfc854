#include "ecprune/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

#include "ecprune/rng.hpp"
#include "ecprune/train.hpp"

namespace ecprune {
namespace {

using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kSaltTrain = 0x7472616E; // "tran"
constexpr std::uint64_t kSaltFine = 0x66696E65;  // "fine"
constexpr std::uint64_t kSaltSubset = 0x6D737562; // "msub"

std::string format_arch(const std::vector<std::size_t>& arch) {
    std::string out;
    for (std::size_t i = 0; i < arch.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(arch[i]);
    }
    return out;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct PreparedData {
    Dataset train;
    Dataset test;
    std::string name;
    double noise = 0.0;
};

Dataset seeded_subset(const Dataset& data, std::size_t n, std::uint64_t seed) {
    if (n == 0 || n >= data.size()) return data;
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto engine = make_engine(mix_seed(seed, kSaltSubset));
    shuffle(order, engine);
    order.resize(n);
    std::sort(order.begin(), order.end());
    return take_rows(data, order, data.name + "/subset");
}

PreparedData prepare_dataset(const DatasetSpec& d) {
    PreparedData out;
    switch (d.kind) {
        case DatasetKind::Synth: {
            Dataset full = synth_regression(SynthKind::DiffusionProfile, d.n, d.seed);
            out.name = full.name;
            full = add_noise(full, d.noise);
            auto s = split(full, d.train_fraction, d.split_seed);
            out.train = std::move(s.train);
            out.test = std::move(s.test);
            break;
        }
        case DatasetKind::Tabular: {
            Dataset full = load_tabular(d.path);
            std::size_t slash = d.path.find_last_of("/\\");
            out.name = slash == std::string::npos ? d.path : d.path.substr(slash + 1);
            full = add_noise(full, d.noise);
            auto s = split(full, d.train_fraction, d.split_seed);
            out.train = std::move(s.train);
            out.test = std::move(s.test);
            break;
        }
        case DatasetKind::Mnist: {
            if (d.noise.amplitude != 0.0)
                throw std::runtime_error("noise applies to regression targets only");
            out.train = seeded_subset(load_mnist(d.train_images, d.train_labels), d.train_subset,
                                      d.split_seed);
            out.test = seeded_subset(load_mnist(d.test_images, d.test_labels), d.test_subset,
                                     mix_seed(d.split_seed, 1));
            out.name = "mnist";
            break;
        }
    }
    out.noise = d.noise.amplitude;
    return out;
}

TrainConfig with_seed(TrainConfig cfg, std::uint64_t seed) {
    cfg.seed = seed;
    return cfg;
}

struct Checkpoint {
    bool ready = false;
    std::string error;
    Network net;
    double baseline_loss = kNan;
};

bool strategy_compensates(Strategy s) {
    return s == Strategy::ElimCompensation || s == Strategy::NonLinearDirect;
}

void check_field(const std::string& value, const char* what) {
    if (value.find_first_of(",\n\r") != std::string::npos)
        throw std::runtime_error(std::string(what) + " '" + value + "' cannot appear in a CSV field");
}

const char* kCsvHeader =
    "dataset,noise,arch,strategy,seed,ratio,baseline_loss,loss_after_prune,"
    "loss_after_finetune,score_wall_ms";

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_report_double(const std::string& text, std::size_t row) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw std::runtime_error("report row " + std::to_string(row) + ": cannot parse '" + text +
                                 "' as a number");
    return v;
}

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw std::runtime_error("spec: unknown key '" + it.key() + "' in " + where);
    }
}

TrainConfig parse_train_config(const json& j, const std::string& where) {
    require_keys(j, {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon"}, where);
    TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.epsilon_adam = j.value("epsilon", cfg.epsilon_adam);
    return cfg;
}

} // namespace

StrategyRef strategy_ref_from_name(const std::string& name) {
    StrategyRef ref;
    if (name == "fully_connected") {
        ref.fully_connected = true;
        return ref;
    }
    ref.strategy = strategy_from_name(name);
    return ref;
}

void ExperimentSpec::validate() const {
    if (arch.size() < 2) throw std::invalid_argument("architecture needs at least two layers");
    for (std::size_t w : arch)
        if (w == 0) throw std::invalid_argument("architecture widths must be positive");
    if (strategies.empty()) throw std::invalid_argument("no strategies listed");
    if (ratios.empty()) throw std::invalid_argument("no ratios listed");
    for (double r : ratios)
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("ratio outside [0, 1]");
    if (seeds.empty()) throw std::invalid_argument("no seeds listed");
    train.validate();
    finetune.validate();
    if (!(dead_neuron_eps >= 0.0)) throw std::invalid_argument("dead_neuron_eps must be >= 0");
    switch (dataset.kind) {
        case DatasetKind::Synth:
            if (dataset.n == 0) throw std::invalid_argument("synth dataset needs n > 0");
            break;
        case DatasetKind::Tabular:
            if (dataset.path.empty()) throw std::invalid_argument("tabular dataset needs a path");
            break;
        case DatasetKind::Mnist:
            if (dataset.train_images.empty() || dataset.train_labels.empty() ||
                dataset.test_images.empty() || dataset.test_labels.empty())
                throw std::invalid_argument("mnist dataset needs all four IDX paths");
            break;
    }
}

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
    require_keys(j,
                 {"dataset", "architecture", "loss", "strategies", "ratios", "seeds", "train",
                  "finetune", "prune", "zero_score_timing"},
                 "top level");
    ExperimentSpec spec;

    const json& d = j.at("dataset");
    require_keys(d,
                 {"kind", "n", "seed", "path", "train_images", "train_labels", "test_images",
                  "test_labels", "train_subset", "test_subset", "noise", "train_fraction",
                  "split_seed"},
                 "dataset");
    const std::string kind = d.at("kind").get<std::string>();
    if (kind == "synth")
        spec.dataset.kind = DatasetKind::Synth;
    else if (kind == "tabular")
        spec.dataset.kind = DatasetKind::Tabular;
    else if (kind == "mnist")
        spec.dataset.kind = DatasetKind::Mnist;
    else
        throw std::runtime_error("spec: unknown dataset kind '" + kind + "'");
    spec.dataset.n = d.value("n", spec.dataset.n);
    spec.dataset.seed = d.value("seed", spec.dataset.seed);
    spec.dataset.path = d.value("path", spec.dataset.path);
    spec.dataset.train_images = d.value("train_images", std::string());
    spec.dataset.train_labels = d.value("train_labels", std::string());
    spec.dataset.test_images = d.value("test_images", std::string());
    spec.dataset.test_labels = d.value("test_labels", std::string());
    spec.dataset.train_subset = d.value("train_subset", spec.dataset.train_subset);
    spec.dataset.test_subset = d.value("test_subset", spec.dataset.test_subset);
    spec.dataset.train_fraction = d.value("train_fraction", spec.dataset.train_fraction);
    spec.dataset.split_seed = d.value("split_seed", spec.dataset.split_seed);
    if (d.contains("noise")) {
        require_keys(d["noise"], {"amplitude", "seed"}, "dataset.noise");
        spec.dataset.noise.amplitude = d["noise"].value("amplitude", 0.0);
        spec.dataset.noise.seed = d["noise"].value("seed", std::uint64_t(0));
    }

    const json& a = j.at("architecture");
    require_keys(a, {"sizes", "hidden_activation"}, "architecture");
    spec.arch = a.at("sizes").get<std::vector<std::size_t>>();
    spec.hidden_activation = act_from_name(a.value("hidden_activation", std::string("prelu")));

    if (j.contains("loss"))
        spec.loss = loss_from_name(j["loss"].get<std::string>());
    else
        spec.loss = spec.dataset.kind == DatasetKind::Mnist ? LossKind::SoftmaxCrossEntropy
                                                            : LossKind::MeanSquaredError;

    for (const auto& s : j.at("strategies"))
        spec.strategies.push_back(strategy_ref_from_name(s.get<std::string>()));
    spec.ratios = j.at("ratios").get<std::vector<double>>();
    if (j.contains("seeds")) spec.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("train")) spec.train = parse_train_config(j["train"], "train");
    if (j.contains("finetune")) spec.finetune = parse_train_config(j["finetune"], "finetune");
    if (j.contains("prune")) {
        const json& p = j["prune"];
        require_keys(p, {"expectation_subset", "dead_neuron_eps", "apply_compensation"}, "prune");
        spec.expectation_subset = p.value("expectation_subset", spec.expectation_subset);
        spec.dead_neuron_eps = p.value("dead_neuron_eps", spec.dead_neuron_eps);
        spec.apply_compensation = p.value("apply_compensation", spec.apply_compensation);
    }
    spec.zero_score_timing = j.value("zero_score_timing", false);
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_spec(ss.str());
}

std::size_t count_weights(const std::vector<std::size_t>& arch) {
    if (arch.size() < 2) throw std::invalid_argument("architecture needs at least two layers");
    std::size_t n = 0;
    for (std::size_t l = 1; l < arch.size(); ++l) n += arch[l] * arch[l - 1];
    return n;
}

namespace {

std::vector<std::size_t> widths_at(const std::vector<std::size_t>& arch, double s) {
    std::vector<std::size_t> out = arch;
    for (std::size_t l = 1; l + 1 < arch.size(); ++l)
        out[l] = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llrint(s * double(arch[l]))));
    return out;
}

} // namespace

std::vector<std::size_t> shrink_architecture(const std::vector<std::size_t>& arch, double ratio) {
    if (!(ratio >= 0.0 && ratio < 1.0))
        throw std::invalid_argument("shrink ratio must be in [0, 1)");
    if (arch.size() < 3) throw std::invalid_argument("no hidden layers to narrow");
    const auto target =
        static_cast<std::size_t>(std::llrint((1.0 - ratio) * double(count_weights(arch))));
    if (count_weights(widths_at(arch, 0.0)) > target)
        throw std::runtime_error("target weight count " + std::to_string(target) +
                                 " is below the all-ones architecture");
    if (count_weights(widths_at(arch, 1.0)) <= target) return widths_at(arch, 1.0);

    // count_weights(widths_at(s)) is a nondecreasing step function of s;
    // binary-search the largest feasible s.
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (count_weights(widths_at(arch, mid)) <= target)
            lo = mid;
        else
            hi = mid;
    }
    return widths_at(arch, lo);
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    PreparedData data = prepare_dataset(spec.dataset);
    check_loss_compatible(spec.loss, data.train);
    if (data.train.input_dim() != spec.arch.front())
        throw std::runtime_error("architecture input width " + std::to_string(spec.arch.front()) +
                                 " does not match dataset input dimension " +
                                 std::to_string(data.train.input_dim()));
    if (data.train.output_dim() != spec.arch.back())
        throw std::runtime_error("architecture output width " + std::to_string(spec.arch.back()) +
                                 " does not match dataset output dimension " +
                                 std::to_string(data.train.output_dim()));

    const std::string arch_str = format_arch(spec.arch);
    std::unordered_map<std::uint64_t, Checkpoint> checkpoints;
    auto get_checkpoint = [&](std::uint64_t seed) -> Checkpoint& {
        Checkpoint& cp = checkpoints[seed];
        if (cp.ready || !cp.error.empty()) return cp;
        try {
            Network net0 = make_mlp(spec.arch, spec.hidden_activation, seed);
            TrainResult tr = train(net0, nullptr, data.train,
                                   with_seed(spec.train, mix_seed(seed, kSaltTrain)), spec.loss);
            cp.net = std::move(tr.net);
            cp.baseline_loss = dataset_loss(cp.net, nullptr, data.test, spec.loss);
            cp.ready = true;
        } catch (const std::exception& e) {
            cp.error = e.what();
        }
        return cp;
    };

    ExperimentReport report;
    for (const StrategyRef& strat : spec.strategies) {
        for (std::uint64_t seed : spec.seeds) {
            Checkpoint& cp = get_checkpoint(seed);

            // One scoring pass serves every ratio of this (strategy, seed).
            ScoreResult scored;
            double score_ms = kNan;
            std::string score_error;
            if (!strat.fully_connected && cp.ready) {
                PruneConfig cfg;
                cfg.strategy = strat.strategy;
                cfg.expectation_subset = spec.expectation_subset;
                cfg.dead_neuron_eps = spec.dead_neuron_eps;
                cfg.seed = seed;
                try {
                    const auto t0 = std::chrono::steady_clock::now();
                    scored = compute_scores(cp.net, data.train, cfg, spec.loss);
                    const auto t1 = std::chrono::steady_clock::now();
                    score_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
                } catch (const std::exception& e) {
                    score_error = e.what();
                }
            }

            for (double ratio : spec.ratios) {
                ReportRow row;
                row.dataset = data.name;
                row.noise = data.noise;
                row.arch = arch_str;
                row.strategy = strat.name();
                row.seed = seed;
                row.ratio = ratio;
                row.baseline_loss = cp.baseline_loss;
                row.loss_after_prune = kNan;
                row.loss_after_finetune = kNan;
                row.score_wall_ms = strat.fully_connected ? 0.0 : score_ms;

                try {
                    if (!cp.error.empty()) throw std::runtime_error(cp.error);
                    if (strat.fully_connected) {
                        const auto arch2 = shrink_architecture(spec.arch, ratio);
                        Network net0 = make_mlp(arch2, spec.hidden_activation, seed);
                        TrainResult t1 =
                            train(net0, nullptr, data.train,
                                  with_seed(spec.train, mix_seed(seed, kSaltTrain)), spec.loss);
                        row.loss_after_prune = dataset_loss(t1.net, nullptr, data.test, spec.loss);
                        TrainResult t2 =
                            train(t1.net, nullptr, data.train,
                                  with_seed(spec.finetune, mix_seed(seed, kSaltFine)), spec.loss);
                        row.loss_after_finetune =
                            dataset_loss(t2.net, nullptr, data.test, spec.loss);
                    } else {
                        if (!score_error.empty()) throw std::runtime_error(score_error);
                        MaskSet mask = select_mask(scored.scores, ratio);
                        const CompensationSet* comp =
                            (spec.apply_compensation && strategy_compensates(strat.strategy))
                                ? &scored.compensation
                                : nullptr;
                        Network pruned = apply_prune(cp.net, mask, comp);
                        row.loss_after_prune =
                            dataset_loss(pruned, nullptr, data.test, spec.loss);
                        TrainResult ft =
                            train(pruned, &mask, data.train,
                                  with_seed(spec.finetune, mix_seed(seed, kSaltFine)), spec.loss);
                        row.loss_after_finetune =
                            dataset_loss(ft.net, nullptr, data.test, spec.loss);
                    }
                } catch (const std::exception& e) {
                    row.error = e.what();
                    row.loss_after_prune = kNan;
                    row.loss_after_finetune = kNan;
                }
                if (spec.zero_score_timing) row.score_wall_ms = 0.0;
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

void write_report(const ExperimentReport& report, const std::string& path, ReportFormat format) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");

    if (format == ReportFormat::Csv) {
        out << kCsvHeader << '\n';
        for (const ReportRow& r : report.rows) {
            check_field(r.dataset, "dataset name");
            check_field(r.arch, "architecture");
            check_field(r.strategy, "strategy");
            out << r.dataset << ',' << fmt17(r.noise) << ',' << r.arch << ',' << r.strategy << ','
                << r.seed << ',' << fmt17(r.ratio) << ',' << fmt17(r.baseline_loss) << ','
                << fmt17(r.loss_after_prune) << ',' << fmt17(r.loss_after_finetune) << ','
                << fmt17(r.score_wall_ms) << '\n';
        }
    } else {
        json rows = json::array();
        for (const ReportRow& r : report.rows) {
            json row;
            row["dataset"] = r.dataset;
            row["noise"] = r.noise;
            row["arch"] = r.arch;
            row["strategy"] = r.strategy;
            row["seed"] = r.seed;
            row["ratio"] = r.ratio;
            row["baseline_loss"] = r.baseline_loss;
            row["loss_after_prune"] = r.loss_after_prune;
            row["loss_after_finetune"] = r.loss_after_finetune;
            row["score_wall_ms"] = r.score_wall_ms;
            row["error"] = r.error;
            rows.push_back(std::move(row));
        }
        out << json{{"rows", std::move(rows)}}.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("write error on '" + path + "'");
}

ExperimentReport read_report(const std::string& path, ReportFormat format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    ExperimentReport report;

    if (format == ReportFormat::Csv) {
        std::string line;
        if (!std::getline(in, line) || line != kCsvHeader)
            throw std::runtime_error("'" + path + "': unexpected CSV header");
        for (std::size_t n = 2; std::getline(in, line); ++n) {
            if (line.empty()) continue;
            const auto f = split_fields(line);
            if (f.size() != 10)
                throw std::runtime_error("'" + path + "': row " + std::to_string(n) + " has " +
                                         std::to_string(f.size()) + " fields, expected 10");
            ReportRow r;
            r.dataset = f[0];
            r.noise = parse_report_double(f[1], n);
            r.arch = f[2];
            r.strategy = f[3];
            r.seed = std::strtoull(f[4].c_str(), nullptr, 10);
            r.ratio = parse_report_double(f[5], n);
            r.baseline_loss = parse_report_double(f[6], n);
            r.loss_after_prune = parse_report_double(f[7], n);
            r.loss_after_finetune = parse_report_double(f[8], n);
            r.score_wall_ms = parse_report_double(f[9], n);
            report.rows.push_back(std::move(r));
        }
    } else {
        json j = json::parse(in);
        auto get_double = [](const json& v) {
            return v.is_null() ? kNan : v.get<double>();
        };
        for (const json& row : j.at("rows")) {
            ReportRow r;
            r.dataset = row.at("dataset").get<std::string>();
            r.noise = get_double(row.at("noise"));
            r.arch = row.at("arch").get<std::string>();
            r.strategy = row.at("strategy").get<std::string>();
            r.seed = row.at("seed").get<std::uint64_t>();
            r.ratio = get_double(row.at("ratio"));
            r.baseline_loss = get_double(row.at("baseline_loss"));
            r.loss_after_prune = get_double(row.at("loss_after_prune"));
            r.loss_after_finetune = get_double(row.at("loss_after_finetune"));
            r.score_wall_ms = get_double(row.at("score_wall_ms"));
            r.error = row.value("error", std::string());
            report.rows.push_back(std::move(r));
        }
    }
    return report;
}

} // namespace ecprune
