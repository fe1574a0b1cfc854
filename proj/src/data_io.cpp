#include "ecprune/data_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ecprune/rng.hpp"

namespace ecprune {
namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error("read error on '" + path + "'");
    return bytes;
}

std::uint32_t be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                   const std::string& path) {
    if (offset + 4 > bytes.size())
        throw std::runtime_error("'" + path + "': truncated header at byte " +
                                 std::to_string(offset));
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& text, std::size_t row, const std::string& column) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE)
        throw std::runtime_error("row " + std::to_string(row) + ", column '" + column +
                                 "': cannot parse '" + text + "' as a number");
    return v;
}

} // namespace

Dataset load_mnist(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_file(images_path);
    const auto lab = read_file(labels_path);

    const std::uint32_t img_magic = be32(img, 0, images_path);
    if (img_magic != 2051)
        throw std::runtime_error("'" + images_path + "': bad magic " + std::to_string(img_magic) +
                                 " at byte 0 (expected 2051)");
    const std::uint32_t lab_magic = be32(lab, 0, labels_path);
    if (lab_magic != 2049)
        throw std::runtime_error("'" + labels_path + "': bad magic " + std::to_string(lab_magic) +
                                 " at byte 0 (expected 2049)");

    const std::uint32_t n = be32(img, 4, images_path);
    const std::uint32_t rows = be32(img, 8, images_path);
    const std::uint32_t cols = be32(img, 12, images_path);
    const std::uint32_t n_lab = be32(lab, 4, labels_path);
    if (n != n_lab)
        throw std::runtime_error("image/label count mismatch: " + std::to_string(n) + " vs " +
                                 std::to_string(n_lab));

    const std::size_t pixels = std::size_t(rows) * cols;
    const std::size_t want_img = 16 + std::size_t(n) * pixels;
    if (img.size() != want_img)
        throw std::runtime_error("'" + images_path + "': expected " + std::to_string(want_img) +
                                 " bytes, got " + std::to_string(img.size()));
    const std::size_t want_lab = 8 + n;
    if (lab.size() != want_lab)
        throw std::runtime_error("'" + labels_path + "': expected " + std::to_string(want_lab) +
                                 " bytes, got " + std::to_string(lab.size()));

    Matrix inputs(n, pixels);
    std::vector<std::int32_t> labels(n);
    for (std::size_t s = 0; s < n; ++s) {
        const unsigned char* px = img.data() + 16 + s * pixels;
        double* out = inputs.row(s);
        for (std::size_t p = 0; p < pixels; ++p) out[p] = px[p] / 255.0;
        const unsigned char digit = lab[8 + s];
        if (digit > 9)
            throw std::runtime_error("'" + labels_path + "': label " + std::to_string(int(digit)) +
                                     " at byte " + std::to_string(8 + s) + " is out of range");
        labels[s] = digit;
    }
    return make_classification_dataset(std::move(inputs), std::move(labels), 10, "mnist");
}

Dataset load_tabular(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "': missing header row");
    const auto header = split_csv_line(line);
    if (header.empty()) throw std::runtime_error("'" + path + "': empty header row");

    std::vector<std::size_t> input_cols, target_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].rfind("target", 0) == 0)
            target_cols.push_back(c);
        else
            input_cols.push_back(c);
    }
    if (target_cols.empty())
        throw std::runtime_error("'" + path + "': no column name starts with \"target\"");
    if (input_cols.empty())
        throw std::runtime_error("'" + path + "': no input columns");

    std::vector<double> in_vals, tg_vals;
    std::size_t n = 0;
    for (std::size_t row = 2; std::getline(in, line); ++row) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("'" + path + "': row " + std::to_string(row) + " has " +
                                     std::to_string(fields.size()) + " fields, header has " +
                                     std::to_string(header.size()));
        for (std::size_t c : input_cols) in_vals.push_back(parse_double(fields[c], row, header[c]));
        for (std::size_t c : target_cols) tg_vals.push_back(parse_double(fields[c], row, header[c]));
        ++n;
    }
    if (n == 0) throw std::runtime_error("'" + path + "': no data rows");

    Matrix inputs(n, input_cols.size());
    inputs.data = std::move(in_vals);
    Matrix targets(n, target_cols.size());
    targets.data = std::move(tg_vals);
    return make_regression_dataset(std::move(inputs), std::move(targets), path);
}

void save_tabular(const Dataset& data, const std::string& path) {
    if (data.task != TaskKind::Regression)
        throw std::runtime_error("save_tabular handles regression data only");
    data.validate();

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < data.inputs.cols; ++c) {
        if (c) out << ',';
        out << 'x' << c;
    }
    for (std::size_t c = 0; c < data.targets.cols; ++c) out << ",target" << c;
    out << '\n';

    char buf[64];
    for (std::size_t s = 0; s < data.size(); ++s) {
        for (std::size_t c = 0; c < data.inputs.cols; ++c) {
            if (c) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", data.inputs(s, c));
            out << buf;
        }
        for (std::size_t c = 0; c < data.targets.cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.targets(s, c));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write error on '" + path + "'");
}

Dataset synth_regression(SynthKind kind, std::size_t n, std::uint64_t seed) {
    if (kind != SynthKind::DiffusionProfile) throw std::runtime_error("unknown synthetic kind");
    if (n == 0) throw std::runtime_error("synth_regression: n must be positive");

    // Each sample is a snapshot of a decaying diffusion profile:
    // u(t, x) = 0.5 + sum_m c_m sin(m pi x) exp(-mu lambda_m t), evaluated
    // at one query point, with the t = 0 profile sampled on a 65-point
    // grid as context. Inputs: (mu, t, x, u0[0..64]); target: u(t, x).
    constexpr std::size_t kGrid = 65;
    constexpr std::size_t kModes = 4;
    constexpr double kPi = 3.14159265358979323846;
    constexpr double kRate = 0.05;

    auto engine = make_engine(mix_seed(seed, 0x64696666)); // "diff"
    Matrix inputs(n, 3 + kGrid);
    Matrix targets(n, 1);
    for (std::size_t s = 0; s < n; ++s) {
        const double mu = uniform_real(engine, 0.5, 2.0);
        const double t = uniform_real(engine, 0.05, 1.0);
        const double x = uniform_real(engine, 0.0, 1.0);
        double coeff[kModes];
        for (std::size_t m = 0; m < kModes; ++m)
            coeff[m] = uniform_real(engine, -0.1, 0.1) / double(m + 1);

        double* row = inputs.row(s);
        row[0] = mu;
        row[1] = t;
        row[2] = x;
        for (std::size_t g = 0; g < kGrid; ++g) {
            const double xg = double(g) / double(kGrid - 1);
            double u0 = 0.5;
            for (std::size_t m = 0; m < kModes; ++m)
                u0 += coeff[m] * std::sin(double(m + 1) * kPi * xg);
            row[3 + g] = u0;
        }

        double u = 0.5;
        for (std::size_t m = 0; m < kModes; ++m) {
            const double lambda = kRate * double((m + 1) * (m + 1)) * kPi * kPi;
            u += coeff[m] * std::sin(double(m + 1) * kPi * x) * std::exp(-mu * lambda * t);
        }
        targets(s, 0) = u;
    }
    return make_regression_dataset(std::move(inputs), std::move(targets), "diffusion_profile");
}

Dataset add_noise(const Dataset& data, const NoiseSpec& spec) {
    if (data.task != TaskKind::Regression)
        throw std::runtime_error("add_noise applies to regression targets only");
    if (!(spec.amplitude >= 0.0))
        throw std::runtime_error("noise amplitude must be non-negative");
    Dataset out = data;
    if (spec.amplitude == 0.0) return out;
    auto engine = make_engine(mix_seed(spec.seed, 0x6E6F6973)); // "nois"
    for (double& t : out.targets.data) t += uniform_real(engine, -spec.amplitude, spec.amplitude);
    return out;
}

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows, std::string name) {
    Matrix inputs(rows.size(), data.inputs.cols);
    Matrix targets(rows.size(), data.targets.cols);
    std::vector<std::int32_t> labels;
    if (!data.labels.empty()) labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        if (r >= data.size()) throw std::runtime_error("take_rows: index out of range");
        std::memcpy(inputs.row(i), data.inputs.row(r), data.inputs.cols * sizeof(double));
        std::memcpy(targets.row(i), data.targets.row(r), data.targets.cols * sizeof(double));
        if (!labels.empty()) labels[i] = data.labels[r];
    }
    Dataset out;
    out.inputs = std::move(inputs);
    out.targets = std::move(targets);
    out.labels = std::move(labels);
    out.task = data.task;
    out.num_classes = data.num_classes;
    out.name = std::move(name);
    if (!rows.empty()) out.validate();
    return out;
}

SplitResult split(const Dataset& data, double train_fraction, std::uint64_t seed,
                  bool allow_empty_test) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw std::runtime_error("train fraction must be in (0, 1]");
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto engine = make_engine(mix_seed(seed, 0x73706C74)); // "splt"
    shuffle(order, engine);

    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * double(data.size())));
    if (n_train == 0) throw std::runtime_error("split leaves no training samples");
    if (n_train == data.size() && !allow_empty_test)
        throw std::runtime_error("split leaves no test samples");

    std::vector<std::size_t> train_rows(order.begin(), order.begin() + n_train);
    std::vector<std::size_t> test_rows(order.begin() + n_train, order.end());
    SplitResult out;
    out.train = take_rows(data, train_rows, data.name + "/train");
    out.test = take_rows(data, test_rows, data.name + "/test");
    return out;
}

} // namespace ecprune
