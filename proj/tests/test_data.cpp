#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"

#include "ecprune/data_io.hpp"
#include "ecprune/rng.hpp"
#include "testdata.hpp"

using namespace ecprune;

namespace {

std::string scratch(const std::string& name) { return testdata::scratch_dir() + "/" + name; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("load_mnist: round-trips images written in IDX layout") {
    std::vector<std::vector<std::uint8_t>> images;
    images.push_back(std::vector<std::uint8_t>(28 * 28, 0)); // all-zero image
    std::vector<std::uint8_t> second(28 * 28, 0);
    second[0] = 255;
    second[100] = 51; // 51/255 = 0.2 exactly in binary? no, but reproducibly
    images.push_back(second);
    const auto ipath = scratch("img.idx");
    const auto lpath = scratch("lab.idx");
    testdata::write_idx_images(ipath, images, 28, 28);
    testdata::write_idx_labels(lpath, {7, 3});

    const Dataset data = load_mnist(ipath, lpath);
    CHECK(data.size() == 2);
    CHECK(data.input_dim() == 784);
    CHECK(data.task == TaskKind::Classification);
    CHECK(data.num_classes == 10);
    for (double v : std::vector<double>(data.inputs.row(0), data.inputs.row(0) + 784))
        CHECK(v == 0.0);
    CHECK(data.inputs(1, 0) == 1.0);
    CHECK(data.inputs(1, 100) == 51.0 / 255.0);
    CHECK(data.labels[0] == 7);
    CHECK(data.labels[1] == 3);
}

TEST_CASE("load_mnist: bad magic, count mismatch and truncation are hard errors") {
    const auto ipath = scratch("bad_img.idx");
    const auto lpath = scratch("bad_lab.idx");
    testdata::write_idx_images(ipath, {std::vector<std::uint8_t>(784, 0)}, 28, 28);
    testdata::write_idx_labels(lpath, {1});

    // Corrupt the image magic.
    {
        std::fstream f(ipath, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.put(char(9));
    }
    CHECK_THROWS_WITH_AS((void)load_mnist(ipath, lpath),
                         doctest::Contains("bad magic"), std::runtime_error);

    testdata::write_idx_images(ipath, {std::vector<std::uint8_t>(784, 0)}, 28, 28);
    testdata::write_idx_labels(lpath, {1, 2}); // count mismatch
    CHECK_THROWS_WITH_AS((void)load_mnist(ipath, lpath),
                         doctest::Contains("count mismatch"), std::runtime_error);

    testdata::write_idx_labels(lpath, {1});
    {
        std::ofstream f(ipath, std::ios::binary | std::ios::app);
        f.put(char(0)); // trailing garbage makes the size check fail
    }
    CHECK_THROWS((void)load_mnist(ipath, lpath));
}

TEST_CASE("load_mnist: loading the same files twice is bit-identical") {
    auto engine = make_engine(3);
    std::vector<std::vector<std::uint8_t>> images;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 12; ++i) {
        images.push_back(testdata::render_digit(i % 10, engine));
        labels.push_back(std::uint8_t(i % 10));
    }
    const auto ipath = scratch("det_img.idx");
    const auto lpath = scratch("det_lab.idx");
    testdata::write_idx_images(ipath, images, 28, 28);
    testdata::write_idx_labels(lpath, labels);
    const Dataset a = load_mnist(ipath, lpath);
    const Dataset b = load_mnist(ipath, lpath);
    CHECK(a.inputs.data == b.inputs.data);
    CHECK(a.labels == b.labels);
}

TEST_CASE("load_tabular: values, order, and target-column detection") {
    const auto path = scratch("tiny.csv");
    write_text(path, "x0,x1,target0\n1,2,3\n4,5,6\n");
    const Dataset data = load_tabular(path);
    CHECK(data.size() == 2);
    CHECK(data.input_dim() == 2);
    CHECK(data.targets.cols == 1);
    CHECK(data.inputs(0, 0) == 1.0);
    CHECK(data.inputs(1, 1) == 5.0);
    CHECK(data.targets(0, 0) == 3.0);
    CHECK(data.targets(1, 0) == 6.0);

    // Target columns are found by prefix, independent of position.
    write_text(path, "target_y,a,b\n9,1,2\n");
    const Dataset mixed = load_tabular(path);
    CHECK(mixed.input_dim() == 2);
    CHECK(mixed.targets(0, 0) == 9.0);
    CHECK(mixed.inputs(0, 0) == 1.0);
}

TEST_CASE("load_tabular: header-only, ragged, and non-numeric files are errors") {
    const auto path = scratch("bad.csv");
    write_text(path, "x0,target0\n");
    CHECK_THROWS_WITH_AS((void)load_tabular(path), doctest::Contains("no data rows"),
                         std::runtime_error);

    write_text(path, "x0,target0\n1,2\n3\n");
    CHECK_THROWS_WITH_AS((void)load_tabular(path), doctest::Contains("row 3"),
                         std::runtime_error);

    write_text(path, "x0,target0\n1,2\nx,4\n");
    CHECK_THROWS_WITH_AS((void)load_tabular(path), doctest::Contains("row 3"),
                         std::runtime_error);

    write_text(path, "x0,x1\n1,2\n");
    CHECK_THROWS_WITH_AS((void)load_tabular(path), doctest::Contains("target"),
                         std::runtime_error);
}

TEST_CASE("save_tabular/load_tabular: full-precision round trip") {
    const Dataset data = testdata::random_regression(25, 4, 2, 77);
    const auto path = scratch("roundtrip.csv");
    save_tabular(data, path);
    const Dataset back = load_tabular(path);
    CHECK(back.inputs.data == data.inputs.data);
    CHECK(back.targets.data == data.targets.data);
}

TEST_CASE("synth_regression: deterministic, 68 inputs, outputs inside [0,1]") {
    const Dataset a = synth_regression(SynthKind::DiffusionProfile, 500, 9);
    const Dataset b = synth_regression(SynthKind::DiffusionProfile, 500, 9);
    const Dataset c = synth_regression(SynthKind::DiffusionProfile, 500, 10);
    CHECK(a.inputs.data == b.inputs.data);
    CHECK(a.targets.data == b.targets.data);
    CHECK(a.inputs.data != c.inputs.data);
    CHECK(a.input_dim() == 68);
    CHECK(a.targets.cols == 1);
    for (double v : a.targets.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS((void)synth_regression(SynthKind::DiffusionProfile, 0, 1));
}

TEST_CASE("add_noise: zero amplitude is bit-exact; perturbations bounded") {
    const Dataset data = synth_regression(SynthKind::DiffusionProfile, 200, 4);
    const Dataset same = add_noise(data, NoiseSpec{0.0, 123});
    CHECK(same.targets.data == data.targets.data);
    CHECK(same.inputs.data == data.inputs.data);

    const double a = 0.01;
    const Dataset noisy = add_noise(data, NoiseSpec{a, 123});
    CHECK(noisy.inputs.data == data.inputs.data);
    bool changed = false;
    for (std::size_t i = 0; i < data.targets.data.size(); ++i) {
        const double d = noisy.targets.data[i] - data.targets.data[i];
        CHECK(std::abs(d) <= a);
        if (d != 0.0) changed = true;
    }
    CHECK(changed);

    // Applying the same spec twice moves the targets again (not idempotent).
    const Dataset twice = add_noise(noisy, NoiseSpec{a, 123});
    CHECK(twice.targets.data != noisy.targets.data);
}

TEST_CASE("add_noise: mean perturbation vanishes as N grows") {
    const std::size_t n = 100000;
    Matrix in(n, 1, 0.5), tg(n, 1, 0.0);
    const Dataset data = make_regression_dataset(std::move(in), std::move(tg), "zeros");
    const double a = 0.01;
    const Dataset noisy = add_noise(data, NoiseSpec{a, 9});
    double mean = 0.0;
    for (double v : noisy.targets.data) mean += v;
    mean /= double(n);
    CHECK(std::abs(mean) < 3.0 * a / std::sqrt(3.0 * double(n)));
}

TEST_CASE("add_noise: classification data is rejected") {
    const Dataset cls = testdata::random_classification(10, 4, 3, 2);
    CHECK_THROWS((void)add_noise(cls, NoiseSpec{0.01, 1}));
}

TEST_CASE("split: sizes, disjointness, exhaustiveness, determinism") {
    const Dataset data = testdata::random_regression(10, 3, 1, 5);
    const auto s = split(data, 0.8, 42);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);

    // Every original row appears exactly once across the two parts.
    std::multiset<double> original, recombined;
    for (std::size_t i = 0; i < data.size(); ++i) original.insert(data.inputs(i, 0));
    for (std::size_t i = 0; i < s.train.size(); ++i) recombined.insert(s.train.inputs(i, 0));
    for (std::size_t i = 0; i < s.test.size(); ++i) recombined.insert(s.test.inputs(i, 0));
    CHECK(original == recombined);

    const auto again = split(data, 0.8, 42);
    CHECK(again.train.inputs.data == s.train.inputs.data);
    const auto other = split(data, 0.8, 43);
    CHECK(other.train.inputs.data != s.train.inputs.data);
}

TEST_CASE("split: empty test set needs the explicit flag") {
    const Dataset data = testdata::random_regression(6, 2, 1, 6);
    CHECK_THROWS((void)split(data, 1.0, 1));
    const auto s = split(data, 1.0, 1, /*allow_empty_test=*/true);
    CHECK(s.train.size() == 6);
    CHECK(s.test.size() == 0);
}
