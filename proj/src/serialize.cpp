#include "ecprune/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");
static_assert(sizeof(double) == 8, "checkpoint format assumes 64-bit doubles");

namespace ecprune {
namespace {

constexpr char kMagic[4] = {'E', 'C', 'P', 'R'};
constexpr std::uint32_t kVersion = 1;

enum : std::uint8_t { kKindNetwork = 1, kKindMask = 2, kKindScores = 3, kKindCompensation = 4 };

class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void finish() {
        out_.flush();
        if (!out_) throw std::runtime_error("write error on '" + path_ + "'");
    }

private:
    std::string path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open '" + path + "'");
        bytes_.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (in.bad()) throw std::runtime_error("read error on '" + path + "'");
    }
    void bytes(void* p, std::size_t n) {
        if (pos_ + n > bytes_.size())
            throw std::runtime_error("'" + path_ + "': truncated at byte " + std::to_string(pos_));
        std::memcpy(p, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
    double f64() { double v; bytes(&v, 8); return v; }
    void expect_end() const {
        if (pos_ != bytes_.size())
            throw std::runtime_error("'" + path_ + "': " + std::to_string(bytes_.size() - pos_) +
                                     " trailing bytes after payload");
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

void write_header(Writer& w, std::uint8_t kind) {
    w.bytes(kMagic, 4);
    w.u32(kVersion);
    w.u8(kind);
}

Reader open_checked(const std::string& path, std::uint8_t want_kind) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("'" + path + "': bad magic at byte 0");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("'" + path + "': unsupported format version " +
                                 std::to_string(version));
    const std::uint8_t kind = r.u8();
    if (kind != want_kind)
        throw std::runtime_error("'" + path + "': payload kind " + std::to_string(kind) +
                                 ", expected " + std::to_string(want_kind));
    return r;
}

std::size_t checked_count(std::uint64_t v, const Reader& r, const char* what) {
    // 2^32 entries of anything would exceed any sane checkpoint here.
    if (v > (std::uint64_t(1) << 32))
        throw std::runtime_error("'" + r.path() + "': implausible " + std::string(what) +
                                 " count " + std::to_string(v));
    return static_cast<std::size_t>(v);
}

void write_matrix_list(const std::vector<Matrix>& layers, std::uint8_t kind,
                       const std::string& path) {
    Writer w(path);
    write_header(w, kind);
    w.u64(layers.size());
    for (const Matrix& m : layers) {
        w.u64(m.rows);
        w.u64(m.cols);
        w.bytes(m.data.data(), m.data.size() * sizeof(double));
    }
    w.finish();
}

std::vector<Matrix> read_matrix_list(std::uint8_t kind, const std::string& path) {
    Reader r = open_checked(path, kind);
    std::vector<Matrix> layers(checked_count(r.u64(), r, "layer"));
    for (Matrix& m : layers) {
        const std::size_t rows = checked_count(r.u64(), r, "row");
        const std::size_t cols = checked_count(r.u64(), r, "column");
        m = Matrix(rows, cols);
        r.bytes(m.data.data(), m.data.size() * sizeof(double));
    }
    r.expect_end();
    return layers;
}

} // namespace

void save_network(const Network& net, const std::string& path) {
    Writer w(path);
    write_header(w, kKindNetwork);
    w.u64(net.layers.size());
    for (const Layer& layer : net.layers) {
        w.u64(layer.weights.rows);
        w.u64(layer.weights.cols);
        w.u8(static_cast<std::uint8_t>(layer.activation.kind));
        w.f64(layer.activation.slope);
        w.bytes(layer.weights.data.data(), layer.weights.data.size() * sizeof(double));
        w.bytes(layer.bias.data(), layer.bias.size() * sizeof(double));
    }
    w.finish();
}

Network load_network(const std::string& path) {
    Reader r = open_checked(path, kKindNetwork);
    Network net;
    net.layers.resize(checked_count(r.u64(), r, "layer"));
    for (Layer& layer : net.layers) {
        const std::size_t rows = checked_count(r.u64(), r, "row");
        const std::size_t cols = checked_count(r.u64(), r, "column");
        const std::uint8_t kind = r.u8();
        if (kind > static_cast<std::uint8_t>(ActKind::ReLU))
            throw std::runtime_error("'" + path + "': unknown activation kind " +
                                     std::to_string(kind));
        layer.activation.kind = static_cast<ActKind>(kind);
        layer.activation.slope = r.f64();
        layer.weights = Matrix(rows, cols);
        r.bytes(layer.weights.data.data(), layer.weights.data.size() * sizeof(double));
        layer.bias.resize(rows);
        r.bytes(layer.bias.data(), layer.bias.size() * sizeof(double));
    }
    r.expect_end();
    net.validate();
    return net;
}

void save_mask(const MaskSet& mask, const std::string& path) {
    Writer w(path);
    write_header(w, kKindMask);
    w.u64(mask.layers.size());
    for (const auto& layer : mask.layers) {
        w.u64(layer.rows);
        w.u64(layer.cols);
        w.bytes(layer.keep.data(), layer.keep.size());
    }
    w.finish();
}

MaskSet load_mask(const std::string& path) {
    Reader r = open_checked(path, kKindMask);
    MaskSet mask;
    mask.layers.resize(checked_count(r.u64(), r, "layer"));
    for (auto& layer : mask.layers) {
        layer.rows = checked_count(r.u64(), r, "row");
        layer.cols = checked_count(r.u64(), r, "column");
        layer.keep.resize(layer.rows * layer.cols);
        r.bytes(layer.keep.data(), layer.keep.size());
        for (std::uint8_t k : layer.keep)
            if (k > 1)
                throw std::runtime_error("'" + path + "': mask entry " + std::to_string(k) +
                                         " is not 0/1");
    }
    r.expect_end();
    return mask;
}

void save_scores(const ScoreSet& scores, const std::string& path) {
    write_matrix_list(scores.layers, kKindScores, path);
}

ScoreSet load_scores(const std::string& path) {
    return ScoreSet{read_matrix_list(kKindScores, path)};
}

void save_compensation(const CompensationSet& comp, const std::string& path) {
    write_matrix_list(comp.layers, kKindCompensation, path);
}

CompensationSet load_compensation(const std::string& path) {
    return CompensationSet{read_matrix_list(kKindCompensation, path)};
}

} // namespace ecprune
