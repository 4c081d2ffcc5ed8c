#include "trap/advbatch.hpp"

#include <cstring>
#include <stdexcept>

#include "trap/io.hpp"

namespace trap::adv {

static constexpr char kMagic[8] = {'T', 'R', 'A', 'P', 'A', 'D', 'V', 'B'};
static constexpr uint32_t kVersion = 1;

namespace {

void write_tensor(io::Writer& w, const Tensor<float>& t) {
    w.u32(static_cast<uint32_t>(t.rank()));
    for (int d : t.shape) w.u32(static_cast<uint32_t>(d));
    w.bytes(t.data.data(), t.data.size() * sizeof(float));
}

Tensor<float> read_tensor(io::Reader& r) {
    const uint32_t rank = r.u32();
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(r.u32());
    Tensor<float> t(shape);
    r.bytes(t.data.data(), t.data.size() * sizeof(float));
    return t;
}

}  // namespace

void save_adversarial_batch(const AdversarialBatch& b, const std::string& path) {
    if (!b.benign.same_shape(b.adv) ||
        static_cast<size_t>(b.benign.dim(0)) != b.labels.size())
        throw std::invalid_argument("save_adversarial_batch: misaligned batch");
    io::Writer w;
    w.bytes(kMagic, 8);
    w.u32(kVersion);
    w.str(b.source_checkpoint);
    w.str(b.preset);
    w.u32(static_cast<uint32_t>(b.epsilon_255));
    w.u32(static_cast<uint32_t>(b.iterations));
    w.u32(static_cast<uint32_t>(b.t1));
    w.f32(b.mu);
    w.f32(b.p);
    w.f32(b.beta);
    w.f32(b.gamma);
    w.str(b.tap);
    w.u64(b.seed);
    write_tensor(w, b.benign);
    write_tensor(w, b.adv);
    w.u32(static_cast<uint32_t>(b.labels.size()));
    for (int y : b.labels) w.u32(static_cast<uint32_t>(y));
    io::write_file_atomic(path, w.buffer());
}

AdversarialBatch load_adversarial_batch(const std::string& path) {
    auto buf = io::read_file(path);
    io::Reader r(buf.data(), buf.size());
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("'" + path + "': not a TRAPADVB file");
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("'" + path + "': unsupported batch version " +
                                 std::to_string(version));
    AdversarialBatch b;
    b.source_checkpoint = r.str();
    b.preset = r.str();
    b.epsilon_255 = static_cast<int>(r.u32());
    b.iterations = static_cast<int>(r.u32());
    b.t1 = static_cast<int>(r.u32());
    b.mu = r.f32();
    b.p = r.f32();
    b.beta = r.f32();
    b.gamma = r.f32();
    b.tap = r.str();
    b.seed = r.u64();
    b.benign = read_tensor(r);
    b.adv = read_tensor(r);
    const uint32_t n = r.u32();
    if (!b.benign.same_shape(b.adv) || static_cast<uint32_t>(b.benign.dim(0)) != n)
        throw std::runtime_error("'" + path + "': tensor shapes and label count disagree");
    b.labels.resize(n);
    for (auto& y : b.labels) y = static_cast<int>(r.u32());
    return b;
}

}  // namespace trap::adv
