#include "trap/checkpoint.hpp"

#include <cstring>

#include "trap/io.hpp"

namespace trap::zoo {

static constexpr char kMagic[8] = {'T', 'R', 'A', 'P', 'C', 'K', 'P', 'T'};
static constexpr uint32_t kVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    io::Writer w;
    w.bytes(kMagic, 8);
    w.u32(kVersion);
    w.str(arch_to_text(ckpt.arch));
    uint32_t records = 0;
    for (const auto& l : ckpt.graph.layers) records += static_cast<uint32_t>(l.params.size());
    w.u32(records);
    for (const auto& l : ckpt.graph.layers)
        for (size_t pi = 0; pi < l.params.size(); ++pi) {
            const auto& p = l.params[pi];
            w.str(l.id);
            w.str(pi == 0 ? "weight" : "bias");
            w.u32(static_cast<uint32_t>(p.rank()));
            for (int d : p.shape) w.u32(static_cast<uint32_t>(d));
            w.bytes(p.data.data(), p.data.size() * sizeof(float));
        }
    w.u64(ckpt.meta.seed);
    w.u32(static_cast<uint32_t>(ckpt.meta.epochs));
    w.f32(ckpt.meta.train_accuracy);
    w.f32(ckpt.meta.test_accuracy);
    io::write_file_atomic(path, w.buffer());
}

Checkpoint load_checkpoint(const std::string& path) {
    auto buf = io::read_file(path);
    io::Reader r(buf.data(), buf.size());
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("'" + path + "': not a TRAPCKPT file");
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("'" + path + "': unsupported checkpoint version " +
                                 std::to_string(version));
    Checkpoint ckpt;
    ckpt.arch = arch_from_text(r.str());
    ckpt.graph = build_model(ckpt.arch, 0);  // structure only; parameters overwritten below

    const uint32_t records = r.u32();
    for (uint32_t i = 0; i < records; ++i) {
        const std::string layer_id = r.str();
        const std::string name = r.str();
        const uint32_t rank = r.u32();
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(r.u32());
        int li = ckpt.graph.find(layer_id);
        if (li < 0)
            throw std::runtime_error("'" + path + "': record " + std::to_string(i) +
                                     " names unknown layer '" + layer_id + "'");
        auto& layer = ckpt.graph.layers[static_cast<size_t>(li)];
        const size_t pi = name == "weight" ? 0 : 1;
        if (pi >= layer.params.size() || (name != "weight" && name != "bias"))
            throw std::runtime_error("'" + path + "': record " + std::to_string(i) +
                                     " has unknown tensor name '" + name + "'");
        auto& p = layer.params[pi];
        if (shape != p.shape)
            throw std::runtime_error("'" + path + "': record " + std::to_string(i) + " shape " +
                                     shape_str(shape) + " does not match descriptor shape " +
                                     shape_str(p.shape));
        r.bytes(p.data.data(), p.data.size() * sizeof(float));
    }
    ckpt.meta.seed = r.u64();
    ckpt.meta.epochs = static_cast<int>(r.u32());
    ckpt.meta.train_accuracy = r.f32();
    ckpt.meta.test_accuracy = r.f32();
    return ckpt;
}

}  // namespace trap::zoo
