#include "trap/idx.hpp"

#include <cmath>
#include <stdexcept>

#include "trap/io.hpp"

namespace trap::idx {

namespace {

uint32_t read_be32(const std::vector<char>& buf, size_t off, const std::string& path) {
    if (off + 4 > buf.size())
        throw std::runtime_error(path + ": truncated at byte offset " + std::to_string(off));
    const auto* u = reinterpret_cast<const unsigned char*>(buf.data() + off);
    return (uint32_t(u[0]) << 24) | (uint32_t(u[1]) << 16) | (uint32_t(u[2]) << 8) | uint32_t(u[3]);
}

void write_be32(std::vector<char>& buf, uint32_t v) {
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>(v & 0xff));
}

}  // namespace

zoo::Dataset load_idx_dataset(const std::string& image_path, const std::string& label_path,
                              int class_count) {
    const auto img = io::read_file(image_path);
    if (read_be32(img, 0, image_path) != 0x00000803u)
        throw std::runtime_error(image_path + ": bad IDX image magic at byte offset 0");
    const uint32_t n = read_be32(img, 4, image_path);
    const uint32_t h = read_be32(img, 8, image_path);
    const uint32_t w = read_be32(img, 12, image_path);
    const size_t need = 16 + static_cast<size_t>(n) * h * w;
    if (img.size() != need)
        throw std::runtime_error(image_path + ": pixel data ends at byte offset " +
                                 std::to_string(img.size()) + ", expected " + std::to_string(need));

    const auto lab = io::read_file(label_path);
    if (read_be32(lab, 0, label_path) != 0x00000801u)
        throw std::runtime_error(label_path + ": bad IDX label magic at byte offset 0");
    const uint32_t nl = read_be32(lab, 4, label_path);
    if (nl != n)
        throw std::runtime_error(label_path + ": label count " + std::to_string(nl) +
                                 " does not match " + std::to_string(n) +
                                 " images (byte offset 4)");
    if (lab.size() != 8 + static_cast<size_t>(n))
        throw std::runtime_error(label_path + ": label data ends at byte offset " +
                                 std::to_string(lab.size()) + ", expected " +
                                 std::to_string(8 + static_cast<size_t>(n)));

    zoo::Dataset ds;
    ds.images = Tensor<float>({static_cast<int>(n), 1, static_cast<int>(h), static_cast<int>(w)});
    const auto* px = reinterpret_cast<const unsigned char*>(img.data() + 16);
    for (long i = 0; i < ds.images.numel(); ++i) ds.images[i] = px[i] / 255.0f;
    ds.labels.resize(n);
    const auto* ly = reinterpret_cast<const unsigned char*>(lab.data() + 8);
    for (uint32_t i = 0; i < n; ++i) {
        ds.labels[i] = ly[i];
        if (ds.labels[i] < 0 || ds.labels[i] >= class_count)
            throw std::runtime_error(label_path + ": label " + std::to_string(ds.labels[i]) +
                                     " out of range at byte offset " + std::to_string(8 + i));
    }
    return ds;
}

void save_idx_images(const std::string& path, const Tensor<float>& images) {
    if (images.rank() != 4 || images.dim(1) != 1)
        throw std::invalid_argument("save_idx_images: expected (N,1,H,W)");
    std::vector<char> buf;
    write_be32(buf, 0x00000803u);
    write_be32(buf, static_cast<uint32_t>(images.dim(0)));
    write_be32(buf, static_cast<uint32_t>(images.dim(2)));
    write_be32(buf, static_cast<uint32_t>(images.dim(3)));
    for (long i = 0; i < images.numel(); ++i) {
        const float v = std::min(std::max(images[i], 0.0f), 1.0f);
        buf.push_back(static_cast<char>(std::lround(v * 255.0f)));
    }
    io::write_file_atomic(path, buf);
}

void save_idx_labels(const std::string& path, const std::vector<int>& labels) {
    std::vector<char> buf;
    write_be32(buf, 0x00000801u);
    write_be32(buf, static_cast<uint32_t>(labels.size()));
    for (int v : labels) buf.push_back(static_cast<char>(v));
    io::write_file_atomic(path, buf);
}

}  // namespace trap::idx
