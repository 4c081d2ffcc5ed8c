#pragma once

#include <string>

#include "trap/zoo.hpp"

namespace trap::idx {

/// MNIST-style IDX pair (big-endian magics 0x00000803 for images,
/// 0x00000801 for labels). Pixels scale to [0,1]; labels are checked
/// against class_count. Format problems are rejected with a byte
/// offset.
zoo::Dataset load_idx_dataset(const std::string& image_path, const std::string& label_path,
                              int class_count = 10);

void save_idx_images(const std::string& path, const Tensor<float>& images);
void save_idx_labels(const std::string& path, const std::vector<int>& labels);

}  // namespace trap::idx
