#pragma once

#include <string>
#include <vector>

#include "trap/graph.hpp"
#include "trap/rng.hpp"
#include "trap/tensor.hpp"

namespace trap::zoo {

struct LayerSpec {
    std::string id;
    LayerKind kind = LayerKind::Relu;
    int out = 0;              // conv2d / linear output channels or units
    int kernel = 3;           // conv2d / maxpool2d
    int stride = 1, pad = 0;  // conv2d (maxpool uses kernel as stride default)
    int pool_stride = 0;      // maxpool2d; 0 = same as kernel
};

/// Architecture as data: enough to rebuild the layer list and to embed
/// in checkpoints as text.
struct ArchDescriptor {
    std::string name;
    std::vector<int> input_shape;  // (C,H,W)
    int num_classes = 0;
    std::vector<LayerSpec> layers;
    std::string default_tap;  // mid-depth relu; CLI can override
};

std::string arch_to_text(const ArchDescriptor& a);
ArchDescriptor arch_from_text(const std::string& text);

/// The two stand-in networks. "cnn-a" is the 3-conv-block source
/// model, "cnn-b" the 4-conv-block target.
ArchDescriptor builtin_arch(const std::string& name, int image_size = 16);
std::vector<std::string> builtin_arch_names();

/// Deterministic uniform fan-in initialization; same (arch, seed)
/// gives a bit-identical graph.
ComputeGraph<float> build_model(const ArchDescriptor& arch, uint64_t seed);

struct Dataset {
    Tensor<float> images;     // (N,C,H,W), values in [0,1]
    std::vector<int> labels;  // in [0, class_count)
    long size() const { return images.dim(0); }
    Tensor<float> item(long i) const;
    std::pair<Tensor<float>, std::vector<int>> batch(const std::vector<long>& idx) const;
    Dataset slice(long from, long count) const;
};

struct TrainMetadata {
    uint64_t seed = 0;
    int epochs = 0;
    float train_accuracy = 0, test_accuracy = 0;
};

/// Momentum-SGD on softmax cross-entropy with a seeded shuffle each
/// epoch. Aborts with the epoch index if the loss goes non-finite.
TrainMetadata train_model(ComputeGraph<float>& graph, const Dataset& train, const Dataset& test,
                          int epochs, float lr, float momentum, uint64_t seed, int batch_size = 32);

double accuracy(const ComputeGraph<float>& graph, const Dataset& data);

/// Argmax with lowest-index tie break.
int argmax_class(const float* logits, int k);
std::vector<int> predict(const ComputeGraph<float>& graph, const Tensor<float>& images);

/// Tapped activation flattened row-major per batch item, shape (N,D).
Tensor<float> hidden_output(const ComputeGraph<float>& graph, const std::string& layer_id,
                            const Tensor<float>& images);

}  // namespace trap::zoo
