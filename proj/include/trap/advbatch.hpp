#pragma once

#include <string>
#include <vector>

#include "trap/tensor.hpp"

namespace trap::adv {

/// The product of an attack run: the benign batch, its labels, and the
/// adversarial batch, plus enough metadata to evaluate it later.
struct AdversarialBatch {
    std::string source_checkpoint;
    std::string preset;
    int epsilon_255 = 0, iterations = 0, t1 = 0;
    float mu = 0, p = 0, beta = 0, gamma = 0;
    std::string tap;
    uint64_t seed = 0;
    Tensor<float> benign;  // (N,C,H,W)
    Tensor<float> adv;     // same shape
    std::vector<int> labels;
};

/// Same binary convention as checkpoints, magic "TRAPADVB". Round
/// trips are bit-exact.
void save_adversarial_batch(const AdversarialBatch& b, const std::string& path);
AdversarialBatch load_adversarial_batch(const std::string& path);

}  // namespace trap::adv
