#pragma once

#include <string>

#include "trap/zoo.hpp"

namespace trap::zoo {

struct Checkpoint {
    ArchDescriptor arch;
    ComputeGraph<float> graph;
    TrainMetadata meta;
};

/// Portable binary checkpoint, magic "TRAPCKPT". Round trips are
/// bit-exact; magic, version and every record shape are verified on
/// load.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace trap::zoo
