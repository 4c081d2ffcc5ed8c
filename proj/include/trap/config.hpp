#pragma once

#include <map>
#include <string>
#include <vector>

#include "trap/attack.hpp"

namespace trap::config {

/// Flat dotted key=value text. '#' starts a comment; blank lines are
/// ignored. Duplicate keys are errors.
std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& origin);

struct DatasetConfig {
    std::string train_images, train_labels;
    std::string test_images, test_labels;
    int classes = 10;
};

struct ModelConfig {
    std::string name;
    std::string arch;  // builtin architecture name
    uint64_t seed = 1;
    int epochs = 20;
    float lr = 0.02f;
    float momentum = 0.9f;
    int batch_size = 32;
    std::string checkpoint;   // path, resolved against the output dir
    long train_from = 0;      // training-subset window into the train set
    long train_count = -1;    // -1 = to the end
    std::string train_images, train_labels;  // per-model override of dataset.train_*
};

struct AttackSection {
    std::string preset = "trap";
    std::string source;  // model name
    int count = 1000;    // test images attacked (from the front)
    std::string output = "adv.bin";
    attack::AttackConfig cfg;
    bool tap_given = false;   // false: use the model's default tap
    bool seed_given = false;  // false: derive from the master seed
};

struct EvalSection {
    std::vector<std::string> targets;  // model names; first one also used for destruction
    bool subtract_benign = true;
    std::vector<double> noise_levels = {0.02, 0.05, 0.1, 0.15, 0.2};
    std::vector<double> blur_levels = {0.5, 1, 2, 3};
    std::vector<std::string> rfd_layers;  // empty = every relu tap of the source model
    std::string batch = "adv.bin";
};

struct SweepSection {
    std::string axis;  // layer | T | preset | beta | p
    std::vector<std::string> values;
};

struct ReportSection {
    std::string dir = "out";
    bool emit_plots = false;
};

struct ExperimentConfig {
    uint64_t seed = 0;
    DatasetConfig dataset;
    std::vector<ModelConfig> models;
    AttackSection attack;
    EvalSection eval;
    SweepSection sweep;
    ReportSection report;
    std::string source_text;  // canonical text whose hash goes in the manifest

    const ModelConfig& model(const std::string& name) const;
};

/// Parses and validates; unknown keys are errors, not warnings.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin);

}  // namespace trap::config
