#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "trap/checkpoint.hpp"
#include "trap/rng.hpp"
#include "trap/zoo.hpp"

using namespace trap;
using namespace trap::zoo;

namespace {

Dataset toy_dataset(int n, int size, uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.images = Tensor<float>({n, 1, size, size});
    for (auto& v : d.images.data) v = static_cast<float>(rng.uniform(0, 1));
    d.labels.resize(n);
    for (auto& l : d.labels) l = static_cast<int>(rng.next_u64() % 10);
    return d;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("model construction is deterministic per seed and differs across seeds") {
    auto arch = builtin_arch("cnn-a");
    auto a = build_model(arch, 42);
    auto b = build_model(arch, 42);
    auto c = build_model(arch, 43);
    REQUIRE(a.layers.size() == b.layers.size());
    bool differs = false;
    for (size_t i = 0; i < a.layers.size(); ++i) {
        REQUIRE(a.layers[i].params.size() == b.layers[i].params.size());
        for (size_t j = 0; j < a.layers[i].params.size(); ++j) {
            CHECK(a.layers[i].params[j].data == b.layers[i].params[j].data);
            differs = differs || a.layers[i].params[j].data != c.layers[i].params[j].data;
        }
    }
    CHECK(differs);
}

TEST_CASE("builtin architectures validate and unknown names are rejected") {
    for (const auto& name : builtin_arch_names()) {
        auto arch = builtin_arch(name);
        auto g = build_model(arch, 1);
        validate_graph(g);
        CHECK(!arch.default_tap.empty());
        CHECK(g.find(arch.default_tap) >= 0);
    }
    CHECK_THROWS_AS(builtin_arch("cnn-z"), std::invalid_argument);
}

TEST_CASE("arch text round trip preserves the descriptor") {
    auto arch = builtin_arch("cnn-b");
    auto back = arch_from_text(arch_to_text(arch));
    CHECK(back.name == arch.name);
    CHECK(back.input_shape == arch.input_shape);
    CHECK(back.num_classes == arch.num_classes);
    CHECK(back.default_tap == arch.default_tap);
    REQUIRE(back.layers.size() == arch.layers.size());
    for (size_t i = 0; i < arch.layers.size(); ++i) {
        CHECK(back.layers[i].id == arch.layers[i].id);
        CHECK(back.layers[i].kind == arch.layers[i].kind);
        CHECK(back.layers[i].out == arch.layers[i].out);
    }
}

TEST_CASE("training with lr = 0 leaves the parameters unchanged") {
    auto arch = builtin_arch("cnn-a", 8);
    auto g = build_model(arch, 7);
    auto before = g;
    auto data = toy_dataset(16, 8, 3);
    train_model(g, data, data, 1, 0.0f, 0.9f, 5, 8);
    for (size_t i = 0; i < g.layers.size(); ++i)
        for (size_t j = 0; j < g.layers[i].params.size(); ++j)
            CHECK(g.layers[i].params[j].data == before.layers[i].params[j].data);
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto arch = builtin_arch("cnn-a", 8);
    auto data = toy_dataset(24, 8, 9);
    auto g1 = build_model(arch, 7);
    auto g2 = build_model(arch, 7);
    auto m1 = train_model(g1, data, data, 2, 0.05f, 0.9f, 11, 8);
    auto m2 = train_model(g2, data, data, 2, 0.05f, 0.9f, 11, 8);
    CHECK(m1.train_accuracy == m2.train_accuracy);
    for (size_t i = 0; i < g1.layers.size(); ++i)
        for (size_t j = 0; j < g1.layers[i].params.size(); ++j)
            CHECK(g1.layers[i].params[j].data == g2.layers[i].params[j].data);
}

TEST_CASE("a few steps of training reduce the loss proxy (accuracy not worse than chance)") {
    auto arch = builtin_arch("cnn-a", 8);
    auto g = build_model(arch, 1);
    Dataset d = toy_dataset(32, 8, 4);
    for (int i = 0; i < 32; ++i) d.labels[i] = i % 2;  // two easy classes
    auto meta = train_model(g, d, d, 10, 0.05f, 0.9f, 2, 8);
    CHECK(meta.train_accuracy >= 0.5f);
    CHECK(meta.epochs == 10);
}

TEST_CASE("hidden_output equals the tapped flattened activation") {
    auto arch = builtin_arch("cnn-a");
    auto g = build_model(arch, 13);
    auto data = toy_dataset(3, 16, 6);
    auto h = hidden_output(g, arch.default_tap, data.images);
    REQUIRE(h.rank() == 2);
    CHECK(h.dim(0) == 3);
    auto [logits, tapped] = evaluate_graph(g, data.images, arch.default_tap);
    REQUIRE(tapped.has_value());
    CHECK(h.data == tapped->data);
    CHECK(h.numel() == tapped->numel());
}

TEST_CASE("argmax breaks ties toward the lowest index") {
    float l1[4] = {0.5f, 0.5f, 0.1f, 0.5f};
    CHECK(argmax_class(l1, 4) == 0);
    float l2[3] = {-1.0f, 2.0f, 2.0f};
    CHECK(argmax_class(l2, 3) == 1);
}

TEST_CASE("checkpoint round trip is bit-exact") {
    auto arch = builtin_arch("cnn-b");
    Checkpoint c;
    c.arch = arch;
    c.graph = build_model(arch, 99);
    c.meta = {99, 5, 0.75f, 0.5f};
    auto path = temp_file("trap_test_ckpt.bin");
    save_checkpoint(c, path.string());
    auto back = load_checkpoint(path.string());
    CHECK(back.arch.name == "cnn-b");
    CHECK(back.meta.seed == 99);
    CHECK(back.meta.epochs == 5);
    CHECK(back.meta.train_accuracy == 0.75f);
    REQUIRE(back.graph.layers.size() == c.graph.layers.size());
    for (size_t i = 0; i < c.graph.layers.size(); ++i) {
        REQUIRE(back.graph.layers[i].params.size() == c.graph.layers[i].params.size());
        for (size_t j = 0; j < c.graph.layers[i].params.size(); ++j) {
            CHECK(back.graph.layers[i].params[j].shape == c.graph.layers[i].params[j].shape);
            CHECK(back.graph.layers[i].params[j].data == c.graph.layers[i].params[j].data);
        }
    }

    // probe input maps to identical logits after the round trip
    auto probe = toy_dataset(2, 16, 31).images;
    CHECK(evaluate_graph(c.graph, probe).first.data ==
          evaluate_graph(back.graph, probe).first.data);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects a corrupted magic") {
    auto arch = builtin_arch("cnn-a");
    Checkpoint c;
    c.arch = arch;
    c.graph = build_model(arch, 1);
    auto path = temp_file("trap_test_ckpt_bad.bin");
    save_checkpoint(c, path.string());
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.put('X');
    }
    CHECK_THROWS(load_checkpoint(path.string()));
    std::filesystem::remove(path);
}

TEST_CASE("dataset slicing keeps images and labels aligned") {
    auto d = toy_dataset(10, 8, 12);
    auto s = d.slice(3, 4);
    CHECK(s.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(s.labels[i] == d.labels[3 + i]);
        auto a = s.item(i), b = d.item(3 + i);
        CHECK(a.data == b.data);
    }
}
