#include "trap/zoo.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace trap::zoo {

std::string arch_to_text(const ArchDescriptor& a) {
    std::ostringstream os;
    os << "arch " << a.name << "\n";
    os << "input " << a.input_shape[0] << " " << a.input_shape[1] << " " << a.input_shape[2] << "\n";
    os << "classes " << a.num_classes << "\n";
    os << "tap " << a.default_tap << "\n";
    for (const auto& l : a.layers) {
        os << "layer " << l.id << " " << layer_kind_name(l.kind);
        switch (l.kind) {
            case LayerKind::Conv2d:
                os << " out=" << l.out << " k=" << l.kernel << " stride=" << l.stride
                   << " pad=" << l.pad;
                break;
            case LayerKind::MaxPool2d:
                os << " k=" << l.kernel << " stride=" << (l.pool_stride ? l.pool_stride : l.kernel);
                break;
            case LayerKind::Linear:
                os << " out=" << l.out;
                break;
            default:
                break;
        }
        os << "\n";
    }
    return os.str();
}

ArchDescriptor arch_from_text(const std::string& text) {
    ArchDescriptor a;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "arch") {
            ls >> a.name;
        } else if (key == "input") {
            int c, h, w;
            if (!(ls >> c >> h >> w)) throw std::invalid_argument("arch text: bad input line");
            a.input_shape = {c, h, w};
        } else if (key == "classes") {
            ls >> a.num_classes;
        } else if (key == "tap") {
            ls >> a.default_tap;
        } else if (key == "layer") {
            LayerSpec l;
            std::string kind;
            ls >> l.id >> kind;
            auto k = layer_kind_from_name(kind);
            if (!k) throw std::invalid_argument("arch text: unknown layer kind '" + kind + "'");
            l.kind = *k;
            std::string opt;
            while (ls >> opt) {
                auto eq = opt.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("arch text: bad option " + opt);
                const std::string name = opt.substr(0, eq);
                const int val = std::stoi(opt.substr(eq + 1));
                if (name == "out") l.out = val;
                else if (name == "k") l.kernel = val;
                else if (name == "stride") { l.stride = val; l.pool_stride = val; }
                else if (name == "pad") l.pad = val;
                else throw std::invalid_argument("arch text: unknown option " + name);
            }
            a.layers.push_back(l);
        } else {
            throw std::invalid_argument("arch text: unknown key '" + key + "'");
        }
    }
    return a;
}

ArchDescriptor builtin_arch(const std::string& name, int image_size) {
    ArchDescriptor a;
    a.input_shape = {1, image_size, image_size};
    a.num_classes = 10;
    a.name = name;
    auto conv = [](std::string id, int out) {
        LayerSpec l;
        l.id = std::move(id);
        l.kind = LayerKind::Conv2d;
        l.out = out;
        l.kernel = 3;
        l.pad = 1;
        return l;
    };
    auto relu = [](std::string id) {
        LayerSpec l;
        l.id = std::move(id);
        l.kind = LayerKind::Relu;
        return l;
    };
    auto pool = [](std::string id) {
        LayerSpec l;
        l.id = std::move(id);
        l.kind = LayerKind::MaxPool2d;
        l.kernel = 2;
        return l;
    };
    auto flat = [](std::string id) {
        LayerSpec l;
        l.id = std::move(id);
        l.kind = LayerKind::Flatten;
        return l;
    };
    auto lin = [](std::string id, int out) {
        LayerSpec l;
        l.id = std::move(id);
        l.kind = LayerKind::Linear;
        l.out = out;
        return l;
    };
    if (name == "cnn-a") {
        a.layers = {conv("conv1", 8),  relu("relu1"), pool("pool1"), conv("conv2", 16),
                    relu("relu2"), pool("pool2"), conv("conv3", 32), relu("relu3"),
                    flat("flat"),  lin("fc", 10)};
        a.default_tap = "relu2";
    } else if (name == "cnn-b") {
        a.layers = {conv("conv1", 6),  relu("relu1"), pool("pool1"), conv("conv2", 12),
                    relu("relu2"), conv("conv3", 24), relu("relu3"), pool("pool2"),
                    conv("conv4", 24), relu("relu4"), flat("flat"),  lin("fc", 10)};
        a.default_tap = "relu3";
    } else {
        throw std::invalid_argument("unknown architecture '" + name + "'");
    }
    return a;
}

std::vector<std::string> builtin_arch_names() { return {"cnn-a", "cnn-b"}; }

static void validate_arch(const ArchDescriptor& a) {
    int convs = 0, linears = 0;
    for (const auto& l : a.layers) {
        if (l.kind == LayerKind::Conv2d) ++convs;
        if (l.kind == LayerKind::Linear) ++linears;
        if ((l.kind == LayerKind::Conv2d || l.kind == LayerKind::Linear) && l.out <= 0)
            throw std::invalid_argument("arch '" + a.name + "': layer '" + l.id +
                                        "' needs a positive output size");
    }
    if (convs == 0 || linears == 0)
        throw std::invalid_argument("arch '" + a.name +
                                    "': needs at least one conv and one linear layer");
    if (a.input_shape.size() != 3 || a.num_classes <= 0)
        throw std::invalid_argument("arch '" + a.name + "': bad input shape or class count");
}

ComputeGraph<float> build_model(const ArchDescriptor& arch, uint64_t seed) {
    validate_arch(arch);
    Rng rng(derive_seed(seed, "init:" + arch.name));
    ComputeGraph<float> g;
    g.input_shape = arch.input_shape;
    g.num_classes = arch.num_classes;
    std::vector<int> cur = arch.input_shape;
    for (const auto& spec : arch.layers) {
        Layer<float> l;
        l.id = spec.id;
        l.kind = spec.kind;
        switch (spec.kind) {
            case LayerKind::Conv2d: {
                if (cur.size() != 3)
                    throw std::invalid_argument("arch: conv '" + spec.id + "' after flatten");
                const int ic = cur[0];
                Tensor<float> w({spec.out, ic, spec.kernel, spec.kernel});
                Tensor<float> b({spec.out});
                const double bound = 1.0 / std::sqrt(static_cast<double>(ic) * spec.kernel * spec.kernel);
                for (auto& v : w.data) v = static_cast<float>(rng.uniform(-bound, bound));
                for (auto& v : b.data) v = static_cast<float>(rng.uniform(-bound, bound));
                l.params = {std::move(w), std::move(b)};
                l.stride = spec.stride;
                l.pad = spec.pad;
                cur = {spec.out, (cur[1] + 2 * spec.pad - spec.kernel) / spec.stride + 1,
                       (cur[2] + 2 * spec.pad - spec.kernel) / spec.stride + 1};
                break;
            }
            case LayerKind::MaxPool2d:
                l.pool = spec.kernel;
                l.pool_stride = spec.pool_stride ? spec.pool_stride : spec.kernel;
                cur = {cur[0], (cur[1] - l.pool) / l.pool_stride + 1,
                       (cur[2] - l.pool) / l.pool_stride + 1};
                break;
            case LayerKind::Linear: {
                long d = 1;
                for (int x : cur) d *= x;
                if (cur.size() != 1)
                    throw std::invalid_argument("arch: linear '" + spec.id + "' needs flatten first");
                Tensor<float> w({spec.out, static_cast<int>(d)});
                Tensor<float> b({spec.out});
                const double bound = 1.0 / std::sqrt(static_cast<double>(d));
                for (auto& v : w.data) v = static_cast<float>(rng.uniform(-bound, bound));
                for (auto& v : b.data) v = static_cast<float>(rng.uniform(-bound, bound));
                l.params = {std::move(w), std::move(b)};
                cur = {spec.out};
                break;
            }
            case LayerKind::Flatten: {
                long d = 1;
                for (int x : cur) d *= x;
                cur = {static_cast<int>(d)};
                break;
            }
            case LayerKind::Relu:
            case LayerKind::WarpInput:
                break;
        }
        g.layers.push_back(std::move(l));
    }
    validate_graph(g);
    return g;
}

Tensor<float> Dataset::item(long i) const {
    const long n = images.numel() / images.dim(0);
    Tensor<float> out({1, images.dim(1), images.dim(2), images.dim(3)});
    std::copy(images.data.begin() + i * n, images.data.begin() + (i + 1) * n, out.data.begin());
    return out;
}

std::pair<Tensor<float>, std::vector<int>> Dataset::batch(const std::vector<long>& idx) const {
    const long n = images.numel() / images.dim(0);
    Tensor<float> out({static_cast<int>(idx.size()), images.dim(1), images.dim(2), images.dim(3)});
    std::vector<int> y(idx.size());
    for (size_t k = 0; k < idx.size(); ++k) {
        std::copy(images.data.begin() + idx[k] * n, images.data.begin() + (idx[k] + 1) * n,
                  out.data.begin() + static_cast<long>(k) * n);
        y[k] = labels[static_cast<size_t>(idx[k])];
    }
    return {std::move(out), std::move(y)};
}

Dataset Dataset::slice(long from, long count) const {
    std::vector<long> idx(static_cast<size_t>(count));
    for (long i = 0; i < count; ++i) idx[static_cast<size_t>(i)] = from + i;
    auto [imgs, y] = batch(idx);
    return Dataset{std::move(imgs), std::move(y)};
}

int argmax_class(const float* logits, int k) {
    int best = 0;
    for (int j = 1; j < k; ++j)
        if (logits[j] > logits[best]) best = j;
    return best;
}

std::vector<int> predict(const ComputeGraph<float>& graph, const Tensor<float>& images) {
    auto [logits, tap] = evaluate_graph(graph, images);
    (void)tap;
    const int n = logits.dim(0), k = logits.dim(1);
    std::vector<int> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = argmax_class(&logits[static_cast<long>(i) * k], k);
    return out;
}

double accuracy(const ComputeGraph<float>& graph, const Dataset& data) {
    auto pred = predict(graph, data.images);
    long hit = 0;
    for (size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == data.labels[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

TrainMetadata train_model(ComputeGraph<float>& graph, const Dataset& train, const Dataset& test,
                          int epochs, float lr, float momentum, uint64_t seed, int batch_size) {
    for (int y : train.labels)
        if (y < 0 || y >= graph.num_classes)
            throw std::invalid_argument("train: label out of range");
    Rng rng(derive_seed(seed, "train-shuffle"));

    std::map<std::string, std::vector<Tensor<float>>> velocity;
    for (const auto& l : graph.layers) {
        std::vector<Tensor<float>> vs;
        for (const auto& p : l.params) vs.emplace_back(p.shape);
        velocity[l.id] = std::move(vs);
    }

    const long n = train.size();
    std::vector<long> order(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

    const int decay_epoch = static_cast<int>(epochs * 0.7);
    float cur_lr = lr;
    for (int e = 0; e < epochs; ++e) {
        if (e == decay_epoch && e > 0) cur_lr = lr * 0.2f;
        // Fisher-Yates with the seeded stream
        for (long i = n - 1; i > 0; --i) {
            long j = static_cast<long>(rng.below(static_cast<uint64_t>(i + 1)));
            std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
        }
        for (long s = 0; s < n; s += batch_size) {
            std::vector<long> idx(order.begin() + s,
                                  order.begin() + std::min(n, s + batch_size));
            auto [x, y] = train.batch(idx);
            auto [loss, grads] = backward_graph(graph, x, LossSpec<float>::cross_entropy(y));
            if (!std::isfinite(loss))
                throw std::runtime_error("train: loss diverged at epoch " + std::to_string(e));
            const float scale = 1.0f / static_cast<float>(idx.size());
            for (auto& l : graph.layers) {
                auto& vs = velocity[l.id];
                auto& gs = grads.param_grads[l.id];
                for (size_t pi = 0; pi < l.params.size(); ++pi)
                    for (long k = 0; k < l.params[pi].numel(); ++k) {
                        vs[pi][k] = momentum * vs[pi][k] + gs[pi][k] * scale;
                        l.params[pi][k] -= cur_lr * vs[pi][k];
                    }
            }
        }
    }
    TrainMetadata meta;
    meta.seed = seed;
    meta.epochs = epochs;
    meta.train_accuracy = static_cast<float>(accuracy(graph, train));
    meta.test_accuracy = static_cast<float>(accuracy(graph, test));
    return meta;
}

Tensor<float> hidden_output(const ComputeGraph<float>& graph, const std::string& layer_id,
                            const Tensor<float>& images) {
    auto [logits, tapped] = evaluate_graph(graph, images, layer_id);
    (void)logits;
    const Tensor<float>& t = *tapped;
    const int n = t.dim(0);
    const long d = t.numel() / n;
    return Tensor<float>({n, static_cast<int>(d)}, t.data);
}

}  // namespace trap::zoo
